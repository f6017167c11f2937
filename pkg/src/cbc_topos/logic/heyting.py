"""Finite Heyting algebras.

Algebras built from a poset compute meets, joins and implication by scanning the
carrier, so lattices that are not Heyting are detected instead of assumed away.
Powerset algebras and subobject algebras use closed formulas instead, and are checked
against the same law suite.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Dict, FrozenSet, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

from ..helpers.errors import InternalConsistencyError, ToposError
from ..helpers.system import SizeLimits, check_size
from ..reports import CheckKind, Report, Tally, skipped

LOGGER = logging.getLogger(__name__)

Element = Hashable


class InvalidPosetError(ToposError):
    pass


class NotALatticeError(ToposError):
    pass


class NotHeytingError(ToposError):
    pass


class UnknownElementError(ToposError):
    pass


@dataclass(frozen=True)
class FinPoset:
    """Finite partial order. The carrier order given here is the canonical report order."""

    carrier: Tuple[str, ...]
    pairs: FrozenSet[Tuple[str, str]]

    def __post_init__(self):
        if not self.carrier:
            raise InvalidPosetError("Poset carrier must not be empty")
        if len(set(self.carrier)) != len(self.carrier):
            dupes = sorted({x for x in self.carrier if self.carrier.count(x) > 1})
            raise InvalidPosetError(f"Duplicate element ids: {dupes}", witness=dupes[0])
        known = set(self.carrier)
        for x, y in sorted(self.pairs):
            if x not in known or y not in known:
                raise InvalidPosetError(f"Order pair ({x}, {y}) references unknown element", witness=(x, y))
        for x in self.carrier:
            if (x, x) not in self.pairs:
                raise InvalidPosetError(f"Order is not reflexive at {x}", witness=x)
        for x, y in self.pairs:
            if x != y and (y, x) in self.pairs:
                raise InvalidPosetError(f"Order is not antisymmetric at ({x}, {y})", witness=(x, y))
        for x, y in self.pairs:
            for z in self.carrier:
                if (y, z) in self.pairs and (x, z) not in self.pairs:
                    raise InvalidPosetError(f"Order is not transitive at ({x}, {y}, {z})", witness=(x, y, z))

    @classmethod
    def from_relation(cls, carrier: Sequence[str], relation: Iterable[Tuple[str, str]]) -> "FinPoset":
        """Build the reflexive transitive closure of relation."""
        carrier = tuple(carrier)
        pairs = {(x, x) for x in carrier} | set(relation)
        changed = True
        while changed:
            changed = False
            for x, y in list(pairs):
                for y2, z in list(pairs):
                    if y == y2 and (x, z) not in pairs:
                        pairs.add((x, z))
                        changed = True
        return cls(carrier, frozenset(pairs))

    def leq(self, x: str, y: str) -> bool:
        return (x, y) in self.pairs


def chain_poset(length: int, prefix: str = "c") -> FinPoset:
    """c0 < c1 < ... < c{length-1}"""
    carrier = tuple(f"{prefix}{i}" for i in range(length))
    return FinPoset(carrier, frozenset((carrier[i], carrier[j]) for i in range(length) for j in range(i, length)))


def diamond_poset() -> FinPoset:
    """bot < x, y < top with x and y incomparable."""
    return FinPoset.from_relation(("bot", "x", "y", "top"), [("bot", "x"), ("bot", "y"), ("x", "top"), ("y", "top")])


def discrete_poset(size: int, prefix: str = "d") -> FinPoset:
    carrier = tuple(f"{prefix}{i}" for i in range(size))
    return FinPoset(carrier, frozenset((x, x) for x in carrier))


class HeytingAlgebra(ABC):
    """A finite Heyting algebra. neg is always impl(p, bot) and cannot be set on its own."""

    @property
    @abstractmethod
    def elements(self) -> Tuple[Element, ...]:
        ...

    @property
    @abstractmethod
    def top(self) -> Element:
        ...

    @property
    @abstractmethod
    def bot(self) -> Element:
        ...

    @abstractmethod
    def leq(self, p: Element, q: Element) -> bool:
        ...

    @abstractmethod
    def meet(self, p: Element, q: Element) -> Element:
        ...

    @abstractmethod
    def join(self, p: Element, q: Element) -> Element:
        ...

    @abstractmethod
    def impl(self, p: Element, q: Element) -> Element:
        ...

    @abstractmethod
    def contains(self, p: Element) -> bool:
        ...

    def neg(self, p: Element) -> Element:
        return self.impl(p, self.bot)

    def label(self, p: Element) -> str:
        return str(p)

    def check_element(self, p: Element) -> Element:
        if not self.contains(p):
            raise UnknownElementError(f"{p!r} is not an element of the algebra", witness=p)
        return p

    def __len__(self) -> int:
        return len(self.elements)


class TableAlgebra(HeytingAlgebra):
    """Heyting algebra stored as operation tables over a poset's carrier."""

    def __init__(
        self,
        poset: FinPoset,
        meet: Mapping[Tuple[str, str], str],
        join: Mapping[Tuple[str, str], str],
        impl: Mapping[Tuple[str, str], str],
        top: str,
        bot: str,
    ) -> None:
        self.poset = poset
        self._meet = dict(meet)
        self._join = dict(join)
        self._impl = dict(impl)
        self._top = top
        self._bot = bot
        self._known = frozenset(poset.carrier)

    @property
    def elements(self) -> Tuple[str, ...]:
        return self.poset.carrier

    @property
    def top(self) -> str:
        return self._top

    @property
    def bot(self) -> str:
        return self._bot

    def contains(self, p: Element) -> bool:
        return p in self._known

    def leq(self, p: str, q: str) -> bool:
        return self.poset.leq(p, q)

    def meet(self, p: str, q: str) -> str:
        return self._meet[(p, q)]

    def join(self, p: str, q: str) -> str:
        return self._join[(p, q)]

    def impl(self, p: str, q: str) -> str:
        return self._impl[(p, q)]

    def with_impl(self, p: str, q: str, value: str) -> "TableAlgebra":
        """Copy with one implication entry overwritten. Used to exercise the law checks."""
        impl = dict(self._impl)
        impl[(self.check_element(p), self.check_element(q))] = self.check_element(value)
        return TableAlgebra(self.poset, self._meet, self._join, impl, self._top, self._bot)


def _extremum(poset: FinPoset, candidates: List[str], greatest: bool) -> Optional[str]:
    for x in candidates:
        if all(poset.leq(y, x) if greatest else poset.leq(x, y) for y in candidates):
            return x
    return None


def heyting_from_poset(poset: FinPoset) -> TableAlgebra:
    """
    Compute the Heyting structure of a finite poset by scanning its carrier.

    Parameters
    ----------
    poset : FinPoset
        a valid finite poset

    Returns
    -------
    TableAlgebra
        algebra whose implication is the maximum of {x | x meet q <= r}

    Raises
    ------
    NotALatticeError
        some pair lacks a greatest lower or least upper bound
    NotHeytingError
        some implication candidate set has no maximum
    """
    carrier = poset.carrier
    meet: Dict[Tuple[str, str], str] = {}
    join: Dict[Tuple[str, str], str] = {}
    for p in carrier:
        for q in carrier:
            lower = [x for x in carrier if poset.leq(x, p) and poset.leq(x, q)]
            glb = _extremum(poset, lower, greatest=True)
            if glb is None:
                raise NotALatticeError(f"{p} and {q} have no greatest lower bound", witness=(p, q))
            upper = [x for x in carrier if poset.leq(p, x) and poset.leq(q, x)]
            lub = _extremum(poset, upper, greatest=False)
            if lub is None:
                raise NotALatticeError(f"{p} and {q} have no least upper bound", witness=(p, q))
            meet[(p, q)] = glb
            join[(p, q)] = lub
    top = _extremum(poset, list(carrier), greatest=True)
    bot = _extremum(poset, list(carrier), greatest=False)
    if top is None or bot is None:
        raise NotALatticeError("Poset has no top or no bottom element")

    impl: Dict[Tuple[str, str], str] = {}
    for q in carrier:
        for r in carrier:
            candidates = [x for x in carrier if poset.leq(meet[(x, q)], r)]
            best = _extremum(poset, candidates, greatest=True)
            if best is None:
                maximal = tuple(x for x in candidates if not any(x != y and poset.leq(x, y) for y in candidates))
                raise NotHeytingError(
                    f"No largest x with x meet {q} <= {r}; maximal candidates {list(maximal)}",
                    witness=(q, r, maximal),
                )
            impl[(q, r)] = best
    LOGGER.debug("Built Heyting algebra on %s elements", len(carrier))
    return TableAlgebra(poset, meet, join, impl, top, bot)


@lru_cache(maxsize=None)
def truth_values() -> TableAlgebra:
    """The two element algebra 0 < 1."""
    return heyting_from_poset(FinPoset(("0", "1"), frozenset({("0", "0"), ("0", "1"), ("1", "1")})))


class PowersetAlgebra(HeytingAlgebra):
    """P(S) ordered by inclusion. Elements are frozensets of universe members."""

    def __init__(self, universe: Sequence[str]) -> None:
        self.universe: Tuple[str, ...] = tuple(universe)
        self._position = {x: i for i, x in enumerate(self.universe)}
        self._full = frozenset(self.universe)
        self._elements: Optional[Tuple[FrozenSet[str], ...]] = None

    @property
    def elements(self) -> Tuple[FrozenSet[str], ...]:
        if self._elements is None:
            self._elements = tuple(
                frozenset(subset)
                for size in range(len(self.universe) + 1)
                for subset in combinations(self.universe, size)
            )
        return self._elements

    @property
    def top(self) -> FrozenSet[str]:
        return self._full

    @property
    def bot(self) -> FrozenSet[str]:
        return frozenset()

    def contains(self, p: Element) -> bool:
        return isinstance(p, frozenset) and p <= self._full

    def leq(self, p: FrozenSet[str], q: FrozenSet[str]) -> bool:
        return p <= q

    def meet(self, p: FrozenSet[str], q: FrozenSet[str]) -> FrozenSet[str]:
        return p & q

    def join(self, p: FrozenSet[str], q: FrozenSet[str]) -> FrozenSet[str]:
        return p | q

    def impl(self, p: FrozenSet[str], q: FrozenSet[str]) -> FrozenSet[str]:
        return (self._full - p) | q

    def label(self, p: FrozenSet[str]) -> str:
        return "{" + ",".join(sorted(p, key=self._position.__getitem__)) + "}"

    def parse(self, values: Iterable[str]) -> FrozenSet[str]:
        """Element from member names. Unknown names raise UnknownElementError."""
        values = frozenset(values)
        unknown = sorted(values - self._full)
        if unknown:
            raise UnknownElementError(f"Unknown member(s) {unknown}", witness=unknown[0])
        return values

    def parse_label(self, label: str) -> FrozenSet[str]:
        inner = label.strip()
        if inner.startswith("{") and inner.endswith("}"):
            inner = inner[1:-1]
        return self.parse(v.strip() for v in inner.split(",") if v.strip())


def powerset_algebra(universe: Sequence[str], limits: Optional[SizeLimits] = None) -> PowersetAlgebra:
    limits = limits or SizeLimits.from_env()
    check_size("powerset universe size", len(universe), limits.max_powerset_size)
    return PowersetAlgebra(universe)


def implication(algebra: HeytingAlgebra, p: Element, q: Element) -> Element:
    return algebra.impl(algebra.check_element(p), algebra.check_element(q))


@dataclass
class BooleanDecision:
    is_boolean: bool
    witnesses: Dict[str, Optional[Element]] = field(default_factory=dict)


def is_boolean(algebra: HeytingAlgebra) -> BooleanDecision:
    """Decide Booleanness by three equivalent per-element conditions, which must agree."""
    conditions = {
        "double_negation_deflationary": lambda p: algebra.leq(algebra.neg(algebra.neg(p)), p),
        "double_negation_involutive": lambda p: algebra.neg(algebra.neg(p)) == p,
        "excluded_middle": lambda p: algebra.join(p, algebra.neg(p)) == algebra.top,
    }
    witnesses: Dict[str, Optional[Element]] = {}
    for name, condition in conditions.items():
        witnesses[name] = next((p for p in algebra.elements if not condition(p)), None)
    verdicts = {name: witness is None for name, witness in witnesses.items()}
    if len(set(verdicts.values())) != 1:
        raise InternalConsistencyError(f"Booleanness conditions disagree: {verdicts}")
    return BooleanDecision(is_boolean=verdicts["excluded_middle"], witnesses=witnesses)


def verify_heyting_laws(algebra: HeytingAlgebra, name: str = "heyting") -> Report:
    """
    Exhaustively check the implication adjunction and its standard consequences.

    Parameters
    ----------
    algebra : HeytingAlgebra
        any finite algebra, possibly with corrupted tables
    name : str
        command name echoed in the report

    Returns
    -------
    Report
        one entry per law with the first witness in canonical order
    """
    els = algebra.elements
    top, bot = algebra.top, algebra.bot
    leq, meet, join, impl, neg = algebra.leq, algebra.meet, algebra.join, algebra.impl, algebra.neg

    adjunction = Tally("implication_adjunction")
    distributes = Tally("implication_distributes_over_meet")
    currying = Tally("implication_currying")
    order = Tally("order_via_implication")
    inflationary = Tally("double_negation_inflationary")
    to_double_neg = Tally("implication_to_double_negation")
    noncontradiction = Tally("noncontradiction")
    disjoint = Tally("disjoint_below_negation")
    negation_derived = Tally("negation_is_implication_to_bottom")
    de_morgan_join = Tally("de_morgan_join")
    de_morgan_meet_weak = Tally("de_morgan_meet_weak")
    de_morgan_meet_strict = Tally("de_morgan_meet_strict", kind=CheckKind.INFO)

    for p in els:
        np = neg(p)
        negation_derived.observe(np == impl(p, bot), p)
        inflationary.observe(leq(p, neg(np)), p)
        to_double_neg.observe(impl(p, neg(np)) == top, p)
        noncontradiction.observe(meet(p, np) == bot, p)
        for q in els:
            pq = meet(p, q)
            order.observe(leq(p, q) == (impl(p, q) == top), (p, q))
            if pq == bot:
                disjoint.observe(leq(q, np), (p, q))
            de_morgan_join.observe(neg(join(p, q)) == meet(np, neg(q)), (p, q))
            de_morgan_meet_weak.observe(leq(join(np, neg(q)), neg(pq)), (p, q))
            de_morgan_meet_strict.observe(join(np, neg(q)) == neg(pq), (p, q))
            for r in els:
                left = leq(pq, r)
                adjunction.observe(left == leq(p, impl(q, r)) == leq(q, impl(p, r)), (p, q, r))
                distributes.observe(impl(p, meet(q, r)) == meet(impl(p, q), impl(p, r)), (p, q, r))
                currying.observe(impl(pq, r) == impl(p, impl(q, r)), (p, q, r))

    report = Report(command=name)
    for tally in (
        adjunction,
        distributes,
        currying,
        order,
        negation_derived,
        inflationary,
        to_double_neg,
        noncontradiction,
        disjoint,
        de_morgan_join,
        de_morgan_meet_weak,
    ):
        report.add(tally.result())
    report.add(de_morgan_meet_strict.result(detail="fails exactly when the algebra is not Boolean"))
    LOGGER.debug("Checked Heyting laws on %s elements", len(els))
    return report


Subset = FrozenSet[Hashable]


@dataclass(frozen=True)
class QuantifierTriple:
    """Existential image, inverse image and universal image along a finite function."""

    domain: Tuple[Hashable, ...]
    codomain: Tuple[Hashable, ...]
    mapping: Tuple[Tuple[Hashable, Hashable], ...]

    @property
    def function(self) -> Dict[Hashable, Hashable]:
        return dict(self.mapping)

    def exists(self, subset: Subset) -> Subset:
        f = self.function
        return frozenset(f[a] for a in subset)

    def forall(self, subset: Subset) -> Subset:
        f = self.function
        return frozenset(b for b in self.codomain if all(a in subset for a in self.domain if f[a] == b))

    def pullback(self, subset: Subset) -> Subset:
        f = self.function
        return frozenset(a for a in self.domain if f[a] in subset)

    def box(self, subset: Subset) -> Subset:
        """Interior of subset: the union of the fibres it contains."""
        return self.pullback(self.forall(subset))

    def diamond(self, subset: Subset) -> Subset:
        """Saturation of subset: the union of the fibres it meets."""
        return self.pullback(self.exists(subset))

    def verify(self, limits: Optional[SizeLimits] = None) -> Report:
        limits = limits or SizeLimits.from_env()
        report = Report(command="quantifiers")
        names = ("exists_left_adjoint", "forall_right_adjoint", "box_deflationary", "diamond_inflationary")
        if len(self.domain) + len(self.codomain) > limits.max_powerset_size:
            for check in names + ("diamond_left_adjoint_to_box",):
                report.add(skipped(check, "too many subsets for an exhaustive scan", kind=CheckKind.VALIDATION))
            return report
        left, right, deflate, inflate, modal = (Tally(n) for n in names + ("diamond_left_adjoint_to_box",))
        sources = _subsets(self.domain)
        targets = _subsets(self.codomain)
        for s in sources:
            deflate.observe(self.box(s) <= s, s)
            inflate.observe(s <= self.diamond(s), s)
            for t in targets:
                left.observe((s <= self.pullback(t)) == (self.exists(s) <= t), (s, t))
                right.observe((self.pullback(t) <= s) == (t <= self.forall(s)), (s, t))
            for s2 in sources:
                modal.observe((self.diamond(s) <= s2) == (s <= self.box(s2)), (s, s2))
        for tally in (left, right, deflate, inflate, modal):
            report.add(tally.result())
        return report


def _subsets(items: Sequence[Hashable]) -> List[Subset]:
    return [frozenset(c) for size in range(len(items) + 1) for c in combinations(items, size)]


def quantifier_adjoints(
    domain: Sequence[Hashable],
    codomain: Sequence[Hashable],
    mapping: Mapping[Hashable, Hashable],
    limits: Optional[SizeLimits] = None,
) -> QuantifierTriple:
    """
    Quantifiers along f: domain -> codomain.

    Raises
    ------
    UnknownElementError
        f is not total on domain or leaves codomain
    SizeLimitError
        either side is too large for its powerset
    """
    limits = limits or SizeLimits.from_env()
    check_size("quantifier domain size", len(domain), limits.max_powerset_size)
    check_size("quantifier codomain size", len(codomain), limits.max_powerset_size)
    targets = set(codomain)
    for a in domain:
        if a not in mapping:
            raise UnknownElementError(f"Function is not defined on {a!r}", witness=a)
        if mapping[a] not in targets:
            raise UnknownElementError(f"{a!r} maps outside the codomain to {mapping[a]!r}", witness=a)
    return QuantifierTriple(tuple(domain), tuple(codomain), tuple((a, mapping[a]) for a in domain))

