"""
The copresheaf topos [C, FinSet] over a finite category C.

Truth values are cosieves, so forcing propagates forward along arrows: an element is
forced at a stage when its truth value there is the total cosieve.
"""

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Dict, FrozenSet, Hashable, Iterable, Optional, Tuple, Union

from ..helpers.errors import ToposError
from ..helpers.system import SizeLimits, check_size
from ..logic.heyting import HeytingAlgebra, UnknownElementError
from ..reports import Report, Tally
from .fincat import Cosieve, FinCategory, cosieve_transition, cosieves_at, total_cosieve

if TYPE_CHECKING:
    from ..protocol.protocol import Protocol

LOGGER = logging.getLogger(__name__)

Value = Hashable


class InvalidSubobjectError(ToposError):
    pass


class NotNaturalError(ToposError):
    pass


class MalformedFormulaError(ToposError):
    pass


@dataclass(eq=False)
class Copresheaf:
    """Covariant FinSet-valued functor. action[(f, x)] is f acting on x in values[dom f]."""

    base: FinCategory
    values: Dict[str, Tuple[Value, ...]]
    action: Dict[Tuple[str, Value], Value]
    name: str = ""
    _members: Dict[str, FrozenSet[Value]] = field(default_factory=dict, repr=False)

    def elements(self, obj: str) -> Tuple[Value, ...]:
        return self.values[self.base.check_object(obj)]

    def has(self, obj: str, x: Value) -> bool:
        if obj not in self._members:
            self._members[obj] = frozenset(self.elements(obj))
        return x in self._members[obj]

    def check_element(self, obj: str, x: Value) -> Value:
        if not self.has(obj, x):
            raise UnknownElementError(f"{x!r} is not an element of {self.name or 'X'}({obj})", witness=(obj, x))
        return x

    def act(self, arrow: str, x: Value) -> Value:
        return self.action[(arrow, x)]

    @property
    def size(self) -> int:
        return sum(len(v) for v in self.values.values())

    def pairs(self) -> Iterable[Tuple[str, Value]]:
        for obj in self.base.objects:
            for x in self.values[obj]:
                yield obj, x

    def validate(self) -> Report:
        """Functor laws: typed action, identities act trivially, composites act in sequence."""
        base = self.base
        report = Report(command=f"validate-copresheaf {self.name}".strip())
        typed = Tally("action_typed")
        unit = Tally("identity_action")
        comp = Tally("composite_action")
        for name, arrow in base.arrows.items():
            for x in self.values.get(arrow.dom, ()):
                image = self.action.get((name, x))
                typed.observe(image is not None and self.has(arrow.cod, image), (name, x))
        for obj in base.objects:
            for x in self.values.get(obj, ()):
                unit.observe(self.action.get((base.identity[obj], x)) == x, (obj, x))
        for (g, f), gf in base.composition.items():
            for x in self.values.get(base.dom(f), ()):
                step = self.action.get((f, x))
                comp.observe(self.action.get((gf, x)) == self.action.get((g, step)), (g, f, x))
        for tally in (typed, unit, comp):
            report.add(tally.result())
        return report


def terminal_copresheaf(category: FinCategory) -> Copresheaf:
    if "terminal" not in category._cache:
        category._cache["terminal"] = Copresheaf(
            category,
            {x: ("*",) for x in category.objects},
            {(f, "*"): "*" for f in category.arrows},
            name="1",
        )
    return category._cache["terminal"]


def hom_from(category: FinCategory, obj: str) -> Copresheaf:
    """The representable C(obj, -): executions out of obj, acted on by postcomposition."""
    category.check_object(obj)
    values = {x: category.hom(obj, x) for x in category.objects}
    action = {
        (g, f): category.compose(g, f) for x in category.objects for f in values[x] for g in category.out_arrows(x)
    }
    return Copresheaf(category, values, action, name=f"hom({obj},-)")


def omega(category: FinCategory, limits: Optional[SizeLimits] = None) -> Copresheaf:
    """Subobject classifier: cosieves at each object, moved along arrows by transition."""
    if "omega" not in category._cache:
        values = {x: cosieves_at(category, x, limits) for x in category.objects}
        action = {
            (f, r): cosieve_transition(category, r, f)
            for x in category.objects
            for r in values[x]
            for f in category.out_arrows(x)
        }
        category._cache["omega"] = Copresheaf(category, values, action, name="Omega")
        LOGGER.debug("Omega over %r has %s elements", category, category._cache["omega"].size)
    return category._cache["omega"]


@dataclass(eq=False)
class NatTrans:
    source: Copresheaf
    target: Copresheaf
    components: Dict[str, Dict[Value, Value]]
    name: str = ""

    def __call__(self, obj: str, x: Value) -> Value:
        return self.components[obj][x]

    def naturality_failure(self) -> Optional[Tuple[str, Value]]:
        base = self.source.base
        for name, arrow in base.arrows.items():
            for x in self.source.values[arrow.dom]:
                if self.target.act(name, self(arrow.dom, x)) != self(arrow.cod, self.source.act(name, x)):
                    return name, x
        return None

    def check_natural(self) -> "NatTrans":
        witness = self.naturality_failure()
        if witness is not None:
            raise NotNaturalError(f"{self.name or 'map'} is not natural at arrow {witness[0]}", witness=witness)
        return self

    def after(self, other: "NatTrans") -> "NatTrans":
        """self after other"""
        return NatTrans(
            other.source,
            self.target,
            {obj: {x: self(obj, y) for x, y in comp.items()} for obj, comp in other.components.items()},
            name=f"{self.name}.{other.name}",
        )


@dataclass(eq=False)
class Subobject:
    parent: Copresheaf
    selection: Dict[str, FrozenSet[Value]]

    def contains(self, obj: str, x: Value) -> bool:
        return x in self.selection.get(obj, frozenset())

    def key(self) -> FrozenSet[Tuple[str, Value]]:
        return frozenset((obj, x) for obj, xs in self.selection.items() for x in xs)

    def validate(self) -> "Subobject":
        base = self.parent.base
        for obj in base.objects:
            for x in sorted(self.selection.get(obj, frozenset()), key=str):
                if not self.parent.has(obj, x):
                    raise InvalidSubobjectError(f"{x!r} is not in the parent at {obj}", witness=(obj, x))
                for f in base.out_arrows(obj):
                    if not self.contains(base.cod(f), self.parent.act(f, x)):
                        raise InvalidSubobjectError(
                            f"Selection is not closed under {f} at {obj}", witness=(obj, x, f)
                        )
        return self


def subobject_from_key(parent: Copresheaf, key: Iterable[Tuple[str, Value]]) -> Subobject:
    selection: Dict[str, set] = {obj: set() for obj in parent.base.objects}
    for obj, x in key:
        selection[obj].add(x)
    return Subobject(parent, {obj: frozenset(xs) for obj, xs in selection.items()})


def classify(subobject: Subobject) -> NatTrans:
    """chi(x) at c is the cosieve of arrows f out of c that carry x into the subobject."""
    subobject.validate()
    parent = subobject.parent
    base = parent.base
    components = {
        obj: {
            x: Cosieve(
                obj,
                frozenset(f for f in base.out_arrows(obj) if subobject.contains(base.cod(f), parent.act(f, x))),
            )
            for x in parent.values[obj]
        }
        for obj in base.objects
    }
    return NatTrans(parent, omega(base), components, name="chi")


def comprehension(proposition: NatTrans) -> Subobject:
    """Elements sent to the total cosieve."""
    proposition.check_natural()
    base = proposition.source.base
    return Subobject(
        proposition.source,
        {
            obj: frozenset(x for x in proposition.source.values[obj] if proposition(obj, x) == total_cosieve(base, obj))
            for obj in base.objects
        },
    )


def subobjects(parent: Copresheaf, limits: Optional[SizeLimits] = None) -> Tuple[FrozenSet[Tuple[str, Value]], ...]:
    """Every subobject as a key, smallest first. Unions of principal subobjects, as for cosieves."""
    limits = limits or SizeLimits.from_env()
    check_size("copresheaf element count", parent.size, limits.max_sub_elements)
    base = parent.base
    principals = []
    for obj, x in parent.pairs():
        principals.append(frozenset((base.cod(f), parent.act(f, x)) for f in base.out_arrows(obj)))
    found = {frozenset()}
    for principal in principals:
        found |= {known | principal for known in found}
    order = {pair: i for i, pair in enumerate(parent.pairs())}
    return tuple(sorted(found, key=lambda k: (len(k), sorted(order[p] for p in k))))


class SubobjectAlgebra(HeytingAlgebra):
    """Sub(X) with pointwise meet and join and forward-looking implication."""

    def __init__(self, parent: Copresheaf, limits: Optional[SizeLimits] = None) -> None:
        self.parent = parent
        self._elements = subobjects(parent, limits)
        self._known = frozenset(self._elements)
        self._all = frozenset(parent.pairs())
        base = parent.base
        self._futures = {
            (obj, x): tuple((base.cod(f), parent.act(f, x)) for f in base.out_arrows(obj)) for obj, x in self._all
        }

    @property
    def elements(self) -> Tuple[FrozenSet[Tuple[str, Value]], ...]:
        return self._elements

    @property
    def top(self) -> FrozenSet[Tuple[str, Value]]:
        return self._all

    @property
    def bot(self) -> FrozenSet[Tuple[str, Value]]:
        return frozenset()

    def contains(self, p) -> bool:
        return p in self._known

    def leq(self, p, q) -> bool:
        return p <= q

    def meet(self, p, q):
        return p & q

    def join(self, p, q):
        return p | q

    def impl(self, p, q):
        return frozenset(pair for pair in self._all if all(fx in q for fx in self._futures[pair] if fx in p))

    def label(self, p) -> str:
        return "{" + ",".join(sorted(f"{obj}:{x}" for obj, x in p)) + "}"

    def as_subobject(self, p) -> Subobject:
        return subobject_from_key(self.parent, p)


def sub_heyting_ops(parent: Copresheaf, limits: Optional[SizeLimits] = None) -> SubobjectAlgebra:
    return SubobjectAlgebra(parent, limits)


def forces(obj: str, proposition: NatTrans, x: Value) -> bool:
    """obj forces proposition(x) when its truth value at obj is the total cosieve."""
    proposition.source.check_element(obj, x)
    return proposition(obj, x) == total_cosieve(proposition.source.base, obj)


@dataclass(frozen=True)
class Atom:
    proposition: NatTrans


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Not:
    body: "Formula"


Formula = Union[Atom, Top, Bot, And, Or, Implies, Not]


def _check_formula(formula: Formula, domain: Copresheaf) -> None:
    if isinstance(formula, Atom):
        if formula.proposition.source is not domain:
            raise MalformedFormulaError("Atoms must share the domain of the evaluated element", witness=formula)
    elif isinstance(formula, (And, Or, Implies)):
        _check_formula(formula.left, domain)
        _check_formula(formula.right, domain)
    elif isinstance(formula, Not):
        _check_formula(formula.body, domain)
    elif not isinstance(formula, (Top, Bot)):
        raise MalformedFormulaError(f"Unknown formula node {formula!r}", witness=formula)


def eval_formula(obj: str, formula: Formula, x: Value, domain: Copresheaf) -> bool:
    """
    Kripke-Joyal evaluation of a propositional formula at stage obj.

    Implication quantifies over every arrow out of obj; negation is implication to
    bottom. Atoms must be propositions on domain and x must lie in domain(obj).
    """
    _check_formula(formula, domain)
    domain.check_element(obj, x)
    return _evaluate(obj, formula, x, domain)


def _evaluate(obj: str, formula: Formula, x: Value, domain: Copresheaf) -> bool:
    if isinstance(formula, Top):
        return True
    if isinstance(formula, Bot):
        return False
    if isinstance(formula, Atom):
        return formula.proposition(obj, x) == total_cosieve(domain.base, obj)
    if isinstance(formula, And):
        return _evaluate(obj, formula.left, x, domain) and _evaluate(obj, formula.right, x, domain)
    if isinstance(formula, Or):
        return _evaluate(obj, formula.left, x, domain) or _evaluate(obj, formula.right, x, domain)
    if isinstance(formula, Not):
        return _evaluate(obj, Implies(formula.body, Bot()), x, domain)
    base = domain.base
    for f in base.out_arrows(obj):
        later, fx = base.cod(f), domain.act(f, x)
        if _evaluate(later, formula.left, fx, domain) and not _evaluate(later, formula.right, fx, domain):
            return False
    return True


def formula_subobject(algebra: SubobjectAlgebra, formula: Formula) -> FrozenSet[Tuple[str, Value]]:
    """The same formula computed in Sub(X): comprehensions combined with the algebra's operations."""
    _check_formula(formula, algebra.parent)
    if isinstance(formula, Top):
        return algebra.top
    if isinstance(formula, Bot):
        return algebra.bot
    if isinstance(formula, Atom):
        return comprehension(formula.proposition).key()
    if isinstance(formula, Not):
        return algebra.neg(formula_subobject(algebra, formula.body))
    left = formula_subobject(algebra, formula.left)
    right = formula_subobject(algebra, formula.right)
    if isinstance(formula, And):
        return algebra.meet(left, right)
    if isinstance(formula, Or):
        return algebra.join(left, right)
    return algebra.impl(left, right)


def elementary_forcing(sigma: FinCategory, state: str, holds: Callable[[str, str], bool]) -> bool:
    """
    state forces a base-level predicate along every execution out of it.

    The predicate is evaluated on each element (cod, execution) of hom(state, -) and must
    hold on all of them.
    """
    executions = hom_from(sigma, state)
    verdicts = [holds(later, f) for later in sigma.objects for f in executions.elements(later)]
    LOGGER.debug("%s executions out of %s checked", len(verdicts), state)
    return all(verdicts)


def elementary_safety_forcing(protocol: "Protocol", proposition: FrozenSet[str], state: str) -> bool:
    """state forces (x => p) at the estimate of every execution's codomain."""
    algebra = protocol.algebra
    p = protocol.check_proposition(proposition)
    protocol.check_state(state)
    return elementary_forcing(
        protocol.sigma,
        state,
        lambda later, _: algebra.impl(protocol.estimate(later), p) == algebra.top,
    )


def unfolded_safety_forcing(protocol: "Protocol", proposition: FrozenSet[str], state: str) -> bool:
    """Consensus-value form: every value in a reachable estimate is a value of p."""
    p = protocol.check_proposition(proposition)
    protocol.check_state(state)
    return all(
        value in p
        for later in protocol.sigma.reachable(state)
        for value in protocol.consensus
        if value in protocol.estimate(later)
    )
