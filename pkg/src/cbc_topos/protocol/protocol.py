"""Estimate consensus protocols and the direct safety calculus"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, FrozenSet, Iterable, Optional, Sequence, Tuple

from ..category.fincat import FinCategory, FinFunctor, category_from_dag, poset_category, validate_category
from ..helpers.errors import InternalConsistencyError, ToposError
from ..helpers.system import SizeLimits
from ..logic.heyting import FinPoset, PowersetAlgebra, UnknownElementError, powerset_algebra
from ..reports import CheckKind, Report, Tally

LOGGER = logging.getLogger(__name__)

Proposition = FrozenSet[str]


class UnknownStateError(ToposError):
    pass


class UnknownPropositionError(ToposError):
    pass


class RequiresFunctorialEstimatorError(ToposError):
    pass


class EstimateOrder(str, Enum):
    """Direction of the arrows of PC. Inclusion: S -> S' iff S <= S'. Refinement: iff S' <= S."""

    INCLUSION = "inclusion"
    REFINEMENT = "refinement"


@dataclass(eq=False)
class Protocol:
    """
    A finite estimate consensus protocol.

    Parameters
    ----------
    consensus : Tuple[str, ...]
        consensus values C
    sigma : FinCategory
        protocol states and executions
    estimates : Dict[str, Proposition]
        estimate of every state, a subset of C
    strict_functorial : bool
        require estimates to move along executions in the chosen order
    order : EstimateOrder
        order of the poset category PC the estimator lands in
    waive_estimator_condition : bool
        accept bottom estimates; validation reports them as waived
    """

    consensus: Tuple[str, ...]
    sigma: FinCategory
    estimates: Dict[str, Proposition]
    strict_functorial: bool = False
    order: EstimateOrder = EstimateOrder.INCLUSION
    waive_estimator_condition: bool = False
    name: str = ""
    limits: Optional[SizeLimits] = None
    _cache: Dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.consensus = tuple(self.consensus)
        self.algebra: PowersetAlgebra = powerset_algebra(self.consensus, self.limits)
        for state in self.sigma.objects:
            if state not in self.estimates:
                raise UnknownStateError(f"State {state!r} has no estimate", witness=state)
        for state, estimate in self.estimates.items():
            if state not in self.sigma.identity:
                raise UnknownStateError(f"Estimate given for unknown state {state!r}", witness=state)
            self.estimates[state] = self.check_proposition(estimate)

    @property
    def states(self) -> Tuple[str, ...]:
        return self.sigma.objects

    def check_state(self, state: str) -> str:
        if state not in self.sigma.identity:
            raise UnknownStateError(f"Unknown state {state!r}", witness=state)
        return state

    def check_proposition(self, proposition: Iterable[str]) -> Proposition:
        values = frozenset(proposition)
        try:
            return self.algebra.parse(values)
        except UnknownElementError as e:
            raise UnknownPropositionError(f"Proposition {sorted(values)} is not a subset of C", e.witness) from e

    def estimate(self, state: str) -> Proposition:
        return self.estimates[self.check_state(state)]

    def label(self, proposition: Proposition) -> str:
        return self.algebra.label(proposition)

    def propositions(self) -> Tuple[Proposition, ...]:
        return self.algebra.elements

    def future(self, state: str) -> Tuple[str, ...]:
        return self.sigma.reachable(self.check_state(state))

    def precedes(self, p: Proposition, q: Proposition) -> bool:
        """p -> q is an arrow of PC in the protocol's order."""
        return p <= q if self.order == EstimateOrder.INCLUSION else q <= p

    def with_estimate(self, state: str, estimate: Iterable[str]) -> "Protocol":
        estimates = dict(self.estimates)
        estimates[self.check_state(state)] = frozenset(estimate)
        return replace(self, estimates=estimates, _cache={})

    def pc_category(self) -> FinCategory:
        """PC as a thin category on proposition labels, in the protocol's order."""
        if "pc" not in self._cache:
            labels = tuple(self.label(p) for p in self.propositions())
            props = self.propositions()
            pairs = frozenset((self.label(p), self.label(q)) for p in props for q in props if self.precedes(p, q))
            self._cache["pc"] = poset_category(FinPoset(labels, pairs), name=f"PC[{self.order.value}]")
        return self._cache["pc"]

    def monotonicity_failure(self) -> Optional[str]:
        for name, arrow in self.sigma.arrows.items():
            if not self.precedes(self.estimates[arrow.dom], self.estimates[arrow.cod]):
                return name
        return None

    def estimator_functor(self) -> FinFunctor:
        """E: sigma -> PC. Only defined for strict functorial protocols with monotone estimates."""
        if not self.strict_functorial:
            raise RequiresFunctorialEstimatorError(f"Protocol {self.name or ''} is not strict functorial".strip())
        failure = self.monotonicity_failure()
        if failure is not None:
            raise RequiresFunctorialEstimatorError(
                f"Execution {failure} does not map to an arrow of PC in {self.order.value} order", witness=failure
            )
        if "estimator" not in self._cache:
            obj_map = {w: self.label(self.estimates[w]) for w in self.states}
            arr_map = {
                name: f"{obj_map[arrow.dom]}>{obj_map[arrow.cod]}" for name, arrow in self.sigma.arrows.items()
            }
            self._cache["estimator"] = FinFunctor(self.sigma, self.pc_category(), obj_map, arr_map, name="E")
        return self._cache["estimator"]

    def safety_table(self) -> Dict[Proposition, FrozenSet[str]]:
        """Every proposition with the states it is safe in."""
        if "safety" not in self._cache:
            self._cache["safety"] = {
                p: frozenset(w for w in self.states if is_safe(self, p, w)) for p in self.propositions()
            }
        return self._cache["safety"]


def is_safe(protocol: Protocol, proposition: Iterable[str], state: str) -> bool:
    """Every execution out of state, identity included, lands in an estimate entailing proposition."""
    p = protocol.check_proposition(proposition)
    algebra = protocol.algebra
    return all(
        algebra.impl(protocol.estimates[protocol.sigma.cod(f)], p) == algebra.top
        for f in protocol.sigma.out_arrows(protocol.check_state(state))
    )


def compatible(protocol: Protocol, first: str, second: str) -> Optional[str]:
    """First common future of the two states in state order, or None."""
    later = set(protocol.future(first)) & set(protocol.future(second))
    return next((w for w in protocol.states if w in later), None)


def validate_protocol(protocol: Protocol, strict_estimator: bool = False) -> Report:
    """
    Validate the state category, the estimator condition and (if requested) functoriality.

    The estimator condition is checked by sweeping every proposition and, separately, as
    "estimate is not bottom". The two must agree state by state.
    """
    algebra = protocol.algebra
    report = Report(command=f"validate {protocol.name}".strip())
    report.extend(validate_category(protocol.sigma).results, prefix="sigma")

    sweep = Tally("estimator_condition")
    shortcut = Tally("estimate_not_bottom")
    for w in protocol.states:
        estimate = protocol.estimates[w]
        state_ok = True
        for p in algebra.elements:
            if algebra.leq(estimate, p):
                holds = not algebra.leq(estimate, algebra.neg(p))
                state_ok &= holds
                sweep.observe(holds, {"state": w, "proposition": p})
        nonzero = shortcut.observe(estimate != algebra.bot, w)
        if nonzero != state_ok:
            raise InternalConsistencyError(f"Estimator condition sweep and bottom test disagree at {w}")
    waived = protocol.waive_estimator_condition
    if waived and sweep.violations:
        LOGGER.warning("Estimator condition waived with %s violations", sweep.violations)
    report.add(sweep.result(detail="waived" if waived else "", waived=waived))
    report.add(shortcut.result(waived=waived))

    if strict_estimator:
        literal = Tally("estimator_condition_literal")
        for w in protocol.states:
            estimate = protocol.estimates[w]
            for p in algebra.elements:
                if algebra.leq(estimate, p):
                    literal.observe(
                        algebra.neg(algebra.impl(estimate, algebra.neg(p))) == algebra.top,
                        {"state": w, "proposition": p},
                    )
        report.add(literal.result(detail="internalised form, unsatisfiable for estimates below top"))

    if protocol.strict_functorial:
        functorial = Tally("estimator_functorial")
        for name, arrow in protocol.sigma.arrows.items():
            functorial.observe(
                protocol.precedes(protocol.estimates[arrow.dom], protocol.estimates[arrow.cod]), name
            )
        report.add(functorial.result(detail=f"{protocol.order.value} order"))
    return report


def check_consistency_lemmas(protocol: Protocol) -> Report:
    """Persistence, forward, current and backward consistency over every proposition and state."""
    algebra = protocol.algebra
    safe = protocol.safety_table()
    report = Report(command=f"lemmas {protocol.name}".strip())
    persistence = Tally("persistence", CheckKind.THEOREM)
    forward = Tally("forward_consistency", CheckKind.THEOREM)
    current = Tally("current_consistency", CheckKind.THEOREM)
    backward = Tally("backward_consistency", CheckKind.THEOREM)
    sigma = protocol.sigma
    for p in algebra.elements:
        not_p = algebra.neg(p)
        for w in protocol.states:
            p_safe = w in safe[p]
            for q in algebra.elements:
                if algebra.leq(p, q):
                    persistence.observe(not p_safe or w in safe[q], {"p": p, "q": q, "state": w})
            current.observe(not (p_safe and w in safe[not_p]), {"p": p, "state": w})
            for f in sigma.out_arrows(w):
                later = sigma.cod(f)
                forward.observe(not p_safe or later in safe[p], {"p": p, "execution": f})
                backward.observe(not (later in safe[p] and w in safe[not_p]), {"p": p, "execution": f})
    for tally in (persistence, forward, current, backward):
        report.add(tally.result())
    return report


def check_safety_theorem(protocol: Protocol) -> Report:
    """Inconsistent propositions are never safe at compatible states."""
    algebra = protocol.algebra
    safe = protocol.safety_table()
    report = Report(command=f"theorem {protocol.name}".strip())
    states = protocol.states
    compatible_pairs = [(a, b) for a in states for b in states if compatible(protocol, a, b) is not None]
    inconsistent = Tally("inconsistent_propositions_not_safe", CheckKind.THEOREM)
    contradictory = Tally("contradictory_propositions_not_safe", CheckKind.THEOREM)
    symmetric = Tally("compatibility_symmetric", CheckKind.THEOREM)
    for a, b in compatible_pairs:
        symmetric.observe(compatible(protocol, b, a) is not None, (a, b))
    for p in algebra.elements:
        for q in algebra.elements:
            if algebra.meet(p, q) != algebra.bot:
                continue
            for a, b in compatible_pairs:
                holds = not (a in safe[p] and b in safe[q])
                inconsistent.observe(holds, {"p": p, "q": q, "states": (a, b)})
                if q == algebra.neg(p):
                    contradictory.observe(holds, {"p": p, "states": (a, b)})
    report.add(inconsistent.result(detail=f"{len(compatible_pairs)} compatible pairs"))
    report.add(contradictory.result())
    report.add(symmetric.result())
    return report


def check_upward_closure(protocol: Protocol) -> Report:
    """Safety survives executions and weakening of the proposition."""
    report = Report(command=f"closure {protocol.name}".strip())
    safe = protocol.safety_table()
    algebra = protocol.algebra
    upward = Tally("safety_upward_closed", CheckKind.THEOREM)
    weakening = Tally("safety_persistent", CheckKind.THEOREM)
    for p, states in safe.items():
        for w in states:
            for later in protocol.future(w):
                upward.observe(later in states, {"p": p, "from": w, "to": later})
            for q in algebra.elements:
                if algebra.leq(p, q):
                    weakening.observe(w in safe[q], {"p": p, "q": q, "state": w})
    report.add(upward.result())
    report.add(weakening.result())
    return report


def protocol_from_dag(
    consensus: Sequence[str],
    states: Sequence[str],
    edges: Iterable[Tuple[str, str]],
    estimates: Dict[str, Iterable[str]],
    **kwargs,
) -> Protocol:
    sigma = category_from_dag(states, edges, name=kwargs.pop("sigma_name", "Sigma"))
    return Protocol(tuple(consensus), sigma, {w: frozenset(v) for w, v in estimates.items()}, **kwargs)
