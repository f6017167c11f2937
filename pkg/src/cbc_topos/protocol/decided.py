"""Decided state properties: directly, by forcing, and through the global-sections morphism"""

import logging
from dataclasses import dataclass
from itertools import product
from typing import Dict, Iterator, List, Optional, Sequence

from ..category.copresheaf import Subobject, classify, elementary_forcing, terminal_copresheaf
from ..category.fincat import FinCategory, functor_to_terminal
from ..category.geometric import InducedGeometricMorphism, box_forces
from ..helpers.errors import ToposError
from ..helpers.system import SizeLimits
from ..reports import CheckKind, Report, Tally
from .protocol import UnknownStateError

LOGGER = logging.getLogger(__name__)


class NotMonotoneError(ToposError):
    pass


@dataclass(eq=False)
class StateProperty:
    """
    A 0/1 valued property of protocol states.

    Parameters
    ----------
    sigma : FinCategory
        the protocol's state category
    value : Dict[str, int]
        value of the property at every state
    name : str
        label used in reports
    """

    sigma: FinCategory
    value: Dict[str, int]
    name: str = "q"

    def __post_init__(self):
        for state in self.sigma.objects:
            if state not in self.value:
                raise UnknownStateError(f"Property {self.name} has no value at {state!r}", witness=state)
        for state, v in self.value.items():
            if state not in self.sigma.identity:
                raise UnknownStateError(f"Property {self.name} names unknown state {state!r}", witness=state)
            if v not in (0, 1):
                raise ToposError(f"Property {self.name} has value {v!r} at {state}, expected 0 or 1", witness=state)

    def holds(self, state: str) -> bool:
        return self.value[state] == 1

    def check_state(self, state: str) -> str:
        if state not in self.sigma.identity:
            raise UnknownStateError(f"Unknown state {state!r}", witness=state)
        return state

    def monotonicity_failure(self) -> Optional[str]:
        """First execution leaving the property."""
        for name, arrow in self.sigma.arrows.items():
            if self.holds(arrow.dom) and not self.holds(arrow.cod):
                return name
        return None

    @property
    def monotone(self) -> bool:
        return self.monotonicity_failure() is None

    def support(self) -> frozenset:
        return frozenset(w for w in self.sigma.objects if self.holds(w))


def is_decided(q: StateProperty, state: str) -> bool:
    """q holds at every state accessible from state, state itself included."""
    return all(q.holds(later) for later in q.sigma.reachable(q.check_state(state)))


def decided_forcing(q: StateProperty, state: str) -> bool:
    """q holds at the codomain of every execution out of state, read off the representable of state."""
    q.check_state(state)
    return elementary_forcing(q.sigma, state, lambda later, _: q.holds(later))


def global_sections(sigma: FinCategory, limits: Optional[SizeLimits] = None) -> InducedGeometricMorphism:
    if "global_sections" not in sigma._cache:
        sigma._cache["global_sections"] = InducedGeometricMorphism(functor_to_terminal(sigma), limits)
    return sigma._cache["global_sections"]


def decided_modal(q: StateProperty, state: str, limits: Optional[SizeLimits] = None) -> bool:
    """
    state forces box q relative to the global-sections morphism.

    q is lifted to a global element of the direct image of Omega through the classifying
    map of its support, which sends a state to the total cosieve exactly where q holds.

    Raises
    ------
    NotMonotoneError
        q is left along some execution, with that execution as witness
    """
    q.check_state(state)
    failure = q.monotonicity_failure()
    if failure is not None:
        raise NotMonotoneError(f"Property {q.name} is not preserved by execution {failure}", witness=failure)
    morphism = global_sections(q.sigma, limits)
    one = terminal_copresheaf(q.sigma)
    support = Subobject(one, {w: frozenset({"*"}) if q.holds(w) else frozenset() for w in q.sigma.objects})
    lifted = morphism.global_family(classify(support))
    return box_forces(morphism, state, lifted, "*")


def all_properties(sigma: FinCategory) -> Iterator[StateProperty]:
    for n, bits in enumerate(product((0, 1), repeat=len(sigma.objects))):
        yield StateProperty(sigma, dict(zip(sigma.objects, bits)), name=f"q{n}")


def check_decided_suite(
    sigma: FinCategory, properties: Optional[Sequence[StateProperty]] = None, limits: Optional[SizeLimits] = None
) -> Report:
    """
    Cross-check the three characterisations of decidedness and the inconsistency corollary.

    Runs over every 0/1 property of sigma unless properties are given.
    """
    props = list(properties) if properties is not None else list(all_properties(sigma))
    report = Report(command=f"decided {sigma.name}".strip())
    forcing = Tally("decided_iff_forcing", CheckKind.THEOREM)
    modal = Tally("decided_iff_modal_forcing", CheckKind.THEOREM)
    inconsistent = Tally("inconsistent_properties_not_both_decided", CheckKind.THEOREM)
    decided: List[frozenset] = []
    for q in props:
        decided.append(frozenset(w for w in sigma.objects if is_decided(q, w)))
        for w in sigma.objects:
            direct = w in decided[-1]
            forcing.observe(decided_forcing(q, w) == direct, {"property": q.name, "state": w})
            if q.monotone:
                modal.observe(decided_modal(q, w, limits) == direct, {"property": q.name, "state": w})
    common = {
        (a, b): bool(set(sigma.reachable(a)) & set(sigma.reachable(b))) for a in sigma.objects for b in sigma.objects
    }
    for n1, q1 in enumerate(props):
        for n2, q2 in enumerate(props):
            if q1.support() & q2.support():
                continue
            for (a, b), joint in common.items():
                if joint:
                    inconsistent.observe(
                        not (a in decided[n1] and b in decided[n2]),
                        {"first": q1.name, "second": q2.name, "states": (a, b)},
                    )
    LOGGER.debug("Decided suite over %s: %s properties", sigma.name, len(props))
    report.add(forcing.result(detail=f"{len(props)} properties"))
    report.add(modal.result(detail="monotone properties"))
    report.add(inconsistent.result())
    return report
