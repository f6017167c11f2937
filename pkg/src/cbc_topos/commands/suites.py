"""Verification suites over one protocol, shared by verify, report and sweep"""

import logging
from typing import Dict, Optional, Sequence

from ..category.copresheaf import (
    classify,
    comprehension,
    elementary_safety_forcing,
    sub_heyting_ops,
    terminal_copresheaf,
    unfolded_safety_forcing,
)
from ..category.geometric import (
    EstimatorOrderError,
    NotAGeometricModelError,
    check_invariants,
    estimator_morphism,
    safety_via_box,
    safety_via_rel_forcing,
)
from ..helpers.errors import ToposError
from ..logic.heyting import is_boolean, verify_heyting_laws
from ..protocol.decided import StateProperty, all_properties, check_decided_suite
from ..protocol.protocol import (
    Protocol,
    RequiresFunctorialEstimatorError,
    check_consistency_lemmas,
    check_safety_theorem,
    check_upward_closure,
    is_safe,
)
from ..reports import CheckKind, Report, Tally, error_result, skipped

LOGGER = logging.getLogger(__name__)

SUITES = ("laws", "lemmas", "theorem", "decided", "geometric")
# every 0/1 property is tried only on state categories up to this size
DECIDED_SWEEP_STATES = 6


def law_suite(protocol: Protocol) -> Report:
    """Heyting laws on the proposition algebra and on Sub(1) over the states."""
    report = Report(command="laws")
    report.extend(verify_heyting_laws(protocol.algebra, "propositions").results, prefix="propositions")
    boolean = Tally("propositions.boolean", CheckKind.INFO)
    boolean.observe(is_boolean(protocol.algebra).is_boolean)
    report.add(boolean.result())
    try:
        one = terminal_copresheaf(protocol.sigma)
        algebra = sub_heyting_ops(one, protocol.limits)
    except ToposError as e:
        report.add(error_result(e))
        return report
    report.extend(verify_heyting_laws(algebra, "subobjects").results, prefix="subobjects")
    bijection = Tally("subobjects.classify_then_comprehend")
    for key in algebra.elements:
        back = comprehension(classify(algebra.as_subobject(key))).key()
        bijection.observe(back == key, algebra.label(key))
    report.add(bijection.result(detail=f"{len(algebra.elements)} subobjects"))
    decision = is_boolean(algebra)
    boolean = Tally("subobjects.boolean", CheckKind.INFO)
    boolean.observe(decision.is_boolean, decision.witnesses.get("excluded_middle"))
    report.add(boolean.result())
    return report


def lemma_suite(protocol: Protocol) -> Report:
    report = Report(command="lemmas")
    report.extend(check_consistency_lemmas(protocol).results)
    report.extend(check_upward_closure(protocol).results)
    return report


def safety_oracles(protocol: Protocol) -> Report:
    """The direct, forcing and unfolded safety decisions agree everywhere."""
    report = Report(command="safety-oracles")
    agree = Tally("safety_oracles_agree", CheckKind.THEOREM)
    for p in protocol.propositions():
        for w in protocol.states:
            direct = is_safe(protocol, p, w)
            answers = (elementary_safety_forcing(protocol, p, w), unfolded_safety_forcing(protocol, p, w))
            agree.observe(all(a == direct for a in answers), {"proposition": p, "state": w})
    report.add(agree.result())
    return report


def theorem_suite(protocol: Protocol) -> Report:
    report = Report(command="theorem")
    report.extend(check_safety_theorem(protocol).results)
    report.extend(safety_oracles(protocol).results)
    return report


def geometric_suite(protocol: Protocol) -> Report:
    """Relativised and modal safety against the direct decision, on geometric models."""
    report = Report(command="geometric")
    if not protocol.strict_functorial:
        report.add(skipped("geometric_safety_agrees", "estimator is not strict functorial"))
        return report
    try:
        morphism = estimator_morphism(protocol)
        report.extend(check_invariants(morphism).results, prefix="estimator")
        agree = Tally("geometric_safety_agrees", CheckKind.THEOREM)
        for p in protocol.propositions():
            for w in protocol.states:
                direct = is_safe(protocol, p, w)
                relative = safety_via_rel_forcing(protocol, p, w)
                modal = safety_via_box(protocol, p, w)
                agree.observe(direct == relative == modal, {"proposition": p, "state": w})
        report.add(agree.result())
    except (NotAGeometricModelError, EstimatorOrderError) as e:
        report.add(skipped("geometric_safety_agrees", str(e)))
    except RequiresFunctorialEstimatorError as e:
        report.add(error_result(e))
    return report


def decided_suite(protocol: Protocol, properties: Sequence[StateProperty] = ()) -> Report:
    sigma = protocol.sigma
    props = list(properties)
    if len(sigma.objects) <= DECIDED_SWEEP_STATES:
        props += list(all_properties(sigma))
    return check_decided_suite(sigma, props, protocol.limits)


def run_suites(
    protocol: Protocol, suites: Sequence[str], properties: Optional[Sequence[StateProperty]] = None
) -> Report:
    runners = {
        "laws": law_suite,
        "lemmas": lemma_suite,
        "theorem": theorem_suite,
        "decided": lambda p: decided_suite(p, properties or ()),
        "geometric": geometric_suite,
    }
    report = Report(command=f"verify --suite {','.join(suites)}")
    sizes: Dict[str, int] = {}
    for suite in suites:
        part = runners[suite](protocol)
        sizes[suite] = sum(r.checked for r in part.results)
        report.extend(part.results, prefix=suite)
    report.values["checked"] = sizes
    LOGGER.debug("Ran suites %s on %s", suites, protocol.name)
    return report
