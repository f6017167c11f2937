"""
Per-protocol queries: validation, safety by any method, compatibility and decided properties
"""
import logging
from typing import Callable, Dict, List, Optional

import typer

from ..category.copresheaf import elementary_safety_forcing, unfolded_safety_forcing
from ..category.geometric import EstimatorOrderError, NotAGeometricModelError, safety_via_box, safety_via_rel_forcing
from ..cli_common import CommonCLI
from ..helpers.errors import ToposError
from ..protocol.decided import NotMonotoneError, decided_forcing, decided_modal, is_decided
from ..protocol.protocol import Protocol, RequiresFunctorialEstimatorError, compatible, is_safe, validate_protocol
from ..reports import CheckKind, Report, Tally, error_result, skipped
from .runner import Abort, load_protocol, parse_proposition, reporting, split_list

CLI = CommonCLI()
LOGGER = logging.getLogger(__name__)

SAFETY_METHODS: Dict[str, Callable[[Protocol, frozenset, str], bool]] = {
    "direct": is_safe,
    "forcing": elementary_safety_forcing,
    "unfolded": unfolded_safety_forcing,
    "relativised": safety_via_rel_forcing,
    "modal": safety_via_box,
}
GEOMETRIC_ERRORS = (NotAGeometricModelError, RequiresFunctorialEstimatorError, EstimatorOrderError)
DECIDED_METHODS = ("direct", "forcing", "modal")


@CLI.unpacker
@CLI.arg_annotator
def validate_spec(
    spec_path=CLI.protocol.spec_path,
    strict_functorial=CLI.protocol.strict_functorial,
    waive_estimator_condition=CLI.protocol.waive_estimator_condition,
    literal_estimator_condition: bool = typer.Option(
        False,
        "--literal-estimator-condition",
        help="Also check the internalised estimator condition, which only top estimates satisfy",
        rich_help_panel="Protocol",
    ),
    output_format=CLI.output.output_format,
):
    """
    Validate a protocol spec: state category laws, estimator condition and functoriality.
    """
    report = Report(command="validate")
    with reporting(report, output_format.value):
        spec, protocol = load_protocol(spec_path, report, strict_functorial, waive_estimator_condition)
        report.extend(validate_protocol(protocol, strict_estimator=literal_estimator_condition).results)
        report.values["states"] = len(protocol.states)
        report.values["consensus"] = list(protocol.consensus)
        for q in spec.state_properties(protocol.sigma):
            monotone = Tally(f"property.{q.name}.monotone", CheckKind.INFO)
            monotone.observe(q.monotone, q.monotonicity_failure())
            report.add(monotone.result(detail="only monotone properties have a modal decision"))


def _safety_by_methods(report: Report, protocol: Protocol, propositions, states: List[str], methods: List[str]):
    verdicts: Dict[str, Dict[str, Dict[str, bool]]] = {}
    agree = Tally("methods_agree", CheckKind.THEOREM)
    refused = set()
    for p in propositions:
        label = protocol.label(p)
        verdicts[label] = {}
        for w in states:
            answers: Dict[str, bool] = {}
            for method in methods:
                if method in refused:
                    continue
                try:
                    answers[method] = SAFETY_METHODS[method](protocol, p, w)
                except GEOMETRIC_ERRORS as e:
                    report.add(error_result(e))
                    refused.add(method)
            verdicts[label][w] = answers
            if answers:
                agree.observe(len(set(answers.values())) == 1, {"proposition": p, "state": w, "answers": answers})
    report.values["safe"] = verdicts
    report.add(agree.result(detail=", ".join(m for m in methods if m not in refused)))


@CLI.unpacker
@CLI.arg_annotator
def safety(
    spec_path=CLI.protocol.spec_path,
    prop: Optional[str] = typer.Option(
        None, "--prop", help="Proposition as comma separated consensus values, '{}' for bottom. All if omitted"
    ),
    state: Optional[str] = typer.Option(None, "--state", help="State to decide safety at. All if omitted"),
    method: str = typer.Option(
        "direct,forcing",
        "--method",
        help="Comma separated: direct, forcing, unfolded, relativised, modal, or all",
    ),
    strict_functorial=CLI.protocol.strict_functorial,
    waive_estimator_condition=CLI.protocol.waive_estimator_condition,
    output_format=CLI.output.output_format,
):
    """
    Decide estimate safety with one or more methods and require them to agree.
    """
    methods = split_list(method, list(SAFETY_METHODS), "method")
    report = Report(command=f"safety --method {','.join(methods)}")
    with reporting(report, output_format.value):
        _, protocol = load_protocol(spec_path, report, strict_functorial, waive_estimator_condition)
        if prop is not None:
            propositions = [protocol.check_proposition(parse_proposition(prop))]
        else:
            propositions = list(protocol.propositions())
        states = [protocol.check_state(state)] if state else list(protocol.states)
        _safety_by_methods(report, protocol, propositions, states, methods)


@CLI.unpacker
@CLI.arg_annotator
def compatible_states(
    spec_path=CLI.protocol.spec_path,
    first: Optional[str] = typer.Option(None, "--first", help="First state. All pairs if omitted"),
    second: Optional[str] = typer.Option(None, "--second", help="Second state. All pairs if omitted"),
    output_format=CLI.output.output_format,
):
    """
    Report the first common future of two states, or of every pair.
    """
    report = Report(command="compatible")
    with reporting(report, output_format.value):
        _, protocol = load_protocol(spec_path, report)
        lefts = [protocol.check_state(first)] if first else list(protocol.states)
        rights = [protocol.check_state(second)] if second else list(protocol.states)
        futures = {}
        symmetric = Tally("compatibility_symmetric", CheckKind.THEOREM)
        for a in lefts:
            for b in rights:
                common = compatible(protocol, a, b)
                futures[f"{a},{b}"] = common
                symmetric.observe((common is None) == (compatible(protocol, b, a) is None), (a, b))
        report.values["common_future"] = futures
        report.add(symmetric.result())


@CLI.unpacker
@CLI.arg_annotator
def decided(
    spec_path=CLI.protocol.spec_path,
    property_name: Optional[str] = typer.Option(
        None, "--property", help="Named property of the protocol file. All if omitted"
    ),
    state: Optional[str] = typer.Option(None, "--state", help="State to decide at. All if omitted"),
    method: str = typer.Option("all", "--method", help="Comma separated: direct, forcing, modal, or all"),
    output_format=CLI.output.output_format,
):
    """
    Decide the named state properties of the protocol file directly, by forcing and modally.
    """
    methods = split_list(method, list(DECIDED_METHODS), "method")
    explicit_modal = method.strip() not in ("", "all") and "modal" in methods
    report = Report(command=f"decided --method {','.join(methods)}")
    with reporting(report, output_format.value):
        spec, protocol = load_protocol(spec_path, report)
        properties = spec.state_properties(protocol.sigma)
        if property_name is not None:
            properties = [q for q in properties if q.name == property_name]
            if not properties:
                raise ToposError(f"Spec has no property {property_name!r}", witness=property_name)
        if not properties:
            raise ToposError("Spec declares no properties")
        states = [protocol.check_state(state)] if state else list(protocol.states)
        agree = Tally("decided_methods_agree", CheckKind.THEOREM)
        verdicts = {}
        for q in properties:
            verdicts[q.name] = {}
            use_modal = "modal" in methods
            if use_modal and not q.monotone:
                if explicit_modal:
                    failure = NotMonotoneError(f"Property {q.name} is not monotone", q.monotonicity_failure())
                    report.add(error_result(failure))
                    raise Abort()
                report.add(skipped(f"{q.name}.modal", "property is not monotone"))
                use_modal = False
            for w in states:
                answers = {}
                if "direct" in methods:
                    answers["direct"] = is_decided(q, w)
                if "forcing" in methods:
                    answers["forcing"] = decided_forcing(q, w)
                if use_modal:
                    answers["modal"] = decided_modal(q, w)
                verdicts[q.name][w] = answers
                agree.observe(len(set(answers.values())) <= 1, {"property": q.name, "state": w, "answers": answers})
        report.values["decided"] = verdicts
        report.add(agree.result())
