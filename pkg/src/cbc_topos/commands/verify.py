"""
Theorem suites over a spec file, forcing semantics of induced morphisms, and the combined report
"""
import logging

import typer

from ..category.fincat import functor_to_terminal
from ..category.geometric import (
    InducedGeometricMorphism,
    check_invariants,
    estimator_morphism,
    is_surjection,
    verify_semantics,
)
from ..cli_common import CommonCLI
from ..protocol.protocol import RequiresFunctorialEstimatorError, validate_protocol
from ..reports import Report, error_result, skipped
from .runner import load_protocol, reporting, split_list
from .suites import SUITES, run_suites

CLI = CommonCLI()
LOGGER = logging.getLogger(__name__)


@CLI.unpacker
@CLI.arg_annotator
def verify(
    spec_path=CLI.protocol.spec_path,
    suite: str = typer.Option("all", "--suite", help=f"Comma separated: {', '.join(SUITES)}, or all"),
    strict_functorial=CLI.protocol.strict_functorial,
    waive_estimator_condition=CLI.protocol.waive_estimator_condition,
    output_format=CLI.output.output_format,
):
    """
    Check the Heyting laws, consistency lemmas and safety theorems on one protocol.
    """
    suites = split_list(suite, list(SUITES), "suite")
    report = Report(command=f"verify --suite {','.join(suites)}")
    with reporting(report, output_format.value):
        spec, protocol = load_protocol(spec_path, report, strict_functorial, waive_estimator_condition)
        result = run_suites(protocol, suites, spec.state_properties(protocol.sigma))
        report.values.update(result.values)
        report.extend(result.results)


def _semantics_report(report: Report, morphism: InducedGeometricMorphism) -> None:
    decision = is_surjection(morphism)
    report.values["functor"] = morphism.functor.name
    report.values["surjection"] = decision.is_surjection
    if decision.witness is not None:
        report.values["not_a_retract"] = decision.witness
    report.values["direct_image_sizes"] = {d: len(v) for d, v in morphism.omega_star.values.items()}
    report.values["global_elements"] = len(morphism.global_elements())
    report.extend(check_invariants(morphism).results, prefix="invariants")
    report.extend(verify_semantics(morphism).results, prefix="semantics")


@CLI.unpacker
@CLI.arg_annotator
def semantics(
    spec_path=CLI.protocol.spec_path,
    global_sections: bool = typer.Option(
        False,
        "--global-sections",
        help="Use the functor from the states to the terminal category instead of the estimator",
    ),
    strict_functorial=CLI.protocol.strict_functorial,
    waive_estimator_condition=CLI.protocol.waive_estimator_condition,
    output_format=CLI.output.output_format,
):
    """
    Check relativised forcing of the morphism induced by the estimator against its unfolding.
    """
    report = Report(command="semantics --global-sections" if global_sections else "semantics")
    with reporting(report, output_format.value):
        _, protocol = load_protocol(spec_path, report, strict_functorial, waive_estimator_condition)
        if global_sections:
            morphism = InducedGeometricMorphism(functor_to_terminal(protocol.sigma), protocol.limits)
        else:
            morphism = estimator_morphism(protocol)
        _semantics_report(report, morphism)


@CLI.unpacker
@CLI.arg_annotator
def full_report(
    spec_path=CLI.protocol.spec_path,
    strict_functorial=CLI.protocol.strict_functorial,
    waive_estimator_condition=CLI.protocol.waive_estimator_condition,
    output_format=CLI.output.output_format,
):
    """
    Run validation, every suite and the forcing semantics that apply to one spec.
    """
    report = Report(command="report")
    with reporting(report, output_format.value):
        spec, protocol = load_protocol(spec_path, report, strict_functorial, waive_estimator_condition)
        report.extend(validate_protocol(protocol).results, prefix="validate")
        result = run_suites(protocol, list(SUITES), spec.state_properties(protocol.sigma))
        report.values.update(result.values)
        report.extend(result.results)
        morphism = InducedGeometricMorphism(functor_to_terminal(protocol.sigma), protocol.limits)
        report.extend(verify_semantics(morphism).results, prefix="global_sections")
        if protocol.strict_functorial:
            try:
                report.extend(verify_semantics(estimator_morphism(protocol)).results, prefix="estimator")
            except RequiresFunctorialEstimatorError as e:
                report.add(error_result(e))
        else:
            report.add(skipped("estimator.semantics", "estimator is not strict functorial"))
