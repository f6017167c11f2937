"""
Seeded and exhaustive sweeps: every check over many generated protocols, state categories or functors
"""
import logging
import random
from typing import Dict, Iterable, Iterator, Optional

import typer

from ..category.fincat import FinCategory, category_from_dag
from ..category.geometric import InducedGeometricMorphism, is_surjection
from ..cli_common import CommonCLI
from ..helpers.errors import InternalConsistencyError
from ..helpers.system import SizeLimits
from ..protocol.decided import check_decided_suite
from ..protocol.generators import (
    all_small_protocols,
    dag_shapes,
    geometric_protocols,
    random_functor,
    random_geometric_protocol,
    random_protocol,
    state_names,
)
from ..protocol.protocol import Protocol, validate_protocol
from ..protocol.spec_file import spec_from_protocol
from ..reports import CheckKind, CheckResult, CheckStatus, Report, Tally
from .runner import reporting, split_list
from .suites import geometric_suite, lemma_suite, theorem_suite

CLI = CommonCLI()
LOGGER = logging.getLogger(__name__)

SWEEP_SUITES = ("protocols", "geometric", "functors", "decided")
STATUS_RANK = {CheckStatus.SKIPPED: 0, CheckStatus.PASS: 1, CheckStatus.WAIVED: 2, CheckStatus.FAIL: 3}
# the decided suite tries every 0/1 property, so its exhaustive sweep stops here
DECIDED_MAX_STATES = 4


class SweepAggregate:
    """Sums per-instance results by check name and keeps the first counterexample with its protocol."""

    def __init__(self, prefix: str) -> None:
        self.prefix = prefix
        self.results: Dict[str, CheckResult] = {}
        self.instances = 0

    def absorb(self, report: Report, protocol: Optional[Protocol] = None) -> None:
        self.instances += 1
        for result in report.results:
            name = f"{self.prefix}.{result.name}"
            known = self.results.setdefault(name, CheckResult(name, CheckStatus.SKIPPED, result.kind))
            known.checked += result.checked
            known.violations += result.violations
            if STATUS_RANK[result.status] > STATUS_RANK[known.status]:
                known.status = result.status
            if result.violations and known.witness is None:
                known.witness = {"instance": report.command, "witness": result.witness}
                if protocol is not None:
                    known.witness["protocol"] = spec_from_protocol(protocol).to_dict()
        if self.instances % 100 == 0:
            LOGGER.debug("%s: %s instances swept", self.prefix, self.instances)

    def into(self, report: Report) -> None:
        for name in sorted(self.results):
            report.add(self.results[name])


def protocol_checks(protocol: Protocol) -> Report:
    report = Report(command=protocol.name)
    report.extend(validate_protocol(protocol).results, prefix="validate")
    report.extend(lemma_suite(protocol).results, prefix="lemmas")
    report.extend(theorem_suite(protocol).results, prefix="theorem")
    return report


def random_protocols(
    seed: int, count: int, max_states: int, max_consensus: int, waive_estimator_condition: bool = False
) -> Iterator[Protocol]:
    rng = random.Random(seed)
    for _ in range(count):
        yield random_protocol(
            n_states=rng.randint(1, max_states),
            n_consensus=rng.randint(1, max_consensus),
            edge_density=rng.random(),
            seed=rng.randrange(2**31),
            waive_estimator_condition=waive_estimator_condition,
        )


def sweep_protocols(protocols: Iterable[Protocol]) -> SweepAggregate:
    aggregate = SweepAggregate("protocols")
    for protocol in protocols:
        aggregate.absorb(protocol_checks(protocol), protocol)
    return aggregate


def sweep_geometric(protocols: Iterable[Protocol]) -> SweepAggregate:
    aggregate = SweepAggregate("geometric")
    for protocol in protocols:
        aggregate.absorb(geometric_suite(protocol), protocol)
    return aggregate


def sweep_functors(seed: int, count: int) -> SweepAggregate:
    """Retract test against injectivity of i on seeded random functors."""
    rng = random.Random(seed)
    aggregate = SweepAggregate("functors")
    for _ in range(count):
        functor = random_functor(rng.randrange(2**31))
        agree = Tally("surjection_tests_agree", CheckKind.THEOREM)
        try:
            is_surjection(InducedGeometricMorphism(functor, verify=False))
            agree.observe(True)
        except InternalConsistencyError as e:
            agree.observe(False, {"functor": functor.name, "error": str(e)})
        part = Report(command=functor.name)
        part.add(agree.result())
        aggregate.absorb(part)
    return aggregate


def state_categories(exhaustive: bool, seed: int, count: int, max_states: int) -> Iterator[FinCategory]:
    if exhaustive:
        for n in range(1, min(max_states, DECIDED_MAX_STATES) + 1):
            states = state_names(n)
            for edges in dag_shapes(states):
                yield category_from_dag(states, edges, name=f"Sigma{n}:{len(edges)}")
        return
    for protocol in random_protocols(seed, count, min(max_states, DECIDED_MAX_STATES), 1):
        yield protocol.sigma


def sweep_decided(sigmas: Iterable[FinCategory]) -> SweepAggregate:
    aggregate = SweepAggregate("decided")
    for sigma in sigmas:
        aggregate.absorb(check_decided_suite(sigma))
    return aggregate


@CLI.unpacker
@CLI.arg_annotator
def sweep(
    suite: str = typer.Option(
        "protocols", "--suite", help=f"Comma separated: {', '.join(SWEEP_SUITES)}, or all", rich_help_panel="Sweep"
    ),
    seed=CLI.sweep.seed,
    count=CLI.sweep.count,
    max_states=CLI.sweep.max_states,
    max_consensus=CLI.sweep.max_consensus,
    exhaustive=CLI.sweep.exhaustive,
    waive_estimator_condition=CLI.sweep.waive_estimator_condition,
    output_format=CLI.output.output_format,
):
    """
    Check the lemmas and theorems over generated protocols, reporting the first counterexample.

    Exhaustive sweeps grow fast: [bold cyan]--states 3 --consensus 2[/bold cyan] covers 237 protocols.
    """
    suites = split_list(suite, list(SWEEP_SUITES), "suite")
    mode = "exhaustive" if exhaustive else "random"
    report = Report(command=f"sweep --suite {','.join(suites)} --{mode}", seed=None if exhaustive else seed)
    report.values["bounds"] = {"states": max_states, "consensus": max_consensus}
    with reporting(report, output_format.value):
        limits = SizeLimits.from_env()
        aggregates = []
        if "protocols" in suites:
            if exhaustive:
                protocols = all_small_protocols(max_consensus, max_states, waive_estimator_condition, limits)
            else:
                protocols = random_protocols(seed, count, max_states, max_consensus, waive_estimator_condition)
            aggregates.append(sweep_protocols(protocols))
        if "geometric" in suites:
            n_consensus = min(max_consensus, 2)
            if exhaustive:
                generated = geometric_protocols(n_consensus, max(min(max_states, 4), 1 << n_consensus))
            else:
                rng = random.Random(seed)
                generated = (
                    random_geometric_protocol(
                        n_consensus, rng.randrange(2**31), extra_states=rng.randint(0, 1), limits=limits
                    )
                    for _ in range(count)
                )
            aggregates.append(sweep_geometric(generated))
        if "functors" in suites:
            aggregates.append(sweep_functors(seed, count))
        if "decided" in suites:
            aggregates.append(sweep_decided(state_categories(exhaustive, seed, count, max_states)))
        for aggregate in aggregates:
            aggregate.into(report)
        report.values["instances"] = {a.prefix: a.instances for a in aggregates}
