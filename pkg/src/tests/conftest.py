from logging import getLogger

import pytest

from cbc_topos.category.fincat import FinCategory, category_from_dag
from cbc_topos.logic.heyting import FinPoset, TableAlgebra, diamond_poset, heyting_from_poset
from cbc_topos.protocol.protocol import EstimateOrder, Protocol, protocol_from_dag

LOGGER = getLogger(__name__)

P0_SPEC = """\
name: P0
consensus: [a, b]
states: [w1, w2, w3]
executions:
  - {from: w1, to: w3}
  - {from: w2, to: w3}
estimates:
  w1: [a]
  w2: [a]
  w3: [a]
properties:
  settled: {w1: 0, w2: 0, w3: 1}
"""

G0_SPEC = """\
name: G0
consensus: [a]
states: [u1, u2]
executions:
  - {from: u1, to: u2}
estimates:
  u1: [a]
  u2: []
strict_functorial: true
order: refinement
waive_estimator_condition: true
"""


@pytest.fixture
def chain3() -> TableAlgebra:
    """bot < m < top"""
    return heyting_from_poset(FinPoset.from_relation(("bot", "m", "top"), [("bot", "m"), ("m", "top")]))


@pytest.fixture
def diamond() -> TableAlgebra:
    return heyting_from_poset(diamond_poset())


@pytest.fixture
def cat2() -> FinCategory:
    """a --h--> b"""
    return FinCategory.build(["a", "b"], [("h", "a", "b")], name="cat2")


@pytest.fixture
def chain_sigma() -> FinCategory:
    return category_from_dag(["w1", "w2", "w3"], [("w1", "w2"), ("w2", "w3")], name="Sigma")


@pytest.fixture
def p0() -> Protocol:
    """Two states converging on a third, every estimate {a}."""
    return protocol_from_dag(
        ["a", "b"],
        ["w1", "w2", "w3"],
        [("w1", "w3"), ("w2", "w3")],
        {"w1": {"a"}, "w2": {"a"}, "w3": {"a"}},
        name="P0",
    )


@pytest.fixture
def p1() -> Protocol:
    """v1 -> v2 widening the estimate from {a} to {a, b}."""
    return protocol_from_dag(
        ["a", "b"],
        ["v1", "v2"],
        [("v1", "v2")],
        {"v1": {"a"}, "v2": {"a", "b"}},
        strict_functorial=True,
        name="P1",
    )


@pytest.fixture
def g0() -> Protocol:
    """u1 -> u2 narrowing {a} to bottom; its estimator is an isomorphism onto PC."""
    return protocol_from_dag(
        ["a"],
        ["u1", "u2"],
        [("u1", "u2")],
        {"u1": {"a"}, "u2": set()},
        strict_functorial=True,
        order=EstimateOrder.REFINEMENT,
        waive_estimator_condition=True,
        name="G0",
    )


@pytest.fixture
def g0_inclusion() -> Protocol:
    """Same shape as G0 but ordered by inclusion, so the narrowing step is no longer an arrow of PC."""
    return protocol_from_dag(
        ["a"],
        ["u1", "u2"],
        [("u2", "u1")],
        {"u1": {"a"}, "u2": set()},
        strict_functorial=True,
        order=EstimateOrder.INCLUSION,
        waive_estimator_condition=True,
        name="G0-inclusion",
    )


@pytest.fixture
def p0_spec_text() -> str:
    return P0_SPEC


@pytest.fixture
def g0_spec_text() -> str:
    return G0_SPEC


@pytest.fixture
def p0_spec_file(tmp_path, p0_spec_text) -> str:
    path = tmp_path / "p0.yaml"
    path.write_text(p0_spec_text, encoding="utf-8")
    return str(path)


@pytest.fixture
def g0_spec_file(tmp_path, g0_spec_text) -> str:
    path = tmp_path / "g0.yaml"
    path.write_text(g0_spec_text, encoding="utf-8")
    return str(path)
