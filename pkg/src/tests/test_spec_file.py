from logging import getLogger

import pytest

from cbc_topos.category.fincat import CyclicQuiverError, validate_category
from cbc_topos.protocol.protocol import EstimateOrder, is_safe
from cbc_topos.protocol.spec_file import (
    SpecParseError,
    UnresolvedReferenceError,
    load_spec,
    parse_spec,
    serialize_spec,
    spec_from_protocol,
)

LOGGER = getLogger(__name__)

IDEMPOTENT_SPEC = """\
name: idempotent
consensus: [a]
states: [x]
mode: category
executions:
  - {name: e, from: x, to: x}
compose:
  - [e, e, e]
estimates:
  x: [a]
"""


def test_parse_p0(p0_spec_file):
    spec = load_spec(p0_spec_file)
    assert spec.name == "P0"
    assert spec.states == ["w1", "w2", "w3"]
    assert [e.name for e in spec.executions] == ["w1>w3", "w2>w3"]
    protocol = spec.to_protocol()
    assert protocol.sigma.hom("w1", "w3") == ("w1>w3",)
    assert is_safe(protocol, {"a"}, "w1")
    properties = spec.state_properties(protocol.sigma)
    assert [q.name for q in properties] == ["settled"]
    assert properties[0].holds("w3")


def test_flags_override_document(g0_spec_text):
    spec = parse_spec(g0_spec_text)
    assert spec.order == EstimateOrder.REFINEMENT
    assert spec.to_protocol().strict_functorial
    assert not spec.to_protocol(strict_functorial=False).strict_functorial


def test_serialized_spec_parses_back(p0_spec_text):
    spec = parse_spec(p0_spec_text)
    again = parse_spec(serialize_spec(spec))
    assert again.to_dict() == spec.to_dict()


def test_category_mode():
    spec = parse_spec(IDEMPOTENT_SPEC)
    sigma = spec.sigma()
    assert validate_category(sigma).passed
    assert sigma.hom("x", "x") == ("id_x", "e")
    assert not sigma.is_thin
    written = spec_from_protocol(spec.to_protocol())
    assert written.mode == "category"
    assert written.compose == [("e", "e", "e")]


def test_protocol_written_back_as_dag(p0):
    spec = spec_from_protocol(p0)
    assert spec.mode == "dag"
    assert [(e.source, e.target) for e in spec.executions] == [("w1", "w3"), ("w2", "w3")]
    assert parse_spec(serialize_spec(spec)).to_protocol().safety_table() == p0.safety_table()


def test_unknown_consensus_value(p0_spec_text):
    text = p0_spec_text.replace("w2: [a]", "w2: [c]")
    with pytest.raises(UnresolvedReferenceError) as excinfo:
        parse_spec(text)
    assert excinfo.value.witness == "c"


def test_unknown_state_in_execution(p0_spec_text):
    text = p0_spec_text.replace("{from: w2, to: w3}", "{from: w2, to: w9}")
    with pytest.raises(UnresolvedReferenceError) as excinfo:
        parse_spec(text)
    assert excinfo.value.witness == "w9"


def test_cyclic_executions(p0_spec_text):
    text = p0_spec_text.replace("{from: w1, to: w3}", "{from: w1, to: w2}").replace(
        "{from: w2, to: w3}", "{from: w2, to: w1}"
    )
    with pytest.raises(CyclicQuiverError) as excinfo:
        parse_spec(text)
    assert excinfo.value.witness == ("w1", "w2", "w1")


def test_unknown_field_reports_its_line():
    text = "consensus: [a]\nstates: [x]\ncolour: red\nestimates: {x: [a]}\n"
    with pytest.raises(SpecParseError) as excinfo:
        parse_spec(text)
    assert excinfo.value.line == 3
    assert excinfo.value.witness == {"line": 3, "field": "colour"}


@pytest.mark.parametrize(
    "text, field_name",
    [
        ("consensus: [a]\nstates: [x]\n", "estimates"),
        ("consensus: [a]\nstates: [x]\nestimates: {x: [a]}\nmode: graph\n", "mode"),
        ("consensus: [a]\nstates: [x]\nestimates: {x: [a]}\norder: sideways\n", "order"),
        ("consensus: [a]\nstates: [x]\nestimates: {x: [a]}\nstrict_functorial: maybe\n", "strict_functorial"),
        ("consensus: [a]\nstates: [x, x]\nestimates: {x: [a]}\n", "states"),
        ("consensus: [a]\nstates: [x]\nestimates: {x: [a]}\ncompose: [[id_x, id_x, id_x]]\n", "compose"),
    ],
)
def test_malformed_fields(text, field_name):
    with pytest.raises(SpecParseError) as excinfo:
        parse_spec(text)
    assert excinfo.value.field_name == field_name


def test_property_values_are_bits(p0_spec_text):
    text = p0_spec_text.replace("settled: {w1: 0, w2: 0, w3: 1}", "settled: {w1: 0, w2: 2, w3: 1}")
    with pytest.raises(SpecParseError):
        parse_spec(text)


def test_invalid_yaml_has_a_line():
    with pytest.raises(SpecParseError) as excinfo:
        parse_spec("consensus: [a\nstates: [x]\n")
    assert excinfo.value.line is not None


def test_missing_file(tmp_path):
    with pytest.raises(SpecParseError):
        load_spec(tmp_path / "missing.yaml")
