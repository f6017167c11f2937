"""
Protocol spec files.

A spec is a YAML (or JSON) mapping::

    name: P0
    consensus: [a, b]
    states: [w1, w2, w3]
    mode: dag
    executions:
      - {name: f, from: w1, to: w3}
      - {name: g, from: w2, to: w3}
    estimates: {w1: [a], w2: [a], w3: [a]}
    strict_functorial: false
    order: inclusion
    waive_estimator_condition: false
    properties:
      settled: {w1: 0, w2: 0, w3: 1}

In dag mode the executions are edges and the state category is their reachability
preorder. In category mode they are the non-identity arrows and ``compose`` lists
``[g, f, g_after_f]`` triples; identities are ``id_<state>``.
"""

import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from ruamel.yaml import YAML
from ruamel.yaml.comments import CommentedMap, CommentedSeq
from ruamel.yaml.error import MarkedYAMLError, YAMLError

from ..category.fincat import FinCategory, category_from_dag, thin_arrow_name
from ..helpers.errors import ToposError
from ..helpers.system import SizeLimits
from .decided import StateProperty
from .protocol import EstimateOrder, Protocol

LOGGER = logging.getLogger(__name__)

TOP_LEVEL_FIELDS = (
    "name",
    "consensus",
    "states",
    "mode",
    "executions",
    "compose",
    "estimates",
    "strict_functorial",
    "order",
    "waive_estimator_condition",
    "properties",
)
REQUIRED_FIELDS = ("consensus", "states", "estimates")
EXECUTION_FIELDS = ("name", "from", "to")
MODES = ("dag", "category")


class SpecParseError(ToposError):
    """Malformed spec document. line is 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None, field_name: Optional[str] = None) -> None:
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}", witness={"line": line, "field": field_name})
        self.line = line
        self.field_name = field_name


class UnresolvedReferenceError(ToposError):
    pass


@dataclass
class Execution:
    name: str
    source: str
    target: str


@dataclass
class ProtocolSpec:
    consensus: List[str]
    states: List[str]
    estimates: Dict[str, List[str]]
    executions: List[Execution] = field(default_factory=list)
    mode: str = "dag"
    compose: List[Tuple[str, str, str]] = field(default_factory=list)
    strict_functorial: bool = False
    order: EstimateOrder = EstimateOrder.INCLUSION
    waive_estimator_condition: bool = False
    properties: Dict[str, Dict[str, int]] = field(default_factory=dict)
    name: str = ""

    def sigma(self) -> FinCategory:
        if self.mode == "dag":
            return category_from_dag(self.states, [(e.source, e.target) for e in self.executions], name="Sigma")
        return FinCategory.build(
            self.states,
            [(e.name, e.source, e.target) for e in self.executions],
            self.compose,
            name="Sigma",
        )

    def to_protocol(
        self,
        strict_functorial: Optional[bool] = None,
        waive_estimator_condition: Optional[bool] = None,
        limits: Optional[SizeLimits] = None,
    ) -> Protocol:
        """Build the protocol; the flags override the document's values when given."""
        return Protocol(
            tuple(self.consensus),
            self.sigma(),
            {w: frozenset(v) for w, v in self.estimates.items()},
            strict_functorial=self.strict_functorial if strict_functorial is None else strict_functorial,
            order=self.order,
            waive_estimator_condition=(
                self.waive_estimator_condition if waive_estimator_condition is None else waive_estimator_condition
            ),
            name=self.name,
            limits=limits,
        )

    def state_properties(self, sigma: FinCategory) -> List[StateProperty]:
        return [StateProperty(sigma, dict(values), name=name) for name, values in self.properties.items()]

    def to_dict(self) -> Dict[str, Any]:
        document: Dict[str, Any] = {}
        if self.name:
            document["name"] = self.name
        document["consensus"] = list(self.consensus)
        document["states"] = list(self.states)
        document["mode"] = self.mode
        document["executions"] = [{"name": e.name, "from": e.source, "to": e.target} for e in self.executions]
        if self.compose:
            document["compose"] = [list(t) for t in self.compose]
        document["estimates"] = {w: list(v) for w, v in self.estimates.items()}
        document["strict_functorial"] = self.strict_functorial
        document["order"] = self.order.value
        document["waive_estimator_condition"] = self.waive_estimator_condition
        if self.properties:
            document["properties"] = {n: dict(v) for n, v in self.properties.items()}
        return document


def yaml_roundtrip_loader() -> YAML:
    yaml = YAML()
    yaml.preserve_quotes = True
    yaml.indent(mapping=2, sequence=4, offset=2)
    return yaml


def _line(node: Any, key: Any = None) -> Optional[int]:
    """1-based line of a mapping key or sequence item, or of the node itself."""
    try:
        if key is None:
            return node.lc.line + 1
        if isinstance(node, CommentedMap):
            return node.lc.key(key)[0] + 1
        if isinstance(node, CommentedSeq):
            return node.lc.item(key)[0] + 1
    except (AttributeError, KeyError, IndexError, TypeError):
        return None
    return None


def _scalar(value: Any, line: Optional[int], field_name: str) -> str:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise SpecParseError(f"{field_name} must be a name, got {value!r}", line, field_name)
    return str(value)


def _names(node: Any, parent: Any, key: str) -> List[str]:
    if not isinstance(node, list):
        raise SpecParseError(f"{key} must be a list", _line(parent, key), key)
    names = [_scalar(v, _line(node, i), key) for i, v in enumerate(node)]
    duplicates = sorted({n for n in names if names.count(n) > 1})
    if duplicates:
        raise SpecParseError(f"{key} lists {duplicates[0]!r} twice", _line(parent, key), key)
    return names


def _flag(document: Any, key: str) -> bool:
    value = document.get(key, False)
    if not isinstance(value, bool):
        raise SpecParseError(f"{key} must be true or false", _line(document, key), key)
    return value


def _resolve(name: str, known: Sequence[str], what: str, where: str) -> str:
    if name not in known:
        raise UnresolvedReferenceError(f"{where} references unknown {what} {name!r}", witness=name)
    return name


def _executions(document: Any, states: List[str]) -> List[Execution]:
    raw = document.get("executions", [])
    if not isinstance(raw, list):
        raise SpecParseError("executions must be a list", _line(document, "executions"), "executions")
    executions: List[Execution] = []
    for i, item in enumerate(raw):
        line = _line(raw, i)
        if not isinstance(item, dict):
            raise SpecParseError("execution must be a mapping with from and to", line, "executions")
        for key in item:
            if key not in EXECUTION_FIELDS:
                raise SpecParseError(f"unknown execution field {key!r}", _line(item, key) or line, f"executions.{key}")
        if "from" not in item or "to" not in item:
            raise SpecParseError("execution needs both from and to", line, "executions")
        source = _resolve(_scalar(item["from"], line, "from"), states, "state", f"execution {i + 1}")
        target = _resolve(_scalar(item["to"], line, "to"), states, "state", f"execution {i + 1}")
        name = _scalar(item.get("name", thin_arrow_name(source, target)), line, "name")
        executions.append(Execution(name, source, target))
    names = [e.name for e in executions]
    for e in executions:
        if names.count(e.name) > 1:
            raise SpecParseError(f"execution name {e.name!r} is used twice", _line(document, "executions"), "name")
    return executions


def _compose(document: Any, mode: str, arrows: List[str]) -> List[Tuple[str, str, str]]:
    raw = document.get("compose", [])
    if raw and mode != "category":
        raise SpecParseError("compose is only allowed in category mode", _line(document, "compose"), "compose")
    if not isinstance(raw, list):
        raise SpecParseError("compose must be a list of [g, f, g_after_f]", _line(document, "compose"), "compose")
    triples = []
    for i, item in enumerate(raw):
        line = _line(raw, i)
        if not isinstance(item, list) or len(item) != 3:
            raise SpecParseError("compose entries are [g, f, g_after_f]", line, "compose")
        triple = tuple(_resolve(_scalar(v, line, "compose"), arrows, "execution", "compose") for v in item)
        triples.append(triple)
    return triples


def _estimates(document: Any, states: List[str], consensus: List[str]) -> Dict[str, List[str]]:
    raw = document["estimates"]
    if not isinstance(raw, dict):
        raise SpecParseError("estimates must map states to lists of values", _line(document, "estimates"), "estimates")
    estimates: Dict[str, List[str]] = {}
    for key, values in raw.items():
        line = _line(raw, key)
        state = _resolve(_scalar(key, line, "estimates"), states, "state", "estimates")
        if not isinstance(values, list):
            raise SpecParseError(f"estimate of {state} must be a list", line, f"estimates.{state}")
        estimates[state] = [
            _resolve(_scalar(v, line, "estimates"), consensus, "consensus value", f"estimate of {state}")
            for v in values
        ]
    for state in states:
        if state not in estimates:
            raise UnresolvedReferenceError(f"state {state!r} has no estimate", witness=state)
    return estimates


def _properties(document: Any, states: List[str]) -> Dict[str, Dict[str, int]]:
    raw = document.get("properties", {})
    if not isinstance(raw, dict):
        raise SpecParseError("properties must be a mapping", _line(document, "properties"), "properties")
    properties: Dict[str, Dict[str, int]] = {}
    for name, values in raw.items():
        line = _line(raw, name)
        if not isinstance(values, dict):
            raise SpecParseError(f"property {name} must map states to 0 or 1", line, f"properties.{name}")
        value: Dict[str, int] = {}
        for state, v in values.items():
            state = _resolve(_scalar(state, line, "properties"), states, "state", f"property {name}")
            if isinstance(v, bool) or v not in (0, 1):
                raise SpecParseError(f"property {name} at {state} must be 0 or 1", _line(values, state) or line, name)
            value[state] = int(v)
        missing = [w for w in states if w not in value]
        if missing:
            raise UnresolvedReferenceError(f"property {name} has no value at {missing[0]!r}", witness=missing[0])
        properties[str(name)] = value
    return properties


def parse_spec(text: str) -> ProtocolSpec:
    """
    Parse and check a spec document.

    Raises
    ------
    SpecParseError
        the document is not valid YAML, has unknown fields or a field of the wrong shape
    UnresolvedReferenceError
        a state, execution or consensus value is referenced but not declared
    CyclicQuiverError
        dag mode executions contain a cycle
    """
    try:
        document = yaml_roundtrip_loader().load(text)
    except MarkedYAMLError as e:
        line = e.problem_mark.line + 1 if e.problem_mark else None
        raise SpecParseError(f"not a valid YAML document: {e.problem}", line) from e
    except YAMLError as e:
        raise SpecParseError(f"not a valid YAML document: {e}") from e
    if not isinstance(document, dict):
        raise SpecParseError("spec must be a mapping", 1)
    for key in document:
        if key not in TOP_LEVEL_FIELDS:
            raise SpecParseError(f"unknown field {key!r}", _line(document, key), str(key))
    for key in REQUIRED_FIELDS:
        if key not in document:
            raise SpecParseError(f"missing required field {key!r}", 1, key)

    consensus = _names(document["consensus"], document, "consensus")
    states = _names(document["states"], document, "states")
    if not states:
        raise SpecParseError("states must not be empty", _line(document, "states"), "states")
    mode = document.get("mode", "dag")
    if mode not in MODES:
        raise SpecParseError(f"mode must be one of {', '.join(MODES)}", _line(document, "mode"), "mode")
    order = document.get("order", EstimateOrder.INCLUSION.value)
    if order not in [o.value for o in EstimateOrder]:
        raise SpecParseError("order must be inclusion or refinement", _line(document, "order"), "order")
    executions = _executions(document, states)
    arrows = [f"id_{w}" for w in states] + [e.name for e in executions]
    spec = ProtocolSpec(
        consensus=consensus,
        states=states,
        estimates=_estimates(document, states, consensus),
        executions=executions,
        mode=mode,
        compose=_compose(document, mode, arrows),
        strict_functorial=_flag(document, "strict_functorial"),
        order=EstimateOrder(order),
        waive_estimator_condition=_flag(document, "waive_estimator_condition"),
        properties=_properties(document, states),
        name=str(document.get("name", "")),
    )
    # cycles surface here rather than on first use
    spec.sigma()
    LOGGER.debug("Parsed spec %s: %s states, %s executions", spec.name, len(states), len(executions))
    return spec


def load_spec(path: Path) -> ProtocolSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise SpecParseError(f"cannot read {path}: {e.strerror}") from e
    return parse_spec(text)


def serialize_spec(spec: ProtocolSpec) -> str:
    stream = io.StringIO()
    yaml_roundtrip_loader().dump(spec.to_dict(), stream)
    return stream.getvalue()


def spec_from_protocol(protocol: Protocol, properties: Sequence[StateProperty] = ()) -> ProtocolSpec:
    """
    Spec document for a protocol.

    Thin state categories are written in dag mode, one edge per non-identity arrow.
    Anything else is written arrow by arrow in category mode.
    """
    sigma = protocol.sigma
    identities = set(sigma.identity.values())
    arrows = [a for name, a in sigma.arrows.items() if name not in identities]
    thin = sigma.is_thin and all(a.name == thin_arrow_name(a.dom, a.cod) for a in arrows)
    compose: List[Tuple[str, str, str]] = []
    if not thin:
        compose = [
            (g, f, gf) for (g, f), gf in sigma.composition.items() if g not in identities and f not in identities
        ]
    return ProtocolSpec(
        consensus=list(protocol.consensus),
        states=list(sigma.objects),
        estimates={w: sorted(protocol.estimates[w], key=protocol.consensus.index) for w in sigma.objects},
        executions=[Execution(a.name, a.dom, a.cod) for a in arrows],
        mode="dag" if thin else "category",
        compose=compose,
        strict_functorial=protocol.strict_functorial,
        order=protocol.order,
        waive_estimator_condition=protocol.waive_estimator_condition,
        properties={q.name: dict(q.value) for q in properties},
        name=protocol.name,
    )
