"""Check results and reports shared by every verification entry point"""

import json
import logging
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Any, Dict, Iterable, List, Optional

from .version import __version__

LOGGER = logging.getLogger(__name__)


class ExitCode(IntEnum):
    OK = 0
    VALIDATION_FAILURE = 1
    COUNTEREXAMPLE = 2
    PARSE_ERROR = 3


class CheckStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    SKIPPED = "skipped"
    WAIVED = "waived"


class CheckKind(str, Enum):
    VALIDATION = "validation"
    THEOREM = "theorem"
    PARSE = "parse"
    INFO = "info"


def jsonable(value: Any) -> Any:
    """Turn witnesses (tuples, frozensets, cosieves, enums) into plain sorted json values."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (frozenset, set)):
        return sorted((jsonable(v) for v in value), key=lambda v: (len(str(v)), str(v)))
    if isinstance(value, (tuple, list)):
        return [jsonable(v) for v in value]
    if hasattr(value, "label"):
        return value.label()
    return str(value)


@dataclass
class CheckResult:
    name: str
    status: CheckStatus
    kind: CheckKind = CheckKind.VALIDATION
    checked: int = 0
    violations: int = 0
    witness: Any = None
    detail: str = ""

    @property
    def failed(self) -> bool:
        return self.status == CheckStatus.FAIL

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "status": self.status.value,
            "kind": self.kind.value,
            "checked": self.checked,
            "violations": self.violations,
            "witness": jsonable(self.witness),
            "detail": self.detail,
        }

    def render(self) -> str:
        line = f"[{self.status.value:7}] {self.name}: {self.checked} checked, {self.violations} violations"
        if self.witness is not None:
            line += f", witness {json.dumps(jsonable(self.witness), sort_keys=True)}"
        if self.detail:
            line += f" ({self.detail})"
        return line


class Tally:
    """Counts checked instances of one law and keeps the first violation."""

    def __init__(self, name: str, kind: CheckKind = CheckKind.VALIDATION) -> None:
        self.name = name
        self.kind = kind
        self.checked = 0
        self.violations = 0
        self.witness: Any = None

    def observe(self, holds: bool, witness: Any = None) -> bool:
        self.checked += 1
        if not holds:
            self.violations += 1
            if self.violations == 1:
                self.witness = witness
        return holds

    def result(self, detail: str = "", waived: bool = False) -> CheckResult:
        if self.violations == 0:
            status = CheckStatus.PASS
        elif waived or self.kind == CheckKind.INFO:
            status = CheckStatus.WAIVED
        else:
            status = CheckStatus.FAIL
        return CheckResult(
            name=self.name,
            status=status,
            kind=self.kind,
            checked=self.checked,
            violations=self.violations,
            witness=self.witness,
            detail=detail,
        )


def skipped(name: str, detail: str, kind: CheckKind = CheckKind.THEOREM) -> CheckResult:
    return CheckResult(name=name, status=CheckStatus.SKIPPED, kind=kind, detail=detail)


@dataclass
class Report:
    command: str
    results: List[CheckResult] = field(default_factory=list)
    values: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    version: str = __version__

    def add(self, result: CheckResult) -> CheckResult:
        self.results.append(result)
        if result.failed:
            LOGGER.debug("%s failed with witness %s", result.name, result.witness)
        return result

    def extend(self, results: Iterable[CheckResult], prefix: str = "") -> None:
        for result in results:
            if prefix:
                result.name = f"{prefix}.{result.name}"
            self.add(result)

    def result(self, name: str) -> CheckResult:
        for result in self.results:
            if result.name == name:
                return result
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return not any(r.failed for r in self.results)

    @property
    def exit_code(self) -> ExitCode:
        if any(r.failed and r.kind == CheckKind.PARSE for r in self.results):
            return ExitCode.PARSE_ERROR
        if any(r.failed and r.kind == CheckKind.THEOREM for r in self.results):
            return ExitCode.COUNTEREXAMPLE
        if any(r.failed for r in self.results):
            return ExitCode.VALIDATION_FAILURE
        return ExitCode.OK

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "version": self.version,
            "seed": self.seed,
            "values": jsonable(self.values),
            "results": [r.to_dict() for r in self.results],
            "exit_code": int(self.exit_code),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False)

    def to_text(self) -> str:
        header = f"cbc-topos {self.version} :: {self.command}"
        if self.seed is not None:
            header += f" (seed {self.seed})"
        lines = [header]
        for key in sorted(self.values):
            lines.append(f"  {key} = {json.dumps(jsonable(self.values[key]), sort_keys=True, ensure_ascii=False)}")
        lines.extend(r.render() for r in self.results)
        lines.append(f"exit code {int(self.exit_code)}")
        return "\n".join(lines)

    def render(self, output_format: str = "text") -> str:
        if output_format == "json":
            return self.to_json()
        return self.to_text()


def error_result(error: Exception, kind: CheckKind = CheckKind.VALIDATION) -> CheckResult:
    """A failed entry for an exception raised while running a check."""
    return CheckResult(
        name=type(error).__name__,
        status=CheckStatus.FAIL,
        kind=kind,
        witness=getattr(error, "witness", None),
        detail=str(error),
    )
