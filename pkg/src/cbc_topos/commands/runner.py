"""Loading spec files into protocols and turning reports into output and exit codes"""

import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple

import typer

from ..category.fincat import CyclicQuiverError
from ..helpers.errors import ToposError
from ..protocol.protocol import Protocol
from ..protocol.spec_file import ProtocolSpec, SpecParseError, UnresolvedReferenceError, load_spec
from ..reports import CheckKind, ExitCode, Report, error_result

LOGGER = logging.getLogger(__name__)

PARSE_ERRORS = (SpecParseError, UnresolvedReferenceError, CyclicQuiverError)


class Abort(Exception):
    """Stop a command after its report has recorded the reason."""


def split_list(raw: Optional[str], allowed: Sequence[str], what: str) -> List[str]:
    """Comma separated choices; 'all' expands to every allowed value."""
    if raw is None or raw.strip() in ("", "all"):
        return list(allowed)
    chosen = [part.strip() for part in raw.split(",") if part.strip()]
    for item in chosen:
        if item not in allowed:
            raise typer.BadParameter(f"unknown {what} {item!r}, choose from {', '.join(allowed)} or all")
    return chosen


def parse_proposition(raw: str) -> List[str]:
    """'a,b' is {a, b}; '' and '{}' are the empty proposition."""
    raw = raw.strip()
    if raw.startswith("{") and raw.endswith("}"):
        raw = raw[1:-1]
    return [part.strip() for part in raw.split(",") if part.strip()]


@contextmanager
def reporting(report: Report, output_format: str) -> Iterator[Report]:
    """
    Run a command body, record library errors in the report, print it and exit with its code.

    Spec errors count as parse failures. Other input errors count as validation failures.
    """
    try:
        yield report
    except Abort:
        pass
    except PARSE_ERRORS as e:
        LOGGER.debug("Spec rejected", exc_info=True)
        report.add(error_result(e, CheckKind.PARSE))
    except ToposError as e:
        LOGGER.debug("Check aborted", exc_info=True)
        report.add(error_result(e))
    typer.echo(report.render(output_format))
    code = report.exit_code
    if code != ExitCode.OK:
        raise typer.Exit(int(code))


def load_protocol(
    spec_path: Path,
    report: Report,
    strict_functorial: bool = False,
    waive_estimator_condition: bool = False,
) -> Tuple[ProtocolSpec, Protocol]:
    """Parse a spec file and build its protocol. The flags only ever switch options on."""
    spec = load_spec(spec_path)
    protocol = spec.to_protocol(
        strict_functorial=True if strict_functorial else None,
        waive_estimator_condition=True if waive_estimator_condition else None,
    )
    report.values["protocol"] = protocol.name or Path(spec_path).stem
    LOGGER.debug("Loaded %s from %s", protocol.name, spec_path)
    return spec, protocol
