import json
from logging import getLogger

import pytest
from typer.testing import CliRunner

from cbc_topos.cli import main_cli
from cbc_topos.reports import ExitCode
from cbc_topos.version import __version__

LOGGER = getLogger(__name__)


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def app():
    return main_cli()


def invoke(runner: CliRunner, app, *args: str):
    result = runner.invoke(app, list(args))
    LOGGER.debug("%s -> %s\n%s", args, result.exit_code, result.output)
    return result


def report_of(result) -> dict:
    return json.loads(result.stdout)


def test_version(runner, app):
    result = invoke(runner, app, "version")
    assert result.exit_code == 0
    assert __version__ in result.output


def test_validate(runner, app, p0_spec_file):
    result = invoke(runner, app, "validate", p0_spec_file, "--format", "json")
    assert result.exit_code == ExitCode.OK
    report = report_of(result)
    assert report["values"]["states"] == 3
    assert {r["name"] for r in report["results"]} >= {"estimator_condition", "property.settled.monotone"}


def test_safety_direct_and_forcing(runner, app, p0_spec_file):
    result = invoke(runner, app, "safety", p0_spec_file, "--method", "direct,forcing", "--format", "json")
    assert result.exit_code == ExitCode.OK
    report = report_of(result)
    assert report["values"]["safe"]["{a}"]["w1"] == {"direct": True, "forcing": True}
    assert report["values"]["safe"]["{b}"]["w3"] == {"direct": False, "forcing": False}


def test_safety_single_query(runner, app, p0_spec_file):
    result = invoke(
        runner, app, "safety", p0_spec_file, "--prop", "a,b", "--state", "w2", "--method", "all", "--format", "json"
    )
    assert result.exit_code == ExitCode.VALIDATION_FAILURE
    report = report_of(result)
    assert report["values"]["safe"] == {"{a,b}": {"w2": {"direct": True, "forcing": True, "unfolded": True}}}
    names = [r["name"] for r in report["results"]]
    assert names.count("NotAGeometricModelError") == 2


def test_modal_safety_needs_a_geometric_model(runner, app, p0_spec_file):
    result = invoke(runner, app, "safety", p0_spec_file, "--method", "modal")
    assert result.exit_code == ExitCode.VALIDATION_FAILURE
    assert "NotAGeometricModelError" in result.output


def test_modal_safety_on_g0(runner, app, g0_spec_file):
    result = invoke(runner, app, "safety", g0_spec_file, "--method", "all")
    assert result.exit_code == ExitCode.OK


def test_compatible(runner, app, p0_spec_file):
    result = invoke(runner, app, "compatible", p0_spec_file, "--first", "w1", "--second", "w2", "--format", "json")
    assert result.exit_code == ExitCode.OK
    assert report_of(result)["values"]["common_future"] == {"w1,w2": "w3"}


def test_decided(runner, app, p0_spec_file):
    result = invoke(runner, app, "decided", p0_spec_file, "--format", "json")
    assert result.exit_code == ExitCode.OK
    decided = report_of(result)["values"]["decided"]["settled"]
    assert decided["w3"] == {"direct": True, "forcing": True, "modal": True}
    assert decided["w1"]["modal"] is False


def test_modal_decision_of_non_monotone_property(runner, app, tmp_path, p0_spec_text):
    path = tmp_path / "early.yaml"
    path.write_text(p0_spec_text.replace("{w1: 0, w2: 0, w3: 1}", "{w1: 1, w2: 0, w3: 0}"), encoding="utf-8")
    assert invoke(runner, app, "decided", str(path)).exit_code == ExitCode.OK
    result = invoke(runner, app, "decided", str(path), "--method", "modal")
    assert result.exit_code == ExitCode.VALIDATION_FAILURE
    assert "NotMonotoneError" in result.output


def test_verify_theorem(runner, app, p0_spec_file):
    result = invoke(runner, app, "verify", p0_spec_file, "--suite", "theorem", "--format", "json")
    assert result.exit_code == ExitCode.OK
    report = report_of(result)
    assert report["values"]["checked"]["theorem"] > 0
    assert all(r["name"].startswith("theorem.") for r in report["results"])


def test_verify_geometric_suite(runner, app, g0_spec_file):
    result = invoke(runner, app, "verify", g0_spec_file, "--suite", "geometric", "--format", "json")
    assert result.exit_code == ExitCode.OK
    statuses = {r["name"]: r["status"] for r in report_of(result)["results"]}
    assert statuses["geometric.geometric_safety_agrees"] == "pass"


def test_bottom_estimate_is_a_counterexample(runner, app, g0_spec_file):
    """G0 waives the estimator condition, so the consistency lemmas fail at its bottom state"""
    result = invoke(runner, app, "verify", g0_spec_file, "--suite", "lemmas")
    assert result.exit_code == ExitCode.COUNTEREXAMPLE


def test_semantics(runner, app, p0_spec_file, g0_spec_file):
    assert invoke(runner, app, "semantics", g0_spec_file).exit_code == ExitCode.OK
    result = invoke(runner, app, "semantics", p0_spec_file, "--global-sections", "--format", "json")
    assert result.exit_code == ExitCode.OK
    assert report_of(result)["values"]["surjection"] is True


def test_full_report(runner, app, p0_spec_file):
    result = invoke(runner, app, "report", p0_spec_file, "--format", "json")
    assert result.exit_code == ExitCode.OK
    report = report_of(result)
    assert report["exit_code"] == 0
    statuses = {r["name"]: r["status"] for r in report["results"]}
    assert statuses["estimator.semantics"] == "skipped"


@pytest.mark.parametrize(
    "text",
    [
        "consensus: [a]\nstates: [x]\ncolour: red\nestimates: {x: [a]}\n",
        "consensus: [a]\nstates: [x]\nestimates: {x: [b]}\n",
        "consensus: [a]\nstates: [x, y]\nexecutions: [{from: x, to: y}, {from: y, to: x}]\n"
        "estimates: {x: [a], y: [a]}\n",
    ],
)
def test_parse_errors(runner, app, tmp_path, text):
    path = tmp_path / "broken.yaml"
    path.write_text(text, encoding="utf-8")
    result = invoke(runner, app, "validate", str(path), "--format", "json")
    assert result.exit_code == ExitCode.PARSE_ERROR
    assert report_of(result)["results"][0]["kind"] == "parse"


def test_missing_spec_file(runner, app, tmp_path):
    result = invoke(runner, app, "verify", str(tmp_path / "nowhere.yaml"))
    assert result.exit_code == ExitCode.PARSE_ERROR


def test_waived_sweep_finds_counterexample(runner, app):
    result = invoke(
        runner, app, "sweep", "--exhaustive", "--states", "1", "--consensus", "1", "--waive-estimator-condition"
    )
    assert result.exit_code == ExitCode.COUNTEREXAMPLE
    assert "current_consistency" in result.output


def test_sweep_is_deterministic(runner, app):
    args = ("sweep", "--count", "20", "--states", "3", "--consensus", "2", "--seed", "7", "--format", "json")
    first = invoke(runner, app, *args)
    second = invoke(runner, app, *args)
    assert first.exit_code == ExitCode.OK
    assert first.stdout == second.stdout
    report = report_of(first)
    assert report["seed"] == 7
    assert report["values"]["instances"] == {"protocols": 20}


def test_sweep_all_suites(runner, app):
    args = ("sweep", "--suite", "all", "--count", "4", "--states", "3", "--consensus", "1", "--format", "json")
    result = invoke(runner, app, *args)
    assert result.exit_code == ExitCode.OK
    assert set(report_of(result)["values"]["instances"]) == {"protocols", "geometric", "functors", "decided"}


def test_exhaustive_sweep(runner, app):
    result = invoke(runner, app, "sweep", "--exhaustive", "--states", "2", "--consensus", "2", "--format", "json")
    assert result.exit_code == ExitCode.OK
    report = report_of(result)
    assert report["seed"] is None
    assert report["values"]["instances"] == {"protocols": 3 + 2 * 9}
