import json
import sys

import pytest
from typer.testing import CliRunner

from dwlab.cli.cli import app, main
from dwlab.normbench.runners import RUNNERS

runner = CliRunner()

SMALL_RUN = """
grid:
  points_per_axis: 16
  half_period: 8.0
seed: 0
threads: 1
probes:
  null_symbol:
    angles: [0.5, 0.25, 0.125]
solvers:
  - name: tiny
    system: wave_null
    T: 1.0
    dt: 0.25
    max_iter: 2
    data:
      max_degree: 4
"""


@pytest.fixture
def small_run(tmp_path):
    config = tmp_path / "run.yaml"
    config.write_text(SMALL_RUN)
    output = tmp_path / "out"
    result = runner.invoke(app, ["run", str(config), "--output-dir", str(output), "--quiet"])
    return result, output


def test_run_writes_artifacts(small_run):
    result, output = small_run
    assert result.exit_code == 0, result.output
    for name in ("manifest.json", "summary.csv", "summary.json", "reports/null_symbol.json",
                 "reports/null_symbol.csv", "solves/tiny.json"):
        assert (output / name).is_file(), name

    manifest = json.loads((output / "manifest.json").read_text())
    assert manifest["probes"] == ["null_symbol"]
    assert manifest["solves"] == ["tiny"]
    assert len(manifest["config_sha256"]) == 64
    summary = json.loads((output / "summary.json").read_text())
    assert {v["status"] for v in summary["verdicts"]} == {"PASS"}
    assert summary["solves"][0]["name"] == "tiny"
    assert (output / "summary.csv").read_text().splitlines()[0] == (
        "probe,estimate,statistic,fitted,target,slack,status,note"
    )


@pytest.mark.parametrize("name", ["reports/null_symbol.json", "summary.json", "solves/tiny.json"])
def test_show_report(small_run, name):
    _, output = small_run
    result = runner.invoke(app, ["show-report", str(output / name)])
    assert result.exit_code == 0, result.output


def test_show_report_rejects_other_files(tmp_path):
    assert runner.invoke(app, ["show-report", str(tmp_path / "missing.json")]).exit_code == 1
    other = tmp_path / "other.json"
    other.write_text('{"foo": 1}')
    assert runner.invoke(app, ["show-report", str(other)]).exit_code == 1


def test_empty_selection_writes_the_manifest_only(tmp_path):
    config = tmp_path / "empty.yaml"
    config.write_text("grid:\n  points_per_axis: 16\n  half_period: 8.0\n")
    output = tmp_path / "out"
    result = runner.invoke(app, ["run", str(config), "--output-dir", str(output), "--quiet"])
    assert result.exit_code == 0, result.output
    assert [p.name for p in output.iterdir()] == ["manifest.json"]


@pytest.mark.parametrize(
    "text",
    [
        "grid: [unclosed\n",
        "probes:\n  nope: {}\n",
        "grid:\n  points_per_axis: many\n",
        "- just\n- a list\n",
        "probes:\n  decay:\n    times: []\n",
    ],
)
def test_bad_config_exits_with_1(tmp_path, text):
    config = tmp_path / "bad.yaml"
    config.write_text(text)
    result = runner.invoke(app, ["run", str(config), "--output-dir", str(tmp_path / "out"), "--quiet"])
    assert result.exit_code == 1
    assert "error" in result.output


def test_failing_estimate_exits_with_2(tmp_path):
    config = tmp_path / "strict.yaml"
    config.write_text(
        "grid:\n  points_per_axis: 16\n  half_period: 8.0\nthreads: 1\n"
        # two angles leave the exponent fit unset
        "probes:\n  null_symbol:\n    angles: [0.5, 0.25]\n"
    )
    result = runner.invoke(app, ["run", str(config), "--output-dir", str(tmp_path / "out"), "--quiet"])
    assert result.exit_code == 2, result.output


def test_list_probes():
    result = runner.invoke(app, ["list-probes", "--json"])
    assert result.exit_code == 0
    listing = json.loads(result.stdout)
    assert [p["name"] for p in listing["probes"]] == sorted(RUNNERS)
    assert "probes" in listing["run_config"]
    assert runner.invoke(app, ["list-probes"]).exit_code == 0


def test_main_maps_usage_errors_to_1(monkeypatch):
    monkeypatch.setattr(sys, "argv", ["dwlab", "frobnicate"])
    with pytest.raises(SystemExit) as error:
        main()
    assert error.value.code == 1


def test_main_propagates_exit_codes(monkeypatch, tmp_path):
    monkeypatch.setattr(sys, "argv", ["dwlab", "show-report", str(tmp_path / "missing.json")])
    with pytest.raises(SystemExit) as error:
        main()
    assert error.value.code == 1
