from __future__ import annotations

import subprocess
import sys

import pytest
from click.testing import CliRunner

from oddkit.cli import cli


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def spec_path(data_dir):
    return str(data_dir / "flight_envelope_extended.odd")


@pytest.fixture()
def points_path(data_dir):
    return str(data_dir / "golden_points.csv")


def test_validate_ok(runner, spec_path):
    result = runner.invoke(cli, ["validate", spec_path])
    assert result.exit_code == 0
    assert "5 node(s)" in result.output


def test_validate_reports_errors_exit_1(runner, tmp_path):
    bad = tmp_path / "bad.odd"
    bad.write_text('odd "A" level mlm_odd {\n}\n')
    result = runner.invoke(cli, ["validate", str(bad)])
    assert result.exit_code == 1


def test_usage_error_exit_2(runner):
    result = runner.invoke(cli, ["validate"])  # missing argument
    assert result.exit_code == 2
    result = runner.invoke(cli, ["no-such-command"])
    assert result.exit_code == 2


def test_classify_matches_golden(runner, spec_path, points_path, golden_labels_text):
    result = runner.invoke(cli, ["classify", spec_path, points_path])
    assert result.exit_code == 0
    assert result.output == golden_labels_text


def test_classify_single_node(runner, spec_path, points_path):
    result = runner.invoke(cli, ["classify", spec_path, points_path, "--node", "MLCODD_oper"])
    assert result.exit_code == 0
    lines = result.output.splitlines()
    assert lines[0] == "row,category,on_boundary,annotations"
    # (0.5,-1300) is a feasible corner of the as-operated MLC ODD
    assert lines[7].startswith("6,FeasibleCornerCase,1")


def test_output_overwrite_needs_force(runner, spec_path, points_path, tmp_path):
    out = tmp_path / "labels.csv"
    args = ["classify", spec_path, points_path, "--out", str(out)]
    assert runner.invoke(cli, args).exit_code == 0
    result = runner.invoke(cli, args)
    assert result.exit_code == 1
    assert "--force" in result.output
    assert runner.invoke(cli, [*args, "--force"]).exit_code == 0


def test_partition_and_analyze(runner, spec_path, points_path):
    result = runner.invoke(cli, ["partition", spec_path, points_path])
    assert result.exit_code == 0
    assert "OutCOD,Any,3,6|7|11" in result.output
    result = runner.invoke(cli, ["analyze", spec_path, points_path, "--format", "csv"])
    assert result.exit_code == 0
    assert "mlc-shall-not-process" in result.output


def test_analyze_rules_env_var(runner, spec_path, points_path, tmp_path, monkeypatch):
    broken = tmp_path / "rules.txt"
    broken.write_text("rule { kinds [OutCOD] categories [Any] E [x] R [x] L [x] A [x] }\n")
    monkeypatch.setenv("ODDKIT_RULES", str(broken))
    result = runner.invoke(cli, ["analyze", spec_path, points_path])
    assert result.exit_code == 1
    assert "uncovered cell" in result.output


def test_coverage_command(runner, spec_path, points_path):
    result = runner.invoke(cli, ["coverage", spec_path, points_path, "--node", "MLMODD", "--grid", "10x10"])
    assert result.exit_code == 0
    assert "vertex_coverage=0.4" in result.output
    result = runner.invoke(cli, ["coverage", spec_path, points_path, "--node", "MLMODD", "--grid", "banana"])
    assert result.exit_code == 2


def test_generate_is_reproducible(runner, spec_path):
    args = ["generate", spec_path, "--node", "MLMODD", "--mode", "edge", "-n", "5", "--seed", "3"]
    a = runner.invoke(cli, args)
    b = runner.invoke(cli, args)
    assert a.exit_code == 0
    assert a.output == b.output
    assert a.output.startswith("# seed=3\n")


def test_generate_inlier_requires_transform(runner, spec_path):
    result = runner.invoke(
        cli, ["generate", spec_path, "--node", "MLMODD", "--mode", "inlier", "-n", "2"]
    )
    assert result.exit_code == 2


def test_simulate_writes_verdicts_and_metrics(runner, spec_path, points_path, tmp_path):
    verdicts = tmp_path / "verdicts.csv"
    metrics = tmp_path / "metrics.txt"
    result = runner.invoke(
        cli,
        ["simulate", spec_path, points_path, "--scenario", "baseline",
         "--out", str(verdicts), "--metrics", str(metrics)],
    )
    assert result.exit_code == 0
    assert verdicts.read_text().splitlines()[0].startswith("row,disposition")
    assert "detection_rate_Outlier=1" in metrics.read_text()
    result = runner.invoke(cli, ["simulate", spec_path, points_path, "--scenario", "ghost"])
    assert result.exit_code == 1


def test_render_command(runner, spec_path, points_path, tmp_path):
    out = tmp_path / "odd.svg"
    result = runner.invoke(cli, ["render", spec_path, points_path, "--out", str(out)])
    assert result.exit_code == 0
    text = out.read_text()
    assert text.startswith("<svg")
    assert 'id="region-MLMODD"' in text


def test_console_entry_point(spec_path):
    proc = subprocess.run(
        [sys.executable, "-m", "oddkit.cli", "validate", spec_path],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
