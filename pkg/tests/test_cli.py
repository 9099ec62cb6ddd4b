"""End-to-end command-line runs on the small fixtures."""

import json

import pytest

from dbio.cli import load_investment, main
from dbio.scenario import ScenarioError

SCENARIO = "sizing_threshold.json"


def run(args):
    return main([str(a) for a in args])


def test_plan_mode_outputs(fixtures_dir, tmp_path):
    out = tmp_path / "plan"
    assert run(["--scenario", fixtures_dir / SCENARIO,
                "--out", out, "--mode", "plan"]) == 0
    for name in ("costs.csv", "sizing.csv", "dispatch_y1.csv", "dispatch_y2.csv",
                 "report.json", "manifest.json"):
        assert (out / name).exists(), name
    report = json.loads((out / "report.json").read_text())
    inv = report["plan"]["investment"]
    assert inv["s_bess"] > 0 and inv["p_cder_max"] > 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["mode"] == "plan" and manifest["converged"]


def test_plan_mode_deterministic(fixtures_dir, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run(["--scenario", fixtures_dir / SCENARIO,
                    "--out", out, "--mode", "plan"]) == 0
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    assert (a / "costs.csv").read_bytes() == (b / "costs.csv").read_bytes()


def test_dump_lp(fixtures_dir, tmp_path):
    out = tmp_path / "lp"
    assert run(["--scenario", fixtures_dir / SCENARIO, "--out", out,
                "--mode", "plan", "--dump-lp"]) == 0
    text = (out / "integrated.lp").read_text()
    assert text.startswith("\\") and text.rstrip().endswith("End")


def test_validate_mode_feasible(fixtures_dir, tmp_path):
    inv_path = tmp_path / "inv.json"
    inv_path.write_text(json.dumps({"s_pv": 0.0, "s_bess": 0.6, "p_cder_max": 0.6}))
    out = tmp_path / "val"
    assert run(["--scenario", fixtures_dir / SCENARIO, "--out", out,
                "--mode", "validate", "--investment", inv_path]) == 0
    for name in ("degradation.csv", "validation.csv", "sizing.csv",
                 "costs.csv", "report.json"):
        assert (out / name).exists(), name
    report = json.loads((out / "report.json").read_text())
    assert report["validation"]["feasible"]
    assert report["validation"]["total_eue_mwh"] <= 1e-6


def test_validate_mode_infeasible_exit_code(fixtures_dir, tmp_path):
    inv_path = tmp_path / "inv.json"
    inv_path.write_text(json.dumps({"s_pv": 0.0, "s_bess": 0.2, "p_cder_max": 0.6}))
    out = tmp_path / "val"
    assert run(["--scenario", fixtures_dir / SCENARIO, "--out", out,
                "--mode", "validate", "--investment", inv_path]) == 1
    report = json.loads((out / "report.json").read_text())
    assert not report["validation"]["feasible"]


def test_validate_mode_requires_investment(fixtures_dir, tmp_path):
    assert run(["--scenario", fixtures_dir / SCENARIO,
                "--out", tmp_path / "x", "--mode", "validate"]) == 2


def test_size_mode(fixtures_dir, tmp_path):
    out = tmp_path / "size"
    assert run(["--scenario", fixtures_dir / SCENARIO, "--out", out,
                "--mode", "size", "--method", "binary", "--tol", 0.02]) == 0
    report = json.loads((out / "report.json").read_text())
    final = report["sizing"]["final_size_mwh"]
    assert 0.5 - 1e-9 <= final <= 0.5 + 0.02
    assert report["sizing"]["converged"]
    assert (out / "iterations.csv").exists()
    rows = (out / "iterations.csv").read_text().strip().splitlines()
    assert rows[0] == "iter,phase,size_mwh,objective_usd,eue_mwh,shed,lb,ub"
    assert len(rows) - 1 == len(report["sizing"]["iterations"])


def test_bad_scenario_path_exit_code(tmp_path):
    assert run(["--scenario", tmp_path / "missing.json",
                "--out", tmp_path / "o"]) == 2


def test_load_investment_plain_and_report(tmp_path):
    plain = tmp_path / "plain.json"
    plain.write_text(json.dumps({"s_pv": 0.1, "s_bess": 0.2, "p_cder_max": 0.3}))
    inv = load_investment(plain)
    assert (inv.s_pv, inv.s_bess, inv.p_cder_max) == (0.1, 0.2, 0.3)

    nested = tmp_path / "report.json"
    nested.write_text(json.dumps(
        {"plan": {"investment": {"s_pv": 0.4, "s_bess": 0.5, "p_cder_max": 0.6}}}))
    inv = load_investment(nested)
    assert (inv.s_pv, inv.s_bess, inv.p_cder_max) == (0.4, 0.5, 0.6)

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"s_pv": 0.1}))
    with pytest.raises(ScenarioError, match="missing field"):
        load_investment(bad)


def test_no_cyclic_soc_flag(fixtures_dir, tmp_path):
    out = tmp_path / "open"
    assert run(["--scenario", fixtures_dir / SCENARIO, "--out", out,
                "--mode", "plan", "--no-cyclic-soc"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["cyclic_soc_disabled"]
