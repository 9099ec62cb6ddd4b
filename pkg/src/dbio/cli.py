"""Command-line entry point: plan, validate, or size a microgrid scenario.

Progress goes to stderr, one line per solve/iteration; machine-readable
results only land in files under the output directory. The solver backend is
selected with the ``DBIO_SOLVER`` environment variable (default: highs).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, milp, reports
from .planning import (InvestmentDecision, ModelBuildOptions, build_integrated,
                       extract_solution)
from .scenario import ScenarioError, load_scenario
from .sizing import SearchConfig, SizingError, run_search
from .validation import validate


def _progress(msg):
    print(msg, file=sys.stderr, flush=True)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dbio",
        description="Degradation-aware microgrid planning: size, validate, and "
                    "iteratively refine a generator/PV/battery investment plan.")
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--mode", choices=("plan", "validate", "size"), default="plan")
    p.add_argument("--investment",
                   help="investment JSON for validate mode (either "
                        '{"s_pv":..,"s_bess":..,"p_cder_max":..} or a prior '
                        "report.json containing a plan)")
    p.add_argument("--method", choices=("binary", "fixed"), default="binary",
                   help="sizing search method (size mode)")
    p.add_argument("--tol", type=float, default=0.01,
                   help="binary-search convergence tolerance, MWh")
    p.add_argument("--step", type=float, default=0.01,
                   help="fixed-step relative increment")
    p.add_argument("--mip-gap", type=float, default=None,
                   help="override the scenario's relative MIP gap")
    p.add_argument("--time-limit", type=float, default=None,
                   help="override the scenario's per-solve time limit, seconds")
    p.add_argument("--dump-lp", action="store_true",
                   help="write each solved model in LP format to the output dir")
    p.add_argument("--no-cyclic-soc", action="store_true",
                   help="drop the end-of-day stored-energy closure constraint")
    return p


def load_investment(path) -> InvestmentDecision:
    doc = json.loads(Path(path).read_text())
    if "plan" in doc and "investment" in doc.get("plan", {}):
        doc = doc["plan"]["investment"]
    elif "investment" in doc:
        doc = doc["investment"]
    try:
        return InvestmentDecision(s_pv=float(doc["s_pv"]),
                                  s_bess=float(doc["s_bess"]),
                                  p_cder_max=float(doc["p_cder_max"]))
    except KeyError as exc:
        raise ScenarioError(f"investment file {path}: missing field {exc}") from exc


def write_manifest(args, out_dir: Path, converged=True):
    doc = {
        "mode": args.mode,
        "scenario": str(Path(args.scenario).resolve()),
        "out": str(out_dir.resolve()),
        "method": args.method,
        "tolerance_mwh": args.tol,
        "step_frac": args.step,
        "mip_gap_override": args.mip_gap,
        "time_limit_override": args.time_limit,
        "cyclic_soc_disabled": args.no_cyclic_soc,
        "solver_backend": milp.default_backend(),
        "converged": converged,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "tool_version": __version__,
    }
    (out_dir / "manifest.json").write_text(json.dumps(doc, indent=2) + "\n")


def _solve_opts(scenario, args) -> milp.SolveOptions:
    s = scenario.cfg.solver
    return milp.SolveOptions(
        mip_gap=s.mip_gap if args.mip_gap is None else args.mip_gap,
        time_limit=s.time_limit if args.time_limit is None else args.time_limit,
        threads=s.threads)


def _plan(scenario, opts, out_dir, dump_lp):
    profiles = scenario.profiles()
    problem, index = build_integrated(scenario, profiles)
    if dump_lp:
        problem.write_lp(out_dir / "integrated.lp")
    _progress(f"solving integrated model ({problem.n_variables} vars, "
              f"{problem.n_constraints} rows)...")
    result = milp.solve(problem, opts)
    _progress(f"  status={result.status} objective={result.objective:.2f} "
              f"gap={result.achieved_gap:.2%} ({result.runtime:.1f}s)")
    if not result.has_solution:
        raise milp.MilpError(f"integrated solve failed: status {result.status}")
    return extract_solution(result, index), profiles


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as exc:
        _progress(f"error: {exc}")
        return 2
    if args.no_cyclic_soc:
        scenario = dataclasses.replace(
            scenario, cfg=dataclasses.replace(scenario.cfg, cyclic_soc=False))
    opts = _solve_opts(scenario, args)

    try:
        if args.mode == "plan":
            sol, _ = _plan(scenario, opts, out_dir, args.dump_lp)
            reports.write_costs(sol, out_dir)
            reports.write_sizing(sol.investment, out_dir)
            reports.write_dispatch(sol, out_dir)
            reports.write_report_json(out_dir, plan=sol)
            write_manifest(args, out_dir)
            return 0

        if args.mode == "validate":
            if not args.investment:
                _progress("error: --investment is required in validate mode")
                return 2
            investment = load_investment(args.investment)

            def on_year(r):
                _progress(f"year {r.year}: eue={r.eue_y:.6g} MWh "
                          f"capacity={r.state_in.capacity:.6g} MWh")

            report = validate(investment, scenario, solve_opts=opts, on_year=on_year)
            reports.write_degradation(report, out_dir)
            reports.write_validation_summary(report, out_dir)
            last = report.per_year[-1].dispatch
            reports.write_sizing(investment, out_dir)
            reports.write_costs(last, out_dir)
            reports.write_report_json(out_dir, validation=report)
            write_manifest(args, out_dir, converged=report.feasible)
            return 0 if report.feasible and not report.truncated else 1

        # size mode: plan, then search, then report everything.
        sol, profiles = _plan(scenario, opts, out_dir, args.dump_lp)
        search_cfg = SearchConfig(
            method="binary" if args.method == "binary" else "fixed_step",
            tolerance=args.tol, step_frac=args.step)

        def on_iteration(rec):
            _progress(f"iter {rec.index} [{rec.phase}] size={rec.candidate_size:.6g} "
                      f"MWh eue={rec.total_eue:.6g} shed={'YES' if rec.shed else 'NO'}")

        sizing = run_search(sol.investment, scenario, search_cfg,
                            profiles=profiles, solve_opts=opts,
                            on_iteration=on_iteration)
        final_inv = sizing.final_investment or sol.investment
        final_report = validate(final_inv, scenario, profiles, solve_opts=opts)

        reports.write_costs(sol, out_dir)
        reports.write_sizing(final_inv, out_dir)
        reports.write_dispatch(sol, out_dir)
        reports.write_degradation(final_report, out_dir)
        reports.write_validation_summary(final_report, out_dir)
        reports.write_iterations(sizing, out_dir)
        reports.write_report_json(out_dir, plan=sol, validation=final_report,
                                  sizing=sizing)
        write_manifest(args, out_dir, converged=sizing.converged)
        _progress(f"final size: {sizing.final_size:.6g} MWh "
                  f"(converged={sizing.converged})")
        return 0 if sizing.converged else 1

    except (milp.MilpError, SizingError, ScenarioError) as exc:
        _progress(f"error: {exc}")
        write_manifest(args, out_dir, converged=False)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
