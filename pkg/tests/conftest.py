"""Shared fixtures: scenario loaders, cached plan solves, invariant checks."""

from pathlib import Path

import numpy as np
import pytest

from dbio import milp
from dbio.planning import build_integrated, extract_solution, pv_efficiency_schedule
from dbio.scenario import (BessParams, CderParams, CycleLifeCurveSpec,
                           MultiYearProfiles, PvParams, Scenario, ScenarioConfig,
                           SolveOptionsConfig, TariffSchedule, load_scenario)

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


def _load(name):
    return load_scenario(FIXTURES / name)


@pytest.fixture(scope="session")
def islanded_scenario():
    return _load("islanded_base.json")


@pytest.fixture(scope="session")
def grid_scenario():
    return _load("grid_fixed.json")


@pytest.fixture(scope="session")
def sizing_scenario():
    return _load("sizing_threshold.json")


@pytest.fixture(scope="session")
def highuse_scenario():
    return _load("highuse_degradation.json")


def solve_plan(scenario, profiles=None, mip_gap=None):
    """One integrated planning solve; returns (solution, profiles, result)."""
    profiles = profiles if profiles is not None else scenario.profiles()
    opts = milp.SolveOptions(
        mip_gap=scenario.cfg.solver.mip_gap if mip_gap is None else mip_gap,
        time_limit=scenario.cfg.solver.time_limit)
    problem, index = build_integrated(scenario, profiles)
    result = milp.solve(problem, opts)
    assert result.has_solution, result.status
    return extract_solution(result, index), profiles, result


@pytest.fixture(scope="session")
def islanded_plan(islanded_scenario):
    return solve_plan(islanded_scenario)


@pytest.fixture(scope="session")
def grid_plan(grid_scenario):
    return solve_plan(grid_scenario)


@pytest.fixture(scope="session")
def sizing_plan(sizing_scenario):
    return solve_plan(sizing_scenario)


@pytest.fixture(scope="session")
def highuse_plan(highuse_scenario):
    return solve_plan(highuse_scenario)


def make_scenario(load, pv_cf, *, years=1, alpha=365.0, tie=0.0, big_m=10.0,
                  ls_penalty=1e6, load_growth=0.0, import_price=0.0,
                  cder=None, pv=None, bess=None, cyclic_soc=True,
                  hours_per_day=24):
    """Small in-code scenario for unit tests; one representative day."""
    load = np.asarray(load, dtype=float).reshape(1, hours_per_day)
    pv_cf = np.asarray(pv_cf, dtype=float).reshape(1, hours_per_day)
    cfg = ScenarioConfig(planning_years=years, rep_days=1,
                         hours_per_day=hours_per_day, alpha=alpha,
                         load_growth=load_growth, ls_penalty=ls_penalty,
                         tie_limit=tie, big_m=big_m, cyclic_soc=cyclic_soc,
                         solver=SolveOptionsConfig(mip_gap=0.0))
    tariff = TariffSchedule(mode="fixed",
                            import_price=np.full((1, hours_per_day), float(import_price)))
    return Scenario(cfg=cfg,
                    cder=cder or CderParams(capital=1e5, op_cost=50.0,
                                            no_load=0.0, p_min=0.0),
                    pv=pv or PvParams(capital=8e4, rep_frac=0.4, deg_rate=0.01),
                    bess=bess or BessParams(capital=5e4),
                    tariff=tariff, base_load=load, base_pv_cf=pv_cf)


def check_dispatch_invariants(sol, scenario, profiles, eta_pv_by_year=None,
                              capacity=None):
    """Physical feasibility of an extracted dispatch.

    Checks the hourly power balance, simultaneity exclusions, stored-energy
    window, and tie-line bounds. ``capacity`` overrides the battery capacity
    used for the stored-energy window (degraded single-year dispatches).
    """
    cfg, bess = scenario.cfg, scenario.bess
    Y, D, T = sol.shape
    load = profiles.load
    tol = 1e-6
    bal_tol = tol * max(1.0, float(load.max()))
    if eta_pv_by_year is None:
        eta_pv_by_year = pv_efficiency_schedule(scenario.pv, Y)

    pv_power = (np.asarray(eta_pv_by_year)[:, None, None] * profiles.pv_cf
                * sol.investment.s_pv)
    supply = sol.p_cder + sol.p_dchg + pv_power + sol.p_ls + sol.p_imp
    demand = load + sol.p_chg + sol.p_curt + sol.p_exp
    assert np.max(np.abs(supply - demand)) <= bal_tol, "power balance violated"

    assert np.max(np.minimum(sol.p_chg, sol.p_dchg)) <= tol, "simultaneous charge/discharge"
    assert np.max(sol.u_chg + sol.u_dchg) <= 1.0 + tol
    assert np.max(np.minimum(sol.p_imp, sol.p_exp)) <= tol, "simultaneous import/export"
    assert np.max(sol.u_imp + sol.u_exp) <= 1.0 + tol

    cap = sol.investment.s_bess if capacity is None else capacity
    assert np.min(sol.e_bess) >= bess.soc_min * cap - tol, "stored energy below window"
    assert np.max(sol.e_bess) <= bess.soh_init * bess.soc_max * cap + tol, \
        "stored energy above window"

    assert np.max(sol.p_imp) <= cfg.tie_limit + tol
    assert np.max(sol.p_exp) <= cfg.tie_limit + tol
    if cfg.tie_limit == 0:
        assert np.max(sol.p_imp) <= tol and np.max(sol.p_exp) <= tol
