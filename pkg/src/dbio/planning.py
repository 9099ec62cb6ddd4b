"""Multi-year microgrid planning MILP and its single-year fixed-investment variant.

Decision variables per (year, day, hour): controllable-generator output,
battery charge/discharge power and stored energy, load shed, PV curtailment,
grid import/export, and the five commitment/status binaries. Global variables:
PV size (MW), battery capacity (MWh), generator capacity (MW), and the shared
initial battery energy level.

Big-M linearization removes the products of binaries with the (variable)
installed capacities; the battery power limits and PV terms stay linear
because installed sizes enter with constant coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import milp
from .milp import EQ, GE, INF, LE, MilpProblem
from .scenario import Scenario, MultiYearProfiles


class ModelBuildError(ValueError):
    pass


@dataclass(frozen=True)
class InvestmentDecision:
    s_pv: float        # MW
    s_bess: float      # MWh (rated)
    p_cder_max: float  # MW

    def __post_init__(self):
        if min(self.s_pv, self.s_bess, self.p_cder_max) < 0:
            raise ModelBuildError("investment sizes must be >= 0")


@dataclass(frozen=True)
class YearOverrides:
    """Degraded parameters injected into a single-year build."""

    eta_pv: float
    eta_bess: float
    s_bess_y: float  # degraded capacity, MWh
    soh_y: float


@dataclass
class ModelBuildOptions:
    """Build-time switches.

    ``ms=1`` includes capital costs (planning build, sizes are variables);
    ``ms=0`` requires a fixed investment (validation build). ``pin_s_bess``
    fixes only the battery capacity while leaving the other sizes free,
    which is what the sizing search probes use.
    """

    ms: int = 1
    fixed_investment: InvestmentDecision | None = None
    pin_s_bess: float | None = None
    year_overrides: YearOverrides | None = None

    def validate(self):
        if self.ms not in (0, 1):
            raise ModelBuildError("ms must be 0 or 1")
        if self.ms == 1 and self.fixed_investment is not None:
            raise ModelBuildError("ms=1 requires fixed_investment absent")
        if self.ms == 0 and self.fixed_investment is None:
            raise ModelBuildError("ms=0 requires fixed_investment")
        if self.pin_s_bess is not None and self.pin_s_bess < 0:
            raise ModelBuildError("pin_s_bess must be >= 0")


@dataclass
class ModelIndex:
    """Variable index maps plus the data needed to interpret a primal vector."""

    shape: tuple  # (Y, D, T)
    series: dict  # name -> int array of shape (Y, D, T)
    scalars: dict  # name -> int
    alpha: float
    years: int  # planning-year multiplier for the PV degradation cost term
    eta_pv_by_year: np.ndarray  # (Y,)
    import_price: np.ndarray    # (D, T)
    export_price: np.ndarray    # (D, T)
    scenario: Scenario
    ms: int

    SERIES = ("p_cder", "p_chg", "p_dchg", "p_ls", "p_imp", "p_exp", "p_curt",
              "e_bess", "u_cder", "u_chg", "u_dchg", "u_imp", "u_exp")
    BINARIES = ("u_cder", "u_chg", "u_dchg", "u_imp", "u_exp")


@dataclass
class DispatchSolution:
    """Extracted dispatch series, investment, and cost breakdown."""

    series: dict              # name -> (Y, D, T) float array
    e_init: float
    investment: InvestmentDecision
    costs: dict               # component name -> $
    objective: float
    shape: tuple

    def __getattr__(self, name):
        try:
            return self.series[name]
        except KeyError:
            raise AttributeError(name) from None

    @property
    def cost_total(self):
        return (self.costs["capital"] + self.costs["cder_op"] + self.costs["pv_deg"]
                + self.costs["bess_deg"] + self.costs["shed_penalty"]
                + self.costs["import_cost"] - self.costs["export_revenue"])


def pv_efficiency_schedule(pv, years: int) -> np.ndarray:
    """eta_init * (1 - deg_rate)^(y-1) for y = 1..years."""
    return pv.eta_init * (1.0 - pv.deg_rate) ** np.arange(years)


def _build(scenario: Scenario, profiles: MultiYearProfiles, opts: ModelBuildOptions,
           eta_pv_by_year, eta_bess, soh, years_for_pv_deg, name):
    cfg, cder, pv, bess = scenario.cfg, scenario.cder, scenario.pv, scenario.bess
    Y, D, T = profiles.load.shape
    if profiles.pv_cf.shape != (Y, D, T):
        raise ModelBuildError("profiles: load/pv_cf shape mismatch")
    if len(eta_pv_by_year) != Y:
        raise ModelBuildError("eta_pv_by_year length must match horizon")
    if scenario.tariff.import_price.shape != (D, T):
        raise ModelBuildError("tariff shape mismatch")

    prob = MilpProblem(name=name)
    alpha = cfg.alpha
    big_m = cfg.big_m
    tie = cfg.tie_limit
    load = profiles.load
    pv_cf = profiles.pv_cf
    imp_price = scenario.tariff.import_price
    exp_price = scenario.tariff.export_price

    fixed = opts.fixed_investment
    ov = opts.year_overrides

    # Capacity variables. Pinned sizes are encoded as lb == ub so the model
    # structure (and variable count) is identical in all build modes.
    if fixed is not None:
        s_pv_bounds = (fixed.s_pv, fixed.s_pv)
        p_max_bounds = (fixed.p_cder_max, fixed.p_cder_max)
        cap = ov.s_bess_y if ov is not None else fixed.s_bess
        if ov is not None and ov.s_bess_y > fixed.s_bess + 1e-12:
            raise ModelBuildError(
                f"override capacity {ov.s_bess_y} exceeds rated {fixed.s_bess}")
        s_bess_bounds = (cap, cap)
    else:
        s_pv_bounds = (0.0, INF)
        p_max_bounds = (0.0, cder.max_size)
        if opts.pin_s_bess is not None:
            s_bess_bounds = (opts.pin_s_bess, opts.pin_s_bess)
        else:
            s_bess_bounds = (0.0, INF)

    series = {k: np.empty((Y, D, T), dtype=np.int64) for k in ModelIndex.SERIES}
    s_pv = prob.add_variable("s_pv", *s_pv_bounds)
    s_bess = prob.add_variable("s_bess", *s_bess_bounds)
    p_cder_max = prob.add_variable("p_cder_max", *p_max_bounds)
    e_init = prob.add_variable("e_init", 0.0, INF)

    u_grid_ub = 1.0 if tie > 0 else 0.0
    for y in range(Y):
        for d in range(D):
            for t in range(T):
                tag = f"{y}_{d}_{t}"
                series["p_cder"][y, d, t] = prob.add_variable(f"p_cder_{tag}")
                series["p_chg"][y, d, t] = prob.add_variable(f"p_chg_{tag}")
                series["p_dchg"][y, d, t] = prob.add_variable(f"p_dchg_{tag}")
                series["p_ls"][y, d, t] = prob.add_variable(
                    f"p_ls_{tag}", 0.0, load[y, d, t])
                series["p_imp"][y, d, t] = prob.add_variable(f"p_imp_{tag}", 0.0, tie)
                series["p_exp"][y, d, t] = prob.add_variable(f"p_exp_{tag}", 0.0, tie)
                series["p_curt"][y, d, t] = prob.add_variable(f"p_curt_{tag}")
                series["e_bess"][y, d, t] = prob.add_variable(f"e_bess_{tag}")
                series["u_cder"][y, d, t] = prob.add_variable(f"u_cder_{tag}", 0, 1, binary=True)
                series["u_chg"][y, d, t] = prob.add_variable(f"u_chg_{tag}", 0, 1, binary=True)
                series["u_dchg"][y, d, t] = prob.add_variable(f"u_dchg_{tag}", 0, 1, binary=True)
                series["u_imp"][y, d, t] = prob.add_variable(
                    f"u_imp_{tag}", 0, u_grid_ub, binary=True)
                series["u_exp"][y, d, t] = prob.add_variable(
                    f"u_exp_{tag}", 0, u_grid_ub, binary=True)

    soc_lo = bess.soc_min
    soc_hi = soh * bess.soc_max
    eta_chg = eta_bess

    # Initial energy level window (shared across all days).
    prob.add_constraint([(e_init, 1.0), (s_bess, -soc_lo)], GE, 0.0, "einit_lo")
    prob.add_constraint([(e_init, 1.0), (s_bess, -soc_hi)], LE, 0.0, "einit_hi")

    for y in range(Y):
        eta_pv_y = eta_pv_by_year[y]
        for d in range(D):
            for t in range(T):
                tag = f"{y}_{d}_{t}"
                v = {k: int(series[k][y, d, t]) for k in ModelIndex.SERIES}

                # Hourly power balance: supply = demand + sinks.
                prob.add_constraint(
                    [(v["p_cder"], 1.0), (v["p_dchg"], 1.0),
                     (s_pv, eta_pv_y * pv_cf[y, d, t]),
                     (v["p_ls"], 1.0), (v["p_imp"], 1.0),
                     (v["p_chg"], -1.0), (v["p_curt"], -1.0), (v["p_exp"], -1.0)],
                    EQ, load[y, d, t], f"balance_{tag}")

                # Generator limits against variable installed capacity (big-M form).
                prob.add_constraint([(v["p_cder"], 1.0), (v["u_cder"], -big_m)],
                                    LE, 0.0, f"cder_on_{tag}")
                prob.add_constraint([(v["p_cder"], 1.0), (p_cder_max, -1.0)],
                                    LE, 0.0, f"cder_cap_{tag}")
                prob.add_constraint([(v["p_cder"], 1.0), (v["u_cder"], -big_m)],
                                    GE, cder.p_min - big_m, f"cder_min_{tag}")

                # Curtailment cannot exceed available PV power.
                prob.add_constraint([(v["p_curt"], 1.0),
                                     (s_pv, -eta_pv_y * pv_cf[y, d, t])],
                                    LE, 0.0, f"curt_cap_{tag}")

                # Stored-energy window.
                prob.add_constraint([(v["e_bess"], 1.0), (s_bess, -soc_lo)],
                                    GE, 0.0, f"soc_lo_{tag}")
                prob.add_constraint([(v["e_bess"], 1.0), (s_bess, -soc_hi)],
                                    LE, 0.0, f"soc_hi_{tag}")

                # No simultaneous charge and discharge.
                prob.add_constraint([(v["u_chg"], 1.0), (v["u_dchg"], 1.0)],
                                    LE, 1.0, f"excl_bess_{tag}")

                # Charge/discharge power: big-M on status, rate limit on capacity.
                prob.add_constraint([(v["p_chg"], 1.0), (v["u_chg"], -big_m)],
                                    LE, 0.0, f"chg_on_{tag}")
                prob.add_constraint([(v["p_chg"], 1.0), (s_bess, -1.0 / bess.t_chg)],
                                    LE, 0.0, f"chg_rate_{tag}")
                prob.add_constraint([(v["p_dchg"], 1.0), (v["u_dchg"], -big_m)],
                                    LE, 0.0, f"dchg_on_{tag}")
                prob.add_constraint([(v["p_dchg"], 1.0), (s_bess, -1.0 / bess.t_dchg)],
                                    LE, 0.0, f"dchg_rate_{tag}")

                # Energy tracking; every day restarts from the shared initial level.
                if t == 0:
                    prev = [(e_init, -1.0)]
                else:
                    prev = [(int(series["e_bess"][y, d, t - 1]), -1.0)]
                prob.add_constraint(
                    [(v["e_bess"], 1.0)] + prev
                    + [(v["p_chg"], -eta_chg), (v["p_dchg"], 1.0)],
                    EQ, 0.0, f"etrack_{tag}")

                # Grid limits and exclusivity.
                prob.add_constraint([(v["p_imp"], 1.0), (v["u_imp"], -tie)],
                                    LE, 0.0, f"imp_cap_{tag}")
                prob.add_constraint([(v["p_exp"], 1.0), (v["u_exp"], -tie)],
                                    LE, 0.0, f"exp_cap_{tag}")
                prob.add_constraint([(v["u_imp"], 1.0), (v["u_exp"], 1.0)],
                                    LE, 1.0, f"excl_grid_{tag}")

            if cfg.cyclic_soc:
                prob.add_constraint(
                    [(int(series["e_bess"][y, d, T - 1]), 1.0), (e_init, -1.0)],
                    EQ, 0.0, f"cyclic_{y}_{d}")

    # Objective.
    deg_cost = bess.deg_cost_per_mwh
    obj = []
    if opts.ms == 1:
        obj += [(p_cder_max, cder.capital), (s_pv, pv.capital), (s_bess, bess.capital)]
    obj.append((s_pv, years_for_pv_deg * pv.rep_frac * pv.capital * pv.deg_rate))
    for y in range(Y):
        for d in range(D):
            for t in range(T):
                v = series
                obj.append((int(v["p_cder"][y, d, t]), alpha * cder.op_cost))
                obj.append((int(v["u_cder"][y, d, t]), alpha * cder.no_load))
                obj.append((int(v["p_dchg"][y, d, t]), alpha * deg_cost))
                obj.append((int(v["p_ls"][y, d, t]), alpha * cfg.ls_penalty))
                obj.append((int(v["p_imp"][y, d, t]), alpha * imp_price[d, t]))
                obj.append((int(v["p_exp"][y, d, t]), -alpha * exp_price[d, t]))
    prob.set_objective(obj)

    index = ModelIndex(
        shape=(Y, D, T), series=series,
        scalars={"s_pv": s_pv, "s_bess": s_bess, "p_cder_max": p_cder_max,
                 "e_init": e_init},
        alpha=alpha, years=years_for_pv_deg,
        eta_pv_by_year=np.asarray(eta_pv_by_year, dtype=float),
        import_price=imp_price, export_price=exp_price,
        scenario=scenario, ms=opts.ms)
    return prob, index


def build_integrated(scenario: Scenario, profiles: MultiYearProfiles | None = None,
                     opts: ModelBuildOptions | None = None):
    """Build the full-horizon planning MILP (capital costs included).

    Battery state of health is held at its initial value; PV efficiency is
    precomputed per year from the geometric fade recursion.
    """
    opts = opts or ModelBuildOptions(ms=1)
    opts.validate()
    if opts.ms != 1:
        raise ModelBuildError("build_integrated requires ms=1")
    if profiles is None:
        profiles = scenario.profiles()
    Y = scenario.cfg.planning_years
    if profiles.load.shape[0] != Y:
        raise ModelBuildError(
            f"profiles span {profiles.load.shape[0]} years, horizon is {Y}")
    eta_pv = pv_efficiency_schedule(scenario.pv, Y)
    eta_bess0 = scenario.bess.eta_rt
    return _build(scenario, profiles, opts, eta_pv, eta_bess0,
                  scenario.bess.soh_init, Y, "integrated")


def build_single_year(scenario: Scenario, profiles_y: MultiYearProfiles,
                      overrides: YearOverrides, investment: InvestmentDecision):
    """Build one validation year: fixed sizes, degraded capacity and efficiencies.

    Capital terms are absent from the objective. The degraded capacity
    replaces the rated size throughout; the state-of-health factor in the
    stored-energy window stays at its initial value so capacity fade is
    applied exactly once.
    """
    if profiles_y.load.shape[0] != 1:
        raise ModelBuildError("single-year build expects exactly one year of profiles")
    opts = ModelBuildOptions(ms=0, fixed_investment=investment, year_overrides=overrides)
    opts.validate()
    return _build(scenario, profiles_y, opts,
                  np.asarray([overrides.eta_pv]), overrides.eta_bess,
                  scenario.bess.soh_init, 1, "single_year")


def extract_solution(result: milp.SolveResult, index: ModelIndex) -> DispatchSolution:
    """Read the primal vector into dispatch arrays and the cost breakdown."""
    if not result.has_solution:
        raise ModelBuildError(f"no solution to extract (status {result.status})")
    x = result.primal
    Y, D, T = index.shape
    series = {k: x[index.series[k]].astype(float) for k in ModelIndex.SERIES}
    # Clean tiny solver round-off on the nonnegative power series.
    for k in ("p_cder", "p_chg", "p_dchg", "p_ls", "p_imp", "p_exp", "p_curt"):
        np.clip(series[k], 0.0, None, out=series[k])

    sc = index.scenario
    cfg, cder, pv, bess = sc.cfg, sc.cder, sc.pv, sc.bess
    alpha = index.alpha
    inv = InvestmentDecision(
        s_pv=float(x[index.scalars["s_pv"]]),
        s_bess=float(x[index.scalars["s_bess"]]),
        p_cder_max=float(x[index.scalars["p_cder_max"]]))

    capital = 0.0
    if index.ms == 1:
        capital = (inv.p_cder_max * cder.capital + inv.s_pv * pv.capital
                   + inv.s_bess * bess.capital)
    cder_op = alpha * float(np.sum(series["p_cder"]) * cder.op_cost
                            + np.sum(series["u_cder"]) * cder.no_load)
    pv_deg = index.years * pv.rep_frac * pv.capital * inv.s_pv * pv.deg_rate
    bess_deg = alpha * bess.deg_cost_per_mwh * float(np.sum(series["p_dchg"]))
    shed = alpha * cfg.ls_penalty * float(np.sum(series["p_ls"]))
    imp_cost = alpha * float(np.sum(series["p_imp"] * index.import_price[None]))
    exp_rev = alpha * float(np.sum(series["p_exp"] * index.export_price[None]))
    costs = {"capital": capital, "cder_op": cder_op, "pv_deg": pv_deg,
             "bess_deg": bess_deg, "shed_penalty": shed,
             "import_cost": imp_cost, "export_revenue": exp_rev}

    sol = DispatchSolution(series=series, e_init=float(x[index.scalars["e_init"]]),
                           investment=inv, costs=costs,
                           objective=result.objective, shape=(Y, D, T))
    total = sol.cost_total
    scale = max(1.0, abs(result.objective))
    if abs(total - result.objective) > 1e-6 * scale:
        raise ModelBuildError(
            f"cost breakdown {total} inconsistent with objective {result.objective}")
    return sol
