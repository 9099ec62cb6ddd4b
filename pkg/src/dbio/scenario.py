"""Scenario configuration, time-series ingestion, and multi-year profile generation.

A scenario is a JSON document describing the planning horizon, technology
parameters, grid tariff, and references to hourly load / PV capacity-factor
CSV files. Loaded scenarios are immutable value objects; profile generation
replicates the base year with a compounding load growth rate.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

HOURS_PER_YEAR = 8760
DAYS_PER_YEAR = 365


class ScenarioError(ValueError):
    """Raised when a scenario document fails parsing or validation.

    Carries the offending field path in the message (e.g. "bess.soc_min").
    """


def _require(cond, field_path, message):
    if not cond:
        raise ScenarioError(f"{field_path}: {message}")


@dataclass(frozen=True)
class SolveOptionsConfig:
    """Solver knobs carried in the scenario document."""

    mip_gap: float = 0.0
    time_limit: float = 3600.0
    threads: int = 0  # 0 = backend default

    def validate(self):
        _require(self.mip_gap >= 0, "solver.mip_gap", "must be >= 0")
        _require(self.time_limit > 0, "solver.time_limit", "must be > 0")


@dataclass(frozen=True)
class ScenarioConfig:
    """Horizon and system-level settings."""

    planning_years: int = 25
    rep_days: int = DAYS_PER_YEAR
    hours_per_day: int = 24
    alpha: float = 1.0          # profile repetitions per year (365/rep_days)
    load_growth: float = 0.005  # fraction per year
    ls_penalty: float = 1e6     # $/MWh, must dominate all marginal supply costs
    tie_limit: float = 0.0      # MW; 0 = islanded
    big_m: float = 10.0         # MW, linearization constant
    cyclic_soc: bool = True     # end-of-day stored energy returns to initial level
    solver: SolveOptionsConfig = field(default_factory=SolveOptionsConfig)

    def validate(self):
        _require(self.planning_years >= 1, "horizon.planning_years", "must be >= 1")
        _require(1 <= self.rep_days <= DAYS_PER_YEAR, "horizon.rep_days", "must be in [1, 365]")
        _require(self.hours_per_day == 24, "horizon.hours_per_day", "must be 24")
        _require(self.alpha > 0, "horizon.alpha", "must be > 0")
        _require(self.big_m > 0, "horizon.big_m", "must be > 0")
        _require(self.tie_limit >= 0, "horizon.tie_limit", "must be >= 0")
        _require(self.ls_penalty >= 0, "horizon.ls_penalty", "must be >= 0")
        self.solver.validate()

    @property
    def steps_per_year(self):
        return self.rep_days * self.hours_per_day


@dataclass(frozen=True)
class CderParams:
    """Controllable DER (e.g. gas turbine) cost and output characteristics."""

    capital: float = 1_150_000.0  # $/MW
    op_cost: float = 44.75        # $/MWh
    no_load: float = 0.0          # $/h while committed
    p_min: float = 0.0            # MW minimum output when committed
    max_size: float = math.inf    # MW cap on installed capacity

    def validate(self):
        for name in ("capital", "op_cost", "no_load", "p_min"):
            _require(getattr(self, name) >= 0, f"cder.{name}", "must be >= 0")
        _require(self.max_size > 0, "cder.max_size", "must be > 0")


@dataclass(frozen=True)
class PvParams:
    """PV cost and efficiency-fade characteristics."""

    capital: float = 1_450_000.0  # $/MW
    rep_frac: float = 0.41        # replacement cost as fraction of capital
    deg_rate: float = 0.005       # efficiency decline per year
    eta_init: float = 1.0         # initial conversion efficiency

    def validate(self):
        _require(self.capital >= 0, "pv.capital", "must be >= 0")
        _require(0 <= self.rep_frac <= 1, "pv.rep_frac", "must be in [0, 1]")
        _require(0 <= self.deg_rate < 1, "pv.deg_rate", "must be in [0, 1)")
        _require(0 < self.eta_init <= 1, "pv.eta_init", "must be in (0, 1]")


@dataclass(frozen=True)
class CycleLifeCurveSpec:
    """Piecewise-linear cycle life vs depth of discharge, as (dod, cycles) knots."""

    points: tuple = (
        (0.10, 14_500.0),
        (0.20, 12_000.0),
        (0.90, 2_200.0),
        (1.00, 2_000.0),
    )

    def validate(self):
        _require(len(self.points) >= 2, "bess.cycle_life_curve", "needs >= 2 points")
        dods = [p[0] for p in self.points]
        cycles = [p[1] for p in self.points]
        _require(all(0 < d <= 1 for d in dods), "bess.cycle_life_curve", "DOD must be in (0, 1]")
        _require(all(d1 < d2 for d1, d2 in zip(dods, dods[1:])),
                 "bess.cycle_life_curve", "DOD values must be strictly increasing")
        _require(all(c1 > c2 for c1, c2 in zip(cycles, cycles[1:])),
                 "bess.cycle_life_curve", "cycle counts must be strictly decreasing")
        _require(all(c > 0 for c in cycles), "bess.cycle_life_curve", "cycle counts must be > 0")

    @property
    def max_dod(self):
        return self.points[-1][0]

    @property
    def cl_at_max(self):
        return self.points[-1][1]


@dataclass(frozen=True)
class BessParams:
    """Battery storage cost, operating window, and degradation characteristics."""

    capital: float = 469_000.0  # $/MWh
    rep_frac: float = 0.79      # replacement cost as fraction of capital
    eta_rt: float = 0.90        # roundtrip efficiency (applied on charge)
    t_chg: float = 1.0          # hours to full charge at rated power
    t_dchg: float = 1.0         # hours to full discharge at rated power
    soc_min: float = 0.1
    soc_max: float = 0.9
    soh_init: float = 1.0
    eol_frac: float = 0.8       # capacity fraction considered end-of-life
    deg_cost_cycle_life: float = 3600.0  # reference cycle life for the $/MWh throughput cost
    cycle_life_curve: CycleLifeCurveSpec = field(default_factory=CycleLifeCurveSpec)
    # (SOH, roundtrip efficiency) samples for the linear efficiency-vs-SOH fit
    eff_model_points: tuple = ((1.0, 0.90), (0.8, 0.86))

    def validate(self):
        _require(self.capital >= 0, "bess.capital", "must be >= 0")
        _require(0 <= self.rep_frac <= 1, "bess.rep_frac", "must be in [0, 1]")
        _require(0 < self.eta_rt <= 1, "bess.eta_rt", "must be in (0, 1]")
        _require(self.t_chg > 0, "bess.t_chg", "must be > 0")
        _require(self.t_dchg > 0, "bess.t_dchg", "must be > 0")
        _require(0 <= self.soc_min < self.soc_max <= 1, "bess.soc_min",
                 "need 0 <= soc_min < soc_max <= 1")
        _require(0 < self.eol_frac < 1, "bess.eol_frac", "must be in (0, 1)")
        _require(self.eol_frac < self.soh_init <= 1, "bess.soh_init",
                 "must be in (eol_frac, 1]")
        _require(self.deg_cost_cycle_life > 0, "bess.deg_cost_cycle_life", "must be > 0")
        self.cycle_life_curve.validate()
        _require(len(self.eff_model_points) >= 2, "bess.eff_model_points", "needs >= 2 points")

    @property
    def deg_cost_per_mwh(self):
        """Throughput degradation cost factor: capital * rep_frac / reference cycle life."""
        return self.capital * self.rep_frac / self.deg_cost_cycle_life


TARIFF_MODES = ("fixed", "tou", "wholesale")


@dataclass(frozen=True)
class TariffSchedule:
    """Hourly grid import price and export valuation factor.

    ``import_price`` is a (rep_days, 24) array in $/MWh; the export price is
    ``export_factor`` times the import price at the same hour.
    """

    mode: str
    import_price: np.ndarray
    export_factor: float = 0.8

    def validate(self):
        _require(self.mode in TARIFF_MODES, "tariff.mode", f"must be one of {TARIFF_MODES}")
        _require(0 <= self.export_factor <= 1, "tariff.export_factor", "must be in [0, 1]")
        _require(np.all(self.import_price >= 0), "tariff.import_price", "must be >= 0 everywhere")

    @property
    def export_price(self):
        return self.export_factor * self.import_price


@dataclass(frozen=True)
class MultiYearProfiles:
    """Per-(year, day, hour) load (MW) and PV capacity factor arrays."""

    load: np.ndarray   # (Y, D, T)
    pv_cf: np.ndarray  # (Y, D, T)

    def validate(self):
        _require(self.load.shape == self.pv_cf.shape, "profiles", "shape mismatch")
        _require(np.all(self.load >= 0), "profiles.load", "must be >= 0")
        _require(np.all((self.pv_cf >= 0) & (self.pv_cf <= 1)),
                 "profiles.pv_cf", "must be in [0, 1]")


@dataclass(frozen=True)
class Scenario:
    """Fully loaded scenario: configuration, parameters, tariff, and base profiles."""

    cfg: ScenarioConfig
    cder: CderParams
    pv: PvParams
    bess: BessParams
    tariff: TariffSchedule
    base_load: np.ndarray   # (D, T) MW
    base_pv_cf: np.ndarray  # (D, T)

    def profiles(self) -> MultiYearProfiles:
        return generate_multi_year(self.base_load.ravel(), self.base_pv_cf.ravel(), self.cfg)


def representative_day_indices(n_days: int, rep_days: int) -> np.ndarray:
    """Deterministic uniform-stride day selection: floor((k + 0.5) * n / D)."""
    k = np.arange(rep_days)
    return np.floor((k + 0.5) * n_days / rep_days).astype(int)


def reduce_to_representative_days(series, rep_days: int) -> np.ndarray:
    """Downsample an 8760-hour series to ``rep_days`` whole days.

    Days are picked at a uniform stride over the year, preserving each
    selected day's hourly ordering. rep_days = 365 is the identity.
    """
    series = np.asarray(series, dtype=float)
    if series.size != HOURS_PER_YEAR:
        raise ScenarioError(f"series length {series.size} != {HOURS_PER_YEAR}")
    if not 1 <= rep_days <= DAYS_PER_YEAR:
        raise ScenarioError(f"rep_days {rep_days} out of [1, 365]")
    days = series.reshape(DAYS_PER_YEAR, 24)
    return days[representative_day_indices(DAYS_PER_YEAR, rep_days)].ravel()


def generate_multi_year(base_load, base_cf, cfg: ScenarioConfig) -> MultiYearProfiles:
    """Replicate base-year profiles across the horizon with compounding load growth.

    PV capacity factors are held constant across years; PV aging is applied
    through the yearly efficiency parameter, not the capacity factor.
    """
    base_load = np.asarray(base_load, dtype=float)
    base_cf = np.asarray(base_cf, dtype=float)
    n = cfg.steps_per_year
    for name, arr in (("load", base_load), ("pv_cf", base_cf)):
        if arr.size == HOURS_PER_YEAR and n != HOURS_PER_YEAR:
            arr = reduce_to_representative_days(arr, cfg.rep_days)
        if arr.size != n:
            raise ScenarioError(f"profiles.{name}: length {arr.size}, expected {n}")
        if name == "load":
            base_load = arr
        else:
            base_cf = arr
    shape = (cfg.planning_years, cfg.rep_days, cfg.hours_per_day)
    growth = (1.0 + cfg.load_growth) ** np.arange(cfg.planning_years)
    load = growth[:, None, None] * base_load.reshape(1, cfg.rep_days, cfg.hours_per_day)
    pv_cf = np.broadcast_to(base_cf.reshape(1, cfg.rep_days, cfg.hours_per_day), shape).copy()
    out = MultiYearProfiles(load=load, pv_cf=pv_cf)
    out.validate()
    return out


def _read_series_csv(path: Path, expected_lengths) -> np.ndarray:
    """Read an ``hour,value`` CSV and check its row count."""
    if not path.exists():
        raise ScenarioError(f"profiles: file not found: {path}")
    values = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2:
            raise ScenarioError(f"{path}: expected a two-column 'hour,value' header")
        for row in reader:
            if not row:
                continue
            try:
                values.append(float(row[1]))
            except (IndexError, ValueError) as exc:
                raise ScenarioError(f"{path}: bad row {row!r}") from exc
    arr = np.asarray(values, dtype=float)
    if arr.size not in expected_lengths:
        raise ScenarioError(
            f"{path}: {arr.size} rows, expected one of {sorted(expected_lengths)}")
    return arr


def _build(cls, doc, path_prefix, field_paths=None):
    """Construct a dataclass from a dict, rejecting unknown keys."""
    known = {f for f in cls.__dataclass_fields__}
    unknown = set(doc) - known
    if unknown:
        raise ScenarioError(f"{path_prefix}: unknown field(s) {sorted(unknown)}")
    return cls(**doc)


def load_scenario(config_path) -> Scenario:
    """Load and validate a scenario JSON document and its referenced CSV files.

    Relative file references are resolved against the config's directory.
    Missing optional fields take the documented defaults.
    """
    config_path = Path(config_path)
    if not config_path.exists():
        raise ScenarioError(f"scenario file not found: {config_path}")
    try:
        doc = json.loads(config_path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{config_path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    base = config_path.parent

    horizon = dict(doc.get("horizon", {}))
    solver = SolveOptionsConfig(**doc.get("solver", {}))
    rep_days = int(horizon.get("rep_days", DAYS_PER_YEAR))
    if "alpha" not in horizon:
        horizon["alpha"] = DAYS_PER_YEAR / rep_days
    cfg = _build(ScenarioConfig, {**horizon, "solver": solver}, "horizon")
    cfg.validate()

    cder_doc = dict(doc.get("cder", {}))
    if cder_doc.get("max_size") is None:
        cder_doc.pop("max_size", None)
    cder = _build(CderParams, cder_doc, "cder")
    cder.validate()
    pv = _build(PvParams, doc.get("pv", {}), "pv")
    pv.validate()

    bess_doc = dict(doc.get("bess", {}))
    if "cycle_life_curve" in bess_doc:
        bess_doc["cycle_life_curve"] = CycleLifeCurveSpec(
            points=tuple((float(d), float(c)) for d, c in bess_doc["cycle_life_curve"]))
    if "eff_model_points" in bess_doc:
        bess_doc["eff_model_points"] = tuple(
            (float(s), float(e)) for s, e in bess_doc["eff_model_points"])
    bess = _build(BessParams, bess_doc, "bess")
    bess.validate()

    tariff = _load_tariff(doc.get("tariff", {}), cfg, base)
    tariff.validate()

    prof = doc.get("profiles", {})
    for key in ("load_file", "pv_cf_file"):
        if key not in prof:
            raise ScenarioError(f"profiles.{key}: required")
    lengths = {cfg.steps_per_year, HOURS_PER_YEAR}
    base_load = _read_series_csv(base / prof["load_file"], lengths)
    base_cf = _read_series_csv(base / prof["pv_cf_file"], lengths)
    if base_load.size == HOURS_PER_YEAR and cfg.steps_per_year != HOURS_PER_YEAR:
        base_load = reduce_to_representative_days(base_load, cfg.rep_days)
    if base_cf.size == HOURS_PER_YEAR and cfg.steps_per_year != HOURS_PER_YEAR:
        base_cf = reduce_to_representative_days(base_cf, cfg.rep_days)
    if np.any(base_load < 0):
        raise ScenarioError("profiles.load_file: negative load values")
    if np.any((base_cf < 0) | (base_cf > 1)):
        raise ScenarioError("profiles.pv_cf_file: capacity factors must be in [0, 1]")

    shape = (cfg.rep_days, cfg.hours_per_day)
    return Scenario(cfg=cfg, cder=cder, pv=pv, bess=bess, tariff=tariff,
                    base_load=base_load.reshape(shape), base_pv_cf=base_cf.reshape(shape))


def _load_tariff(doc, cfg: ScenarioConfig, base: Path) -> TariffSchedule:
    mode = doc.get("mode", "fixed")
    export_factor = float(doc.get("export_factor", 0.8))
    shape = (cfg.rep_days, cfg.hours_per_day)
    if mode == "fixed":
        price = float(doc.get("import_price", 0.0))
        import_price = np.full(shape, price)
    elif mode in ("tou", "wholesale"):
        if "price_file" not in doc:
            raise ScenarioError(f"tariff.price_file: required for mode '{mode}'")
        series = _read_series_csv(base / doc["price_file"],
                                  {cfg.steps_per_year, HOURS_PER_YEAR})
        if series.size == HOURS_PER_YEAR and cfg.steps_per_year != HOURS_PER_YEAR:
            series = reduce_to_representative_days(series, cfg.rep_days)
        import_price = series.reshape(shape)
    else:
        raise ScenarioError(f"tariff.mode: unknown mode '{mode}'")
    return TariffSchedule(mode=mode, import_price=import_price, export_factor=export_factor)


def scenario_to_dict(sc: Scenario) -> dict:
    """Serialize a loaded scenario back to a JSON-compatible dict.

    Profile and tariff series are embedded inline so the round trip is
    self-contained (no external file references).
    """
    horizon = asdict(sc.cfg)
    solver = horizon.pop("solver")
    return {
        "horizon": horizon,
        "solver": solver,
        "cder": {**asdict(sc.cder),
                 "max_size": None if math.isinf(sc.cder.max_size) else sc.cder.max_size},
        "pv": asdict(sc.pv),
        "bess": {**asdict(sc.bess),
                 "cycle_life_curve": [list(p) for p in sc.bess.cycle_life_curve.points],
                 "eff_model_points": [list(p) for p in sc.bess.eff_model_points]},
        "tariff": {"mode": sc.tariff.mode,
                   "export_factor": sc.tariff.export_factor,
                   "import_price_series": sc.tariff.import_price.ravel().tolist()},
        "profiles": {"load_series": sc.base_load.ravel().tolist(),
                     "pv_cf_series": sc.base_pv_cf.ravel().tolist()},
    }


def scenario_from_dict(doc: dict) -> Scenario:
    """Inverse of :func:`scenario_to_dict`."""
    horizon = dict(doc["horizon"])
    solver = SolveOptionsConfig(**doc.get("solver", {}))
    cfg = ScenarioConfig(**{**horizon, "solver": solver})
    cfg.validate()
    cder_doc = dict(doc["cder"])
    if cder_doc.get("max_size") is None:
        cder_doc["max_size"] = math.inf
    cder = CderParams(**cder_doc)
    cder.validate()
    pv = PvParams(**doc["pv"])
    pv.validate()
    bess_doc = dict(doc["bess"])
    bess_doc["cycle_life_curve"] = CycleLifeCurveSpec(
        points=tuple((float(d), float(c)) for d, c in bess_doc["cycle_life_curve"]))
    bess_doc["eff_model_points"] = tuple(
        (float(s), float(e)) for s, e in bess_doc["eff_model_points"])
    bess = BessParams(**bess_doc)
    bess.validate()
    shape = (cfg.rep_days, cfg.hours_per_day)
    tariff = TariffSchedule(
        mode=doc["tariff"]["mode"],
        import_price=np.asarray(doc["tariff"]["import_price_series"], float).reshape(shape),
        export_factor=doc["tariff"]["export_factor"])
    tariff.validate()
    return Scenario(
        cfg=cfg, cder=cder, pv=pv, bess=bess, tariff=tariff,
        base_load=np.asarray(doc["profiles"]["load_series"], float).reshape(shape),
        base_pv_cf=np.asarray(doc["profiles"]["pv_cf_series"], float).reshape(shape))
