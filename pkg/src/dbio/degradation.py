"""Post-optimization degradation math.

PV efficiency fade, rainflow cycle counting of battery state-of-charge
traces, depth-of-discharge weighted equivalent full cycles, per-cycle
capacity loss, the year-over-year capacity / state-of-health chain, and the
linear efficiency-vs-SOH regression.

Depth of discharge is measured relative to rated capacity: traces handed to
:func:`count_cycles` are stored energy divided by rated MWh, so cycle ranges
are DOD fractions directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .rainflow import extract_cycles
from .scenario import BessParams, CycleLifeCurveSpec, PvParams

DEFAULT_BIN_WIDTH = 0.05


class DegradationError(ValueError):
    pass


class BatteryExhaustedError(DegradationError):
    """Capacity would reach zero or below; end-of-life breach must be surfaced."""


@dataclass(frozen=True)
class CycleLifeCurve:
    """Piecewise-linear cycle life vs DOD; queries clamp to the knot range."""

    dods: np.ndarray
    cycles: np.ndarray

    @classmethod
    def from_spec(cls, spec: CycleLifeCurveSpec) -> "CycleLifeCurve":
        spec.validate()
        pts = np.asarray(spec.points, dtype=float)
        return cls(dods=pts[:, 0], cycles=pts[:, 1])

    @property
    def max_dod(self):
        return float(self.dods[-1])

    @property
    def cl_at_max(self):
        return float(self.cycles[-1])

    def cycle_life(self, dod):
        """Interpolated cycle life at a DOD, clamped to the curve's span."""
        return float(np.interp(dod, self.dods, self.cycles))


@dataclass(frozen=True)
class DodHistogram:
    """Cycle counts keyed by DOD bin midpoint; half cycles contribute 0.5."""

    bins: dict
    bin_width: float = DEFAULT_BIN_WIDTH

    @property
    def total(self):
        return sum(self.bins.values())

    def merged(self, other: "DodHistogram") -> "DodHistogram":
        if other.bin_width != self.bin_width:
            raise DegradationError("bin widths differ")
        out = dict(self.bins)
        for k, v in other.bins.items():
            out[k] = out.get(k, 0.0) + v
        return DodHistogram(bins=out, bin_width=self.bin_width)


@dataclass(frozen=True)
class EfficiencyModel:
    """Linear roundtrip-efficiency-vs-SOH model; predictions clamped to (0, 1]."""

    w: float
    b: float

    def predict(self, soh):
        return min(1.0, max(1e-9, self.w * soh + self.b))


@dataclass(frozen=True)
class DegradationState:
    """Battery and PV condition entering a given year."""

    year: int
    capacity: float   # MWh
    soh: float
    eta_bess: float
    eta_pv: float
    efc: float = 0.0  # equivalent full cycles accrued in the prior year
    deg: float = 0.0  # MWh lost in the prior year


def pv_efficiency(year: int, params: PvParams) -> float:
    """PV conversion efficiency in planning year ``year`` (1-based)."""
    if year < 1:
        raise DegradationError("year must be >= 1")
    return params.eta_init * (1.0 - params.deg_rate) ** (year - 1)


def pv_degradation_cost(s_pv: float, params: PvParams) -> float:
    """Annual PV degradation cost: replacement fraction of capital, prorated by fade rate."""
    if s_pv < 0:
        raise DegradationError("s_pv must be >= 0")
    return params.rep_frac * params.capital * s_pv * params.deg_rate


def bin_midpoint(dod_range: float, bin_width: float) -> float:
    """Nearest-bin-center assignment, half-up at ties."""
    return math.floor(dod_range / bin_width + 0.5) * bin_width


def count_cycles(soc_series, bin_width: float = DEFAULT_BIN_WIDTH) -> DodHistogram:
    """Rainflow-count a normalized state-of-charge trace into DOD bins.

    Interior cycles count 1.0, residual half cycles 0.5. Ranges smaller than
    half a bin (solver round-off on a flat trace) fall into the zero bin and
    are dropped.
    """
    soc = np.asarray(soc_series, dtype=float)
    if soc.size < 2:
        raise DegradationError("soc_series needs at least 2 samples")
    if np.any(soc < -1e-9) or np.any(soc > 1 + 1e-9):
        raise DegradationError("soc_series values must be in [0, 1]")
    if bin_width <= 0:
        raise DegradationError("bin_width must be > 0")
    ranges, weights = extract_cycles(np.clip(soc, 0.0, 1.0))
    bins: dict = {}
    for r, w in zip(ranges, weights):
        mid = bin_midpoint(float(r), bin_width)
        if mid <= 0.0:
            continue
        bins[mid] = bins.get(mid, 0.0) + float(w)
    return DodHistogram(bins=bins, bin_width=bin_width)


def degradation_factor(dod: float, curve: CycleLifeCurve) -> float:
    """Cycle-life at max DOD over cycle-life at this DOD (shallow cycles wear less)."""
    if dod <= 0:
        raise DegradationError("dod must be in (0, 1]")
    return curve.cl_at_max / curve.cycle_life(min(dod, 1.0))


def equivalent_full_cycles(hist: DodHistogram, curve: CycleLifeCurve,
                           alpha: float = 1.0) -> float:
    """DOD-weighted cycle count, scaled by the profile repetition factor."""
    return alpha * sum(degradation_factor(dod, curve) * n
                       for dod, n in hist.bins.items())


def degradation_per_cycle(rated: float, eol_frac: float, cycles_at_max_dod: float) -> float:
    """Capacity loss per equivalent full cycle, in MWh."""
    if rated <= 0 or cycles_at_max_dod <= 0:
        raise DegradationError("rated and cycles_at_max_dod must be > 0")
    if not 0 < eol_frac < 1:
        raise DegradationError("eol_frac must be in (0, 1)")
    return (1.0 - eol_frac) * rated / cycles_at_max_dod


def fit_efficiency_model(points) -> EfficiencyModel:
    """Least-squares line through (SOH, efficiency) samples.

    With exactly two distinct points the fit passes through both.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise DegradationError("need at least 2 (soh, efficiency) points")
    soh, eta = pts[:, 0], pts[:, 1]
    if np.ptp(soh) == 0:
        raise DegradationError("degenerate fit: all SOH values equal")
    w, b = np.polyfit(soh, eta, 1)
    return EfficiencyModel(w=float(w), b=float(b))


def advance_state(prev: DegradationState, hist: DodHistogram, curve: CycleLifeCurve,
                  bess: BessParams, pv: PvParams, eff_model: EfficiencyModel,
                  rated: float, alpha: float = 1.0) -> DegradationState:
    """Apply one year of cycling wear and PV fade to the condition chain.

    ``rated`` is the as-built battery capacity in MWh; capacity loss is
    equivalent full cycles times the per-cycle loss. Raises
    :class:`BatteryExhaustedError` instead of clamping when the chain would
    hit zero.
    """
    if prev.capacity <= 0:
        raise DegradationError("prev.capacity must be > 0")
    efc = equivalent_full_cycles(hist, curve, alpha)
    dpc = degradation_per_cycle(rated, bess.eol_frac, curve.cl_at_max) if rated > 0 else 0.0
    deg = efc * dpc
    capacity = prev.capacity - deg
    if capacity <= 0:
        raise BatteryExhaustedError(
            f"year {prev.year}: degradation {deg:.6g} MWh exhausts remaining "
            f"capacity {prev.capacity:.6g} MWh")
    soh = capacity / rated * bess.soh_init if rated > 0 else prev.soh
    return DegradationState(
        year=prev.year + 1,
        capacity=capacity,
        soh=soh,
        eta_bess=eff_model.predict(soh),
        eta_pv=prev.eta_pv * (1.0 - pv.deg_rate),
        efc=efc,
        deg=deg)
