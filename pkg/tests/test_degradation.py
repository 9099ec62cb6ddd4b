"""Cycle-life weighting, capacity chain, and efficiency regression."""

import numpy as np
import pytest

from dbio.degradation import (BatteryExhaustedError, CycleLifeCurve,
                              DegradationError, DegradationState, DodHistogram,
                              advance_state, bin_midpoint, count_cycles,
                              degradation_factor, degradation_per_cycle,
                              equivalent_full_cycles, fit_efficiency_model,
                              pv_degradation_cost, pv_efficiency)
from dbio.scenario import BessParams, CycleLifeCurveSpec, PvParams

CURVE = CycleLifeCurve.from_spec(CycleLifeCurveSpec())


def test_curve_interpolates_and_clamps():
    assert CURVE.cycle_life(0.10) == 14500.0
    assert CURVE.cycle_life(1.00) == 2000.0
    assert CURVE.cycle_life(0.15) == pytest.approx(13250.0)
    # Queries outside the knot span clamp to the end values.
    assert CURVE.cycle_life(0.01) == 14500.0
    assert CURVE.cycle_life(1.5) == 2000.0


def test_degradation_factor_is_one_at_max_dod():
    assert degradation_factor(CURVE.max_dod, CURVE) == 1.0


def test_degradation_factor_monotone_in_dod():
    dods = np.linspace(0.05, 1.0, 40)
    dfs = [degradation_factor(d, CURVE) for d in dods]
    assert all(a <= b + 1e-15 for a, b in zip(dfs, dfs[1:]))
    assert dfs[0] < dfs[-1]


def test_degradation_factor_rejects_nonpositive_dod():
    with pytest.raises(DegradationError):
        degradation_factor(0.0, CURVE)


def test_efc_linear_in_alpha():
    hist = DodHistogram(bins={0.25: 3.0, 0.80: 1.5})
    base = equivalent_full_cycles(hist, CURVE, alpha=1.0)
    for alpha in (2.0, 52.142857, 365.0):
        scaled = equivalent_full_cycles(hist, CURVE, alpha=alpha)
        assert abs(scaled - alpha * base) <= 1e-12 * abs(scaled)


def test_dpc_arithmetic_identity():
    rng = np.random.default_rng(3)
    for _ in range(10):
        rated = float(rng.uniform(0.1, 50.0))
        eol = float(rng.uniform(0.05, 0.95))
        cl = float(rng.uniform(100.0, 20000.0))
        assert degradation_per_cycle(rated, eol, cl) == (1.0 - eol) * rated / cl


def test_dpc_example_value():
    assert degradation_per_cycle(2.725, 0.8, 2000.0) == pytest.approx(2.725e-4, rel=1e-12)


def test_dpc_input_validation():
    with pytest.raises(DegradationError):
        degradation_per_cycle(0.0, 0.8, 2000.0)
    with pytest.raises(DegradationError):
        degradation_per_cycle(1.0, 1.0, 2000.0)
    with pytest.raises(DegradationError):
        degradation_per_cycle(1.0, 0.8, 0.0)


def test_capacity_chain_conserves_total_loss():
    bess = BessParams()
    pv = PvParams()
    eff = fit_efficiency_model(bess.eff_model_points)
    rng = np.random.default_rng(17)
    rated = 5.0
    state = DegradationState(year=1, capacity=rated, soh=1.0,
                             eta_bess=eff.predict(1.0), eta_pv=1.0)
    total_deg = 0.0
    for _ in range(100):
        hist = DodHistogram(bins={0.25: float(rng.uniform(0, 10)),
                                  0.60: float(rng.uniform(0, 4))})
        state = advance_state(state, hist, CURVE, bess, pv, eff, rated, alpha=1.0)
        total_deg += state.deg
    assert rated - state.capacity == pytest.approx(total_deg, rel=1e-12)
    assert state.soh == pytest.approx(state.capacity / rated * bess.soh_init, rel=1e-12)


def test_two_point_efficiency_fit_is_exact():
    model = fit_efficiency_model(((1.0, 0.90), (0.8, 0.86)))
    assert model.w == pytest.approx(0.2, rel=1e-9)
    assert model.b == pytest.approx(0.70, rel=1e-9)
    assert model.predict(1.0) == pytest.approx(0.90, rel=1e-12)
    assert model.predict(0.8) == pytest.approx(0.86, rel=1e-12)


def test_efficiency_fit_validation():
    with pytest.raises(DegradationError, match="degenerate"):
        fit_efficiency_model(((0.9, 0.8), (0.9, 0.7)))
    with pytest.raises(DegradationError):
        fit_efficiency_model(((0.9, 0.8),))


def test_prediction_clamped_to_unit_interval():
    model = fit_efficiency_model(((1.0, 0.90), (0.8, 0.86)))
    assert model.predict(3.0) == 1.0
    assert model.predict(-100.0) == 1e-9


def test_bin_midpoint_half_up():
    assert bin_midpoint(0.074, 0.05) == pytest.approx(0.05)
    assert bin_midpoint(0.12, 0.05) == pytest.approx(0.10)
    assert bin_midpoint(0.024, 0.05) == 0.0
    # Exact tie rounds up (0.375 / 0.25 is exactly 1.5 in binary floats).
    assert bin_midpoint(0.375, 0.25) == pytest.approx(0.50)


def test_count_cycles_hand_trace():
    hist = count_cycles([1.0, 0.5, 1.0, 0.5, 1.0])
    assert list(hist.bins) == [pytest.approx(0.50)]
    assert hist.total == pytest.approx(2.0)


def test_count_cycles_drops_flat_noise():
    trace = 0.5 + 1e-9 * np.sin(np.arange(50))
    assert count_cycles(np.clip(trace, 0, 1)).bins == {}


def test_count_cycles_validation():
    with pytest.raises(DegradationError):
        count_cycles([0.5])
    with pytest.raises(DegradationError):
        count_cycles([0.5, 1.2])
    with pytest.raises(DegradationError):
        count_cycles([0.5, 0.6], bin_width=0.0)


def test_histogram_merge():
    a = DodHistogram(bins={0.25: 1.0})
    b = DodHistogram(bins={0.25: 0.5, 0.50: 2.0})
    merged = a.merged(b)
    assert merged.bins == {0.25: 1.5, 0.50: 2.0}
    with pytest.raises(DegradationError):
        a.merged(DodHistogram(bins={}, bin_width=0.1))


def test_advance_state_updates_chain():
    bess = BessParams()
    eff = fit_efficiency_model(bess.eff_model_points)
    state = DegradationState(year=1, capacity=2.0, soh=1.0,
                             eta_bess=0.9, eta_pv=1.0)
    hist = DodHistogram(bins={1.0: 10.0})
    out = advance_state(state, hist, CURVE, bess, PvParams(deg_rate=0.005),
                        eff, rated=2.0, alpha=1.0)
    # 10 full-DOD cycles at DF=1; loss = 10 * (1-0.8)*2/2000.
    assert out.efc == pytest.approx(10.0)
    assert out.deg == pytest.approx(10.0 * 0.2 * 2.0 / 2000.0, rel=1e-12)
    assert out.capacity == pytest.approx(2.0 - out.deg, rel=1e-12)
    assert out.eta_pv == pytest.approx(0.995)
    assert out.year == 2
    assert out.eta_bess == pytest.approx(eff.predict(out.soh), rel=1e-12)


def test_advance_state_exhaustion_raises():
    bess = BessParams()
    eff = fit_efficiency_model(bess.eff_model_points)
    state = DegradationState(year=1, capacity=0.001, soh=0.0005,
                             eta_bess=0.9, eta_pv=1.0)
    hist = DodHistogram(bins={1.0: 100.0})
    with pytest.raises(BatteryExhaustedError):
        advance_state(state, hist, CURVE, bess, PvParams(), eff,
                      rated=2.0, alpha=1.0)


def test_pv_efficiency_geometric_fade():
    pv = PvParams(eta_init=1.0, deg_rate=0.01)
    assert pv_efficiency(1, pv) == 1.0
    assert pv_efficiency(10, pv) == pytest.approx(0.99 ** 9, rel=1e-12)
    with pytest.raises(DegradationError):
        pv_efficiency(0, pv)


def test_pv_degradation_cost_arithmetic():
    pv = PvParams(capital=1_450_000.0, rep_frac=0.41, deg_rate=0.005)
    assert pv_degradation_cost(2.0, pv) == pytest.approx(
        0.41 * 1_450_000.0 * 2.0 * 0.005, rel=1e-12)
    with pytest.raises(DegradationError):
        pv_degradation_cost(-1.0, pv)
