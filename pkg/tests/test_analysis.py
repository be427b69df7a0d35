"""Tests for resonance finding, coupling optimization, spectrum fitting, and
the generic sweep engine."""
import numpy as np
import pytest
from dataclasses import replace

from splitring import (MeasuredSpectrum, Objective, Ordering, Placement,
                       RingParams, find_resonances, fit_spectrum,
                       free_spectral_range, optimize_coupling,
                       resonance_wavelength, sweep_engine)
from splitring.analysis import _objective_value, _splitting_of
from splitring.errors import InvalidParamError, NoResonanceFoundError
from splitring.herald import herald_arrays, rate_vs_efficiency_curve
from splitring.response import BusInput, default_lambda_grid, sweep_arrays
from splitring.tableio import Table

SPLIT_DIP = dict(t=0.96, alpha=0.98, xi=0.99, zeta=np.pi / 10)


def fsr_window(p):
    c = resonance_wavelength(p)
    half = 0.5 * free_spectral_range(c, p)
    return (c - half, c + half)


def deepest(groups):
    return min(groups, key=lambda g: min(g.depth_fwd))


def test_objective_enum_wire_values():
    assert [o.value for o in Objective] == ["HeraldRate", "HeraldMode",
                                            "Efficiency"]


def test_single_dip_without_backscatter():
    p = RingParams(t=0.96, alpha=0.98, xi=1.0)
    res = deepest(find_resonances(p, fsr_window(p)))
    assert len(res.minima_lambdas) == 1
    assert res.splitting == 0.0
    assert res.asymmetry is None
    assert abs(res.center_lambda - resonance_wavelength(p)) < 1e-12


def test_split_dip_minima_stable_under_grid_doubling():
    p = RingParams(**SPLIT_DIP, placement=Placement.IN_COUPLER)
    win = fsr_window(p)
    coarse = deepest(find_resonances(p, win, points=2001))
    fine = deepest(find_resonances(p, win, points=4001))
    assert len(coarse.minima_lambdas) == len(fine.minima_lambdas) == 2
    for a, b in zip(coarse.minima_lambdas, fine.minima_lambdas):
        assert abs(a - b) < 1e-12


def test_in_ring_split_is_symmetric_in_coupler_is_not():
    p_ring = RingParams(**SPLIT_DIP, placement=Placement.IN_RING)
    res_ring = deepest(find_resonances(p_ring, fsr_window(p_ring)))
    assert res_ring.asymmetry is not None and res_ring.asymmetry < 1e-6

    p_cpl = RingParams(**SPLIT_DIP, placement=Placement.IN_COUPLER)
    res_cpl = deepest(find_resonances(p_cpl, fsr_window(p_cpl)))
    assert res_cpl.asymmetry is not None and res_cpl.asymmetry > 0.01


def test_in_ring_splitting_ignores_backscatter_phase():
    p1 = RingParams(**SPLIT_DIP, placement=Placement.IN_RING)
    p2 = replace(p1, zeta=0.0)
    s1 = deepest(find_resonances(p1, fsr_window(p1))).splitting
    s2 = deepest(find_resonances(p2, fsr_window(p2))).splitting
    assert s1 == pytest.approx(s2, abs=1e-13)
    assert s1 > 1e-10


def test_find_resonances_rejects_flat_and_bad_windows():
    flat = RingParams(t=1.0, alpha=0.98, xi=0.99)
    with pytest.raises(NoResonanceFoundError):
        find_resonances(flat, fsr_window(flat))
    p = RingParams(**SPLIT_DIP)
    with pytest.raises(InvalidParamError):
        find_resonances(p, (1.55e-6, 1.54e-6))
    with pytest.raises(InvalidParamError):
        find_resonances(p, fsr_window(p), points=8)


def test_optimize_flat_objective_returns_low_end():
    # a lossless, backscatter-free ring heralds perfectly at any coupling, so
    # the efficiency objective is flat and the tie-break picks the low end
    p = RingParams(t=0.9, alpha=1.0, xi=1.0)
    t_star, value = optimize_coupling(p, Objective.EFFICIENCY, (0.5, 0.9),
                                      coarse_points=21)
    assert t_star == 0.5
    assert value == pytest.approx(1.0, abs=1e-9)


def test_optimize_matches_dense_scan():
    p = RingParams(t=0.9, alpha=0.98, xi=1.0)
    t_star, v_star = optimize_coupling(p, Objective.HERALD_RATE, (0.93, 0.99),
                                       coarse_points=31)
    assert t_star < p.alpha  # optimal coupling stays below critical
    dense = np.linspace(0.93, 0.99, 61)
    vals = [_objective_value(replace(p, t=float(t)), Objective.HERALD_RATE,
                             Ordering.MID_RING, None, BusInput())
            for t in dense]
    k = int(np.argmax(vals))
    assert v_star >= vals[k] - 1e-9 * abs(vals[k])
    assert abs(t_star - dense[k]) <= dense[1] - dense[0]


def test_optimize_validates_inputs():
    p = RingParams(t=0.9, alpha=0.98, xi=0.99)
    with pytest.raises(InvalidParamError):
        optimize_coupling(p, Objective.HERALD_RATE, (0.9, 0.5))
    with pytest.raises(InvalidParamError):
        optimize_coupling(p, Objective.HERALD_RATE, (0.5, 1.2))
    with pytest.raises(InvalidParamError):
        optimize_coupling(p, "HeraldRate", (0.5, 0.9))


def test_optimize_propagates_total_failure():
    p = RingParams(t=0.9, alpha=0.98, xi=0.99)
    with pytest.raises(ZeroDivisionError):
        optimize_coupling(p, Objective.HERALD_RATE, (0.5, 0.9),
                          bus=BusInput(0.0, 0.0), coarse_points=5)


def synthetic_spectrum(params, points=151):
    grid = default_lambda_grid(params, points)
    t_fwd = sweep_arrays(params, grid)["T_fwd"]
    return MeasuredSpectrum(lambdas=grid, powers=t_fwd / t_fwd.max())


def test_fit_recovers_two_free_parameters():
    truth = RingParams(**SPLIT_DIP, placement=Placement.IN_COUPLER)
    data = synthetic_spectrum(truth)
    initial = replace(truth, t=0.95, xi=0.985)
    result = fit_spectrum(data, initial, free=("t", "xi"))
    assert result.converged
    assert result.params.t == pytest.approx(truth.t, rel=1e-5)
    assert result.params.xi == pytest.approx(truth.xi, rel=1e-5)
    assert result.params.alpha == truth.alpha  # fixed parameters untouched
    assert result.residual < 1e-7


def test_fit_validates_inputs():
    truth = RingParams(**SPLIT_DIP)
    data = synthetic_spectrum(truth)
    with pytest.raises(InvalidParamError):
        fit_spectrum(data, truth, free=("t", "radius"))
    with pytest.raises(InvalidParamError):
        fit_spectrum(data, truth, free=())
    short = MeasuredSpectrum(data.lambdas[:20], data.powers[:20])
    with pytest.raises(InvalidParamError):
        fit_spectrum(short, truth, free=("t",))


def test_fit_flat_spectrum_raises():
    lam = np.linspace(1.548e-6, 1.55e-6, 100)
    flat = MeasuredSpectrum(lam, np.ones_like(lam))
    with pytest.raises(NoResonanceFoundError):
        fit_spectrum(flat, RingParams(**SPLIT_DIP), free=("t",))


def test_measured_spectrum_validation():
    lam = np.linspace(1.0e-6, 2.0e-6, 5)
    MeasuredSpectrum(lam, np.ones(5))
    with pytest.raises(InvalidParamError):
        MeasuredSpectrum(lam[::-1], np.ones(5))
    with pytest.raises(InvalidParamError):
        MeasuredSpectrum(lam, np.ones(4))
    with pytest.raises(InvalidParamError):
        MeasuredSpectrum(lam, np.array([1, 2, np.nan, 4, 5], dtype=float))
    with pytest.raises(InvalidParamError):
        MeasuredSpectrum(np.empty(0), np.empty(0))


def test_measured_spectrum_from_csv(tmp_path):
    lam = np.linspace(1.548e-6, 1.55e-6, 60)
    Table(columns=["lambda_m", "power"],
          rows=np.column_stack([lam, np.linspace(1, 0.5, 60)])).write_csv(
        tmp_path / "s.csv")
    spec = MeasuredSpectrum.from_csv(tmp_path / "s.csv")
    assert spec.lambdas.shape == (60,)
    Table(columns=["lambda_m", "transmission"],
          rows=np.column_stack([lam, lam])).write_csv(tmp_path / "bad.csv")
    with pytest.raises(InvalidParamError):
        MeasuredSpectrum.from_csv(tmp_path / "bad.csv")


def test_sweep_engine_lambda_axis_matches_direct_arrays():
    p = RingParams(**SPLIT_DIP, placement=Placement.IN_COUPLER)
    grid = default_lambda_grid(p, 64)
    table = sweep_engine(p, "lambda", grid, ("transmission", "eta"))
    assert table.columns == ["lambda_m", "transmission", "eta"]
    direct_t = sweep_arrays(p, grid)["T_fwd"]
    direct_eta = herald_arrays(p, grid)["eta"]
    assert np.array_equal(table.column("transmission"), direct_t)
    assert np.array_equal(table.column("eta"), direct_eta)


def test_sweep_engine_t_axis_matches_rate_curve():
    p = RingParams(t=0.9, alpha=0.98, xi=0.99)
    grid = [0.92, 0.95, 0.97]
    table = sweep_engine(p, "t", grid,
                         ("eta", "j_herald_reduced", "j_hm_reduced", "m_param"))
    curve = rate_vs_efficiency_curve(p, grid)
    assert table.columns == curve.columns
    assert np.array_equal(table.rows, curve.rows)


def test_sweep_engine_metric_free_gives_grid_only():
    p = RingParams(**SPLIT_DIP)
    table = sweep_engine(p, "xi", [0.9, 0.95], ())
    assert table.columns == ["xi"]
    assert np.array_equal(table.rows, np.array([[0.9], [0.95]]))


def test_sweep_engine_validates_axis_and_metrics():
    p = RingParams(**SPLIT_DIP)
    with pytest.raises(InvalidParamError):
        sweep_engine(p, "radius", [1.0], ("eta",))
    with pytest.raises(InvalidParamError):
        sweep_engine(p, "t", [0.9], ("brightness",))
    with pytest.raises(InvalidParamError):
        sweep_engine(p, "t", [0.9], ("eta", "eta"))
    with pytest.raises(InvalidParamError):
        sweep_engine(p, "t", [], ("eta",))
    with pytest.raises(InvalidParamError):
        sweep_engine(p, "lambda", [1.55e-6], ("splitting",))


def test_sweep_engine_marks_failing_rows():
    p = RingParams(**SPLIT_DIP)
    table = sweep_engine(p, "t", [0.9, 1.0], ("eta",))
    assert np.isfinite(table.column("eta")[0])
    assert np.isnan(table.column("eta")[1])
    assert table.comments


def test_splitting_shrinks_as_backscatter_weakens():
    p = RingParams(t=0.96, alpha=0.98, xi=0.9)
    xis = [0.9, 0.95, 0.99, 1.0]
    values = [_splitting_of(replace(p, xi=x), Ordering.MID_RING, BusInput())
              for x in xis]
    assert values[-1] == 0.0
    assert all(a >= b - 1e-15 for a, b in zip(values, values[1:]))
    assert values[0] > values[-2] > 0
