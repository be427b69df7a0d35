"""Tests for ring parameters, sub-process matrices, and composition."""
import numpy as np
import pytest
from dataclasses import replace

from splitring import (Ordering, Placement, ProcessKind, RingParams,
                       build_process, compose_total, free_spectral_range,
                       resonance_wavelength, round_trip_phase,
                       solve_steady_state)
from splitring.errors import InvalidParamError
from splitring.linalg import principal_sqrt_unitary
from splitring.response import default_lambda_grid, sweep_arrays

SPLIT_DIP = dict(t=0.96, alpha=0.98, xi=0.99)


def draw_params(rng, placement):
    return RingParams(
        t=rng.uniform(0.0, 1.0), phi=rng.uniform(-np.pi, np.pi),
        alpha=rng.uniform(0.0, 1.0), xi=rng.uniform(0.0, 1.0),
        zeta=rng.uniform(-np.pi, np.pi), placement=placement,
    )


def draw_lambda(rng, params):
    k = 4 * np.pi**2 * params.n_e * params.r
    return k / (2 * np.pi * 146 + rng.uniform(-np.pi, np.pi))


@pytest.mark.parametrize("field,value", [
    ("t", 1.2), ("t", -0.1), ("alpha", 1.0001), ("xi", -1e-9),
    ("n_e", 0.0), ("r", -1e-6),
])
def test_params_validation(field, value):
    with pytest.raises(InvalidParamError):
        RingParams(**{"t": 0.9, field: value})


def test_params_accept_boundaries():
    RingParams(t=0.0, alpha=1.0, xi=1.0, zeta=np.pi)
    RingParams(t=1.0, alpha=0.0, xi=0.0)


def test_round_trip_phase_formula():
    p = RingParams(t=0.9, tau=0.25)
    lam = 1.55e-6
    expected = 4 * np.pi**2 * p.n_e * p.r / lam + 0.25
    assert round_trip_phase(lam, p) == pytest.approx(expected, rel=1e-15)


def test_resonance_wavelength_sits_on_integer_cycle():
    p = RingParams(t=0.9, tau=0.1)
    lam0 = resonance_wavelength(p)
    cycles = (round_trip_phase(lam0, p)) / (2 * np.pi)
    assert abs(cycles - round(cycles)) < 1e-9
    assert abs(lam0 - 1.55e-6) < free_spectral_range(lam0, p)


def test_free_spectral_range_scale():
    p = RingParams(t=0.9)
    lam = 1.549e-6
    assert free_spectral_range(lam, p) == pytest.approx(
        lam**2 / (2 * np.pi * p.n_e * p.r), rel=1e-12)
    assert 1.0e-8 < free_spectral_range(lam, p) < 1.1e-8


def test_build_process_blocks_touch_expected_modes():
    p = RingParams(t=0.8, phi=0.2, alpha=0.95, xi=0.9, zeta=0.4)
    theta = 1.3
    eye = np.eye(6)

    cpl = build_process(ProcessKind.COUPLER, p, theta)
    assert np.allclose(cpl[4:6, :], eye[4:6, :])      # loss pair untouched
    assert cpl[2, 0] != 0                              # bus <-> ring mixing

    loss = build_process(ProcessKind.LOSS, p, theta)
    assert np.allclose(loss[2:4, :], eye[2:4, :])     # bus pair untouched
    assert loss[0, 4] != 0                             # ring <-> loss mixing

    for kind in (ProcessKind.BACK_RING, ProcessKind.BACK_COUPLER):
        back = build_process(kind, p, theta)
        assert np.allclose(back[2:6, :], eye[2:6, :])  # only ring pair acts
        assert back[0, 1] != 0 or back[1, 0] != 0


def test_unitarity_random_draws():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(200):
        for placement in Placement:
            p = draw_params(rng, placement)
            lam = draw_lambda(rng, p)
            for ordering in Ordering:
                u = compose_total(p, ordering, lam)
                worst = max(worst, np.max(np.abs(u.conj().T @ u - np.eye(6))))
    assert worst < 1e-12, f"max unitarity defect {worst:.3e}"


def test_compose_orderings_assemble_from_processes():
    # the published matrices compose the total; the mid-ring ordering uses
    # principal square roots of the distributed factors
    lam = 1.5491e-6
    p = RingParams(t=0.9, alpha=0.97, xi=0.95, zeta=0.3,
                   placement=Placement.IN_COUPLER)
    theta = round_trip_phase(lam, p)
    cpl = build_process(ProcessKind.COUPLER, p, theta)
    loss = build_process(ProcessKind.LOSS, p, theta)
    back = build_process(ProcessKind.BACK_COUPLER, p, theta)
    end = compose_total(p, Ordering.END_OF_RING, lam)
    assert np.max(np.abs(end - cpl @ back @ loss)) < 1e-14
    loss_half = principal_sqrt_unitary(loss)
    assert np.max(np.abs(loss_half @ loss_half - loss)) < 1e-12
    mid = compose_total(p, Ordering.MID_RING, lam)
    assert np.max(np.abs(mid - loss_half @ cpl @ back @ loss_half)) < 1e-12

    p_ring = RingParams(t=0.9, alpha=0.97, xi=0.95, zeta=0.3,
                        placement=Placement.IN_RING)
    back_half = principal_sqrt_unitary(
        build_process(ProcessKind.BACK_RING, p_ring, theta))
    cpl_r = build_process(ProcessKind.COUPLER, p_ring, theta)
    mid_ring = compose_total(p_ring, Ordering.MID_RING, lam)
    expected = loss_half @ back_half @ cpl_r @ back_half @ loss_half
    assert np.max(np.abs(mid_ring - expected)) < 1e-12


def test_processes_do_not_commute():
    # coupler and loss matrices genuinely do not commute (not even up to a
    # sign), so the composition order is physical
    p = RingParams(**SPLIT_DIP)
    theta = 2 * np.pi * 146 + 0.5
    cpl = build_process(ProcessKind.COUPLER, p, theta)
    loss = build_process(ProcessKind.LOSS, p, theta)
    comm = cpl @ loss - loss @ cpl
    anti = cpl @ loss + loss @ cpl
    assert min(np.max(np.abs(comm)), np.max(np.abs(anti))) > 0.1


def test_end_vs_mid_transmission_lossless():
    p = RingParams(t=0.96, alpha=1.0, xi=0.99, zeta=np.pi / 10)
    grid = default_lambda_grid(p, 301)
    t_end = sweep_arrays(p, grid, ordering=Ordering.END_OF_RING)["T_fwd"]
    t_mid = sweep_arrays(p, grid, ordering=Ordering.MID_RING)["T_fwd"]
    assert np.max(np.abs(t_end - t_mid)) < 1e-10


def test_end_vs_mid_transmission_differs_with_loss():
    # with loss the two orderings are distinct physical models; the gap is
    # small at the dips but visible near the anti-resonance
    p = RingParams(t=0.96, alpha=0.98, xi=0.99, zeta=np.pi / 10)
    grid = default_lambda_grid(p, 301)
    t_end = sweep_arrays(p, grid, ordering=Ordering.END_OF_RING)["T_fwd"]
    t_mid = sweep_arrays(p, grid, ordering=Ordering.MID_RING)["T_fwd"]
    gap = np.max(np.abs(t_end - t_mid))
    assert 1e-3 < gap < 0.2


def test_decoupled_bus_passes_input_through():
    p = RingParams(t=1.0, alpha=0.97, xi=0.95, zeta=0.2)
    st = solve_steady_state(p, Ordering.MID_RING, 1.5495e-6)
    assert st.b2_fwd == 1.0 + 0.0j
    assert st.b2_bwd == 0.0 + 0.0j
    assert st.p_fwd == 0.0 and st.p_bwd == 0.0


def test_mid_ring_in_ring_transmission_is_zeta_independent():
    p1 = RingParams(t=0.96, alpha=0.98, xi=0.99, zeta=np.pi / 10,
                    placement=Placement.IN_RING)
    p0 = replace(p1, zeta=0.0)
    grid = default_lambda_grid(p0, 201)
    t1 = sweep_arrays(p1, grid, ordering=Ordering.MID_RING)["T_fwd"]
    t0 = sweep_arrays(p0, grid, ordering=Ordering.MID_RING)["T_fwd"]
    assert np.max(np.abs(t1 - t0)) < 1e-12
