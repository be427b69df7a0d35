"""Steady-state response of the ring at one wavelength or over a grid:
bus transmission, in-ring fields, loss flux, pump powers, closed-form
cross-checks, and an independent geometric-series oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from . import linalg
from .errors import InvalidParamError, NoConvergenceError, SingularSystemError
from .ring import Ordering, Placement, RingParams, compose_total, free_spectral_range, \
    resonance_wavelength, round_trip_phase
from .tableio import Table

SWEEP_COLUMNS = ["lambda_m", "T_fwd", "T_bwd", "R_fwd_mag", "R_bwd_mag"]


@dataclass(frozen=True)
class BusInput:
    """Complex bus input amplitudes; forward-only unit drive by default."""

    b_fwd: complex = 1.0 + 0.0j
    b_bwd: complex = 0.0j

    def __post_init__(self) -> None:
        for name in ("b_fwd", "b_bwd"):
            v = complex(getattr(self, name))
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise InvalidParamError(f"{name} must be finite")

    def as_vector(self) -> NDArray[np.complexfloating]:
        return np.array([self.b_fwd, self.b_bwd], dtype=complex)


@dataclass(frozen=True)
class SteadyState:
    """Solved fields at one wavelength.

    The ring fields are end-of-loop or loop-averaged values depending on the
    ordering used to compose the scattering matrix; the pump powers are the
    componentwise squared magnitudes of the ring fields.
    """

    b2_fwd: complex
    b2_bwd: complex
    r_fwd: complex
    r_bwd: complex
    l_fwd: complex
    l_bwd: complex
    p_fwd: float
    p_bwd: float


def _steady_arrays(u: NDArray, b: NDArray) -> tuple[NDArray, NDArray, NDArray, NDArray]:
    """Vectorized fixed-point solve.  Returns (R, B2, L2, ok_mask); rows whose
    ring system is singular are nan-filled instead of raising."""
    u_rr = linalg.block_extract(u, "R", "R")
    u_rb = linalg.block_extract(u, "R", "B")
    system = np.eye(2, dtype=complex) - u_rr
    ok = linalg.solvable_mask(system)
    rhs = u_rb @ b
    safe = np.where(ok[..., None, None], system, np.eye(2, dtype=complex))
    r = np.linalg.solve(safe, rhs[..., None])[..., 0]
    r = np.where(ok[..., None], r, np.nan + 0j)
    b2 = (linalg.block_extract(u, "B", "R") @ r[..., None])[..., 0] + \
        (linalg.block_extract(u, "B", "B") @ b)
    l2 = (linalg.block_extract(u, "L", "R") @ r[..., None])[..., 0] + \
        (linalg.block_extract(u, "L", "B") @ b)
    return r, b2, l2, ok


def _state_from(r, b2, l2) -> SteadyState:
    return SteadyState(
        b2_fwd=complex(b2[0]), b2_bwd=complex(b2[1]),
        r_fwd=complex(r[0]), r_bwd=complex(r[1]),
        l_fwd=complex(l2[0]), l_bwd=complex(l2[1]),
        p_fwd=float(abs(r[0]) ** 2), p_bwd=float(abs(r[1]) ** 2),
    )


def solve_steady_state(params: RingParams, ordering: Ordering, lam: float,
                       bus: BusInput = BusInput()) -> SteadyState:
    """Solve the self-consistent ring field at ``lam`` and derive all outputs.

    Raises SingularSystemError at an exactly lossless, fully-coupled
    resonance, where no steady state exists.
    """
    u = compose_total(params, ordering, float(lam))
    r, b2, l2, ok = _steady_arrays(u, bus.as_vector())
    if not ok:
        raise SingularSystemError(
            f"no steady state at lambda={lam!r}: ring round trip is unity "
            "(lossless, fully coupled resonance)"
        )
    return _state_from(r, b2, l2)


def roundtrip_sum_oracle(params: RingParams, ordering: Ordering, lam: float,
                         bus: BusInput = BusInput(), tol: float = 1e-12,
                         max_iterations: int = 10 ** 6) -> SteadyState:
    """Independent check of the fixed point: sum the geometric series of ring
    circulations by direct iteration from an empty ring.

    Raises NoConvergenceError after ``max_iterations`` when the round trip
    does not contract (unit spectral radius).
    """
    u = compose_total(params, ordering, float(lam))
    u_rr = linalg.block_extract(u, "R", "R")
    src = linalg.block_extract(u, "R", "B") @ bus.as_vector()
    # Plain python complex arithmetic: a 2x2 iteration is faster here than
    # dispatching tiny numpy operations millions of times.
    a00, a01 = complex(u_rr[0, 0]), complex(u_rr[0, 1])
    a10, a11 = complex(u_rr[1, 0]), complex(u_rr[1, 1])
    s0, s1 = complex(src[0]), complex(src[1])
    r0 = r1 = 0.0 + 0.0j
    for _ in range(max_iterations):
        n0 = a00 * r0 + a01 * r1 + s0
        n1 = a10 * r0 + a11 * r1 + s1
        delta = abs(n0 - r0) ** 2 + abs(n1 - r1) ** 2
        size = abs(n0) ** 2 + abs(n1) ** 2
        r0, r1 = n0, n1
        if delta <= (tol * tol) * size:
            break
    else:
        raise NoConvergenceError(
            f"round-trip summation did not converge within {max_iterations} "
            f"iterations at lambda={lam!r} (ring round trip does not contract)"
        )
    r = np.array([r0, r1], dtype=complex)
    b = bus.as_vector()
    b2 = linalg.block_extract(u, "B", "R") @ r + linalg.block_extract(u, "B", "B") @ b
    l2 = linalg.block_extract(u, "L", "R") @ r + linalg.block_extract(u, "L", "B") @ b
    return _state_from(r, b2, l2)


def closed_form_transmission(params: RingParams, lam: float | NDArray,
                             form: str = "printed") -> complex | NDArray:
    """Closed-form forward bus output for unit forward drive.

    ``form="printed"`` evaluates the compact per-placement expression exactly
    as published.  Those expressions carry a 1/t input normalization and a
    half-cycle phase convention that differ from the matrix solve (their
    magnitude can exceed 1), so they serve as cross-checks only, compared up
    to that convention map.  ``form="matrix"`` evaluates the algebraically
    reduced end-of-ring matrix solve (zero backscatter phase only), which
    matches solve_steady_state to machine precision and reduces to the
    standard all-pass response at unit backscatter amplitude.
    """
    if form not in ("printed", "matrix"):
        raise InvalidParamError(f"form must be 'printed' or 'matrix', got {form!r}")
    theta = np.asarray(round_trip_phase(lam, params), dtype=float)
    t, alpha, xi = params.t, params.alpha, params.xi
    if form == "printed":
        if t == 0:
            raise InvalidParamError("printed closed form requires t > 0 (contains 1/t)")
        x = t * alpha * np.exp(-1j * theta)
        if params.placement is Placement.IN_RING:
            out = 1.0 / t - ((1.0 / t + alpha * xi * np.exp(-1j * theta)) * (t * t - 1.0)) \
                / (1.0 + 2.0 * x * xi + x * x)
        else:
            xc = xi * np.exp(0.5j * params.zeta)
            out = xc / t - ((xc - x) * (t - 1.0 / t)) \
                / (x * x - x * (2.0 * xi * math.cos(0.5 * params.zeta)) + 1.0)
    else:
        if params.zeta != 0.0:
            raise InvalidParamError("matrix closed form requires zeta = 0")
        if t == 0:
            raise InvalidParamError("matrix closed form requires t > 0")
        x = t * alpha * np.exp(-1j * theta)
        out = (t * t - xi * x * (1.0 + t * t) + x * x) / (t * (1.0 - 2.0 * xi * x + x * x))
    return complex(out) if out.ndim == 0 else out


def default_lambda_grid(params: RingParams, points: int = 2001,
                        span_fsr: float = 1.0, center: float | None = None) -> NDArray:
    """Wavelength grid spanning ``span_fsr`` free spectral ranges centered on
    a resonance (the one nearest 1.55 um unless ``center`` is given)."""
    if points < 2:
        raise InvalidParamError("grid needs at least 2 points")
    if span_fsr <= 0:
        raise InvalidParamError("span_fsr must be positive")
    c = resonance_wavelength(params) if center is None else float(center)
    half = 0.5 * span_fsr * free_spectral_range(c, params)
    return np.linspace(c - half, c + half, points)


def sweep_arrays(params: RingParams, lambda_grid: NDArray, bus: BusInput = BusInput(),
                 ordering: Ordering = Ordering.MID_RING) -> dict[str, NDArray]:
    """Vectorized sweep used by the table/CSV writer and by callers that want
    raw arrays; unsolvable wavelengths yield nan rows."""
    lams = np.asarray(lambda_grid, dtype=float)
    if lams.size == 0:
        raise InvalidParamError("lambda grid must be nonempty")
    if lams.ndim != 1 or (lams.size > 1 and not np.all(np.diff(lams) > 0)):
        raise InvalidParamError("lambda grid must be one-dimensional and ascending")
    u = compose_total(params, ordering, lams)
    r, b2, l2, ok = _steady_arrays(u, bus.as_vector())
    return {
        "lambda_m": lams,
        "T_fwd": np.abs(b2[..., 0]) ** 2,
        "T_bwd": np.abs(b2[..., 1]) ** 2,
        "R_fwd_mag": np.abs(r[..., 0]),
        "R_bwd_mag": np.abs(r[..., 1]),
        "L_fwd_mag": np.abs(l2[..., 0]),
        "L_bwd_mag": np.abs(l2[..., 1]),
        "ok": ok,
    }


def spectrum_sweep(params: RingParams, lambda_grid: NDArray, bus: BusInput = BusInput(),
                   ordering: Ordering = Ordering.MID_RING) -> Table:
    """Transmission and ring-field magnitudes over a wavelength grid.

    Rows whose steady state cannot be solved are marked with nan instead of
    aborting the sweep.
    """
    arrays = sweep_arrays(params, lambda_grid, bus, ordering)
    rows = np.column_stack([arrays[c] for c in SWEEP_COLUMNS])
    comments = []
    n_bad = int((~arrays["ok"]).sum())
    if n_bad:
        comments.append(f"{n_bad} wavelength(s) had no steady state; rows are nan")
    return Table(columns=list(SWEEP_COLUMNS), rows=rows, comments=comments)
