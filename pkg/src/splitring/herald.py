"""Spontaneous four-wave-mixing photon-pair generation in the ring:
pair rates from the circulating pump, photon survival proportions, heralding
rate and efficiency, and the rate-efficiency trade-off parameter M.

Conventions.  The pump is solved classically with forward-only bus drive by
default; ``q`` is the backward/forward circulating *power* ratio.  Photon
survival uses the non-unitary backscatter variant (a photon that scatters
backward is lost to the heralding path) and evaluates the block expressions
as matrix functions, extracting the forward component at the end.  Rates are
in reduced units of beta^2 unless material parameters are supplied.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import NDArray
from scipy.constants import c as _C_LIGHT, epsilon_0 as _EPS0

from . import linalg
from .errors import InvalidParamError, SingularSystemError
from .response import BusInput, default_lambda_grid, solve_steady_state
from .ring import Ordering, RingParams, compose_total, resonance_wavelength
from .search import golden_max, worker_count
from .tableio import Table

CURVE_COLUMNS = ["t", "eta", "j_herald_reduced", "j_hm_reduced", "m_param"]

# Wavelength refinement for rate-peak searches.  1e-13 m is far below any
# linewidth in scope (rates change by ~1e-5 relative at this scale) and keeps
# coupling scans, which nest this search, fast.
PEAK_REFINE_TOL = 1e-13


@dataclass(frozen=True)
class SfwmParams:
    """Material/geometry inputs for absolute rate scaling.

    chi3 is the third-order susceptibility (m^2/V^2), a_eff the waveguide
    cross-sectional area (m^2), n_p the pump effective index and lambda_p the
    pump wavelength (m).  The physical constants default to CODATA values.
    """

    chi3: float
    a_eff: float
    n_p: float
    lambda_p: float
    eps0: float = _EPS0
    c: float = _C_LIGHT

    def __post_init__(self) -> None:
        for name in ("chi3", "a_eff", "n_p", "lambda_p", "eps0", "c"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                raise InvalidParamError(f"{name} must be finite and nonnegative, got {v!r}")
        for name in ("a_eff", "n_p", "lambda_p", "eps0", "c"):
            if getattr(self, name) == 0:
                raise InvalidParamError(f"{name} must be positive")


@dataclass(frozen=True)
class HeraldingReport:
    """All pair-generation figures of merit at one operating point."""

    beta: float
    j_4wm_fwd: float
    j_4wm_bwd: float
    q: float
    pr_fwd: float
    pr_bwd: float
    j_hm: float
    j_herald: float
    eta: float
    m_param: float


def beta_coefficient(p: SfwmParams, r: float) -> float:
    """Rate coefficient linking circulating pump power to pair generation."""
    if r <= 0:
        raise InvalidParamError("ring radius must be positive")
    return (3.0 * math.pi**2 * p.eps0 * p.c * p.chi3 * r) / (
        2.0 * p.n_p**2 * p.lambda_p * p.a_eff
    )


def pair_generation_rate(p_fwd: float, p_bwd: float, beta: float) -> tuple[float, float]:
    """Per-direction pair generation rates (quadratic in circulating power)."""
    if p_fwd < 0 or p_bwd < 0:
        raise InvalidParamError("pump powers must be nonnegative")
    return beta**2 * p_fwd**2, beta**2 * p_bwd**2


def _photon_blocks(params: RingParams, ordering: Ordering, lams) -> tuple[NDArray, NDArray]:
    u = compose_total(params, ordering, lams, photon=True)
    return linalg.block_extract(u, "R", "R"), linalg.block_extract(u, "B", "R")


def survival_proportions(params: RingParams, lam: float, q: float = 0.0,
                         ordering: Ordering = Ordering.MID_RING) -> tuple[complex, complex]:
    """Proportions of generated photons that reach the forward/backward bus.

    The source vector is (1, q^2); the forward proportion is real in [0, 1]
    for q = 0, while the backward entry is reported raw (it is not normalized
    against the backward source and may exceed 1).
    """
    if q < 0:
        raise InvalidParamError("q must be nonnegative")
    u_rr, u_br = _photon_blocks(params, ordering, float(lam))
    system = np.eye(2, dtype=complex) - u_rr @ u_rr
    src = np.array([1.0, q * q], dtype=complex)
    try:
        inner = linalg.solve_2x2(system, src)
    except SingularSystemError as exc:
        raise SingularSystemError(
            f"photon has no escape channel at lambda={lam!r} (lossless trapped photon)"
        ) from exc
    pr = u_br @ u_br @ inner
    return complex(pr[0]), complex(pr[1])


def m_parameter(params: RingParams, lam: float,
             ordering: Ordering = Ordering.MID_RING) -> complex:
    """Trade-off parameter M linking the heralding rate to eta^4 (1-eta)^2.

    Evaluated from the photon-propagation blocks as a matrix function applied
    to the forward unit vector.
    """
    u_rr, u_br = _photon_blocks(params, ordering, float(lam))
    eye = np.eye(2, dtype=complex)
    rr2 = u_rr @ u_rr
    br2 = u_br @ u_br
    num = br2 @ (eye - rr2 - br2)
    den = (eye - rr2) @ (eye - rr2) @ (eye + u_rr) @ (eye + u_rr)
    try:
        y = linalg.solve_2x2(den, np.array([1.0, 0.0], dtype=complex))
    except SingularSystemError as exc:
        raise SingularSystemError(
            f"M undefined at lambda={lam!r}: ring round trip has a unit eigenvalue"
        ) from exc
    return complex((num @ y)[0])


def heralding_report(params: RingParams, lam: float, bus: BusInput = BusInput(),
                     sfwm: SfwmParams | None = None,
                     ordering: Ordering = Ordering.MID_RING) -> HeraldingReport:
    """Full pair-generation report at one wavelength.

    Raises ZeroDivisionError when the forward circulating pump power is zero
    with nonzero drive (q undefined); a completely undriven ring instead
    reports zero rates with q = 0.
    """
    state = solve_steady_state(params, ordering, lam, bus)
    p_fwd, p_bwd = state.p_fwd, state.p_bwd
    input_power = abs(bus.b_fwd) ** 2 + abs(bus.b_bwd) ** 2
    if p_fwd == 0.0:
        if input_power == 0.0:
            q = 0.0
        else:
            raise ZeroDivisionError(
                f"q undefined: forward circulating pump power is zero at lambda={lam!r}"
            )
    else:
        q = p_bwd / p_fwd
    pr_f, pr_b = survival_proportions(params, lam, q, ordering)
    eta = abs(pr_f)
    beta = beta_coefficient(sfwm, params.r) if sfwm is not None else 1.0
    j4_fwd, j4_bwd = pair_generation_rate(p_fwd, p_bwd, beta)
    m_val = abs(m_parameter(params, lam, ordering))
    return HeraldingReport(
        beta=beta, j_4wm_fwd=j4_fwd, j_4wm_bwd=j4_bwd, q=q,
        pr_fwd=eta, pr_bwd=abs(pr_b),
        j_hm=j4_fwd * eta, j_herald=j4_fwd * eta * eta,
        eta=eta, m_param=m_val,
    )


def herald_arrays(params: RingParams, lams: NDArray, bus: BusInput = BusInput(),
                  ordering: Ordering = Ordering.MID_RING) -> dict[str, NDArray]:
    """Vectorized reduced-rate quantities over a wavelength grid.

    Rows where the pump cannot be solved, the forward power vanishes, or the
    photon system is singular are masked out (ok=False, values nan).
    """
    lams = np.asarray(lams, dtype=float)
    u = compose_total(params, ordering, lams)
    u_rr = linalg.block_extract(u, "R", "R")
    u_rb = linalg.block_extract(u, "R", "B")
    system = np.eye(2, dtype=complex) - u_rr
    ok = linalg.solvable_mask(system)
    safe = np.where(ok[..., None, None], system, np.eye(2, dtype=complex))
    r = np.linalg.solve(safe, (u_rb @ bus.as_vector())[..., None])[..., 0]
    p_fwd = np.abs(r[..., 0]) ** 2
    p_bwd = np.abs(r[..., 1]) ** 2
    ok &= p_fwd > 0.0
    q2 = np.where(ok, p_bwd / np.where(p_fwd > 0, p_fwd, 1.0), np.nan) ** 2

    ph_rr, ph_br = _photon_blocks(params, ordering, lams)
    ph_system = np.eye(2, dtype=complex) - ph_rr @ ph_rr
    ok &= linalg.solvable_mask(ph_system)
    ph_safe = np.where(ok[..., None, None], ph_system, np.eye(2, dtype=complex))
    src = np.stack([np.ones_like(q2), q2], axis=-1).astype(complex)
    inner = np.linalg.solve(ph_safe, src[..., None])[..., 0]
    pr = (ph_br @ ph_br @ inner[..., None])[..., 0]
    eta = np.where(ok, np.abs(pr[..., 0]), np.nan)
    p_fwd = np.where(ok, p_fwd, np.nan)
    p_bwd = np.where(ok, p_bwd, np.nan)
    return {
        "lambda_m": lams,
        "p_fwd": p_fwd,
        "p_bwd": p_bwd,
        "q": np.sqrt(q2),
        "eta": eta,
        "j_herald_reduced": p_fwd**2 * eta**2,
        "j_hm_reduced": p_fwd**2 * eta,
        "ok": ok,
    }


def peak_herald_wavelength(params: RingParams, bus: BusInput = BusInput(),
                           ordering: Ordering = Ordering.MID_RING,
                           window: NDArray | None = None,
                           coarse_points: int = 301) -> float:
    """Wavelength maximizing the heralding rate over one free spectral range.

    A coarse grid locates the peak; golden-section refinement pins it down.
    Raises ZeroDivisionError if no wavelength in the window has forward pump
    power (for example with a fully decoupled bus).
    """
    grid = default_lambda_grid(params, coarse_points) if window is None else np.asarray(window)
    arrays = herald_arrays(params, grid, bus, ordering)
    j = arrays["j_herald_reduced"]
    if not arrays["ok"].any():
        raise ZeroDivisionError("q undefined everywhere in the window: no forward pump power")
    idx = int(np.nanargmax(j))
    lo = grid[max(0, idx - 1)]
    hi = grid[min(len(grid) - 1, idx + 1)]

    def metric(lam: float) -> float:
        a = herald_arrays(params, np.array([lam]), bus, ordering)
        v = a["j_herald_reduced"][0]
        return float(v) if np.isfinite(v) else -np.inf

    lam_star, v_star = golden_max(metric, float(lo), float(hi), tol=PEAK_REFINE_TOL)
    # Golden section stops within ~1e-15 m of an interior maximum, which is
    # enough wavelength error to perturb near-unity efficiencies in the 11th
    # digit.  When the analytic resonance is at least as good, prefer it so
    # degenerate (unsplit, lossless) configurations evaluate at the exact
    # resonance condition.
    candidate = resonance_wavelength(params, near=0.5 * float(grid[0] + grid[-1]))
    if grid[0] <= candidate <= grid[-1] and metric(candidate) >= v_star:
        return candidate
    return lam_star


def rate_vs_efficiency_curve(params: RingParams, t_grid, sfwm: SfwmParams | None = None,
                             ordering: Ordering = Ordering.MID_RING,
                             bus: BusInput = BusInput()) -> Table:
    """Rate-efficiency trade-off rows, one per coupling value ``t``.

    Each row is evaluated at that configuration's heralding-rate-optimal
    wavelength.  Rows that fail (no pump, singular photon system) are nan and
    noted in the table comments.
    """
    t_values = [float(t) for t in np.asarray(t_grid, dtype=float).ravel()]
    if not t_values:
        raise InvalidParamError("t grid must be nonempty")
    for t in t_values:
        if not 0.0 < t <= 1.0:
            raise InvalidParamError(f"t grid values must be in (0, 1], got {t}")

    def one_row(t: float) -> tuple[list[float], str | None]:
        p = replace(params, t=t)
        try:
            lam = peak_herald_wavelength(p, bus, ordering)
            rep = heralding_report(p, lam, bus, sfwm, ordering)
        except Exception as exc:  # per-row marker, sweep continues
            return [t, math.nan, math.nan, math.nan, math.nan], f"t={t:g}: {exc}"
        scale = rep.beta**2
        return [t, rep.eta, rep.j_herald / scale, rep.j_hm / scale, rep.m_param], None

    if len(t_values) > 1 and worker_count() > 1:
        with ThreadPoolExecutor(max_workers=min(worker_count(), len(t_values))) as pool:
            results = list(pool.map(one_row, t_values))
    else:
        results = [one_row(t) for t in t_values]
    rows = np.array([r for r, _ in results], dtype=float)
    comments = [msg for _, msg in results if msg is not None]
    return Table(columns=list(CURVE_COLUMNS), rows=rows, comments=comments)
