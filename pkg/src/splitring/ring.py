"""Process matrices and total round-trip scattering matrices for a single
micro-ring resonator with a backscattering element.

The model tracks six complex field modes ordered as
(R_fwd, R_bwd, B_fwd, B_bwd, L_fwd, L_bwd): ring, bus, and a fictitious loss
channel that absorbs round-trip loss so every process stays unitary.  Three
elementary processes act on mode pairs:

* the bus-ring coupler, acting identically on the forward pair
  (B_fwd, R_fwd) and the backward pair (B_bwd, R_bwd), bus row first;
* round-trip loss/propagation, acting identically on (R_fwd, L_fwd) and
  (R_bwd, L_bwd);
* backscatter, mixing (R_fwd, R_bwd) only, with identity on the bus and loss
  pairs.  The in-ring and in-coupler variants differ in how the backscatter
  phase enters; a third, non-unitary variant models a photon that is lost to
  detection the moment it back-scatters.

Wavelength enters only through the round-trip phase.  All builders broadcast:
passing an array of wavelengths yields a stacked ``(..., 6, 6)`` result.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import NDArray

from .errors import BranchAmbiguityError, InvalidParamError
from .linalg import BRANCH_CUT_TOL, Matrix6


class Placement(Enum):
    """Where the backscattering element sits in the loop."""

    IN_RING = "InRing"
    IN_COUPLER = "InCoupler"


class Ordering(Enum):
    """Which field the ring modes of the composed matrix represent.

    END_OF_RING composes coupler-backscatter-loss and the ring modes are the
    fields just before the coupler.  MID_RING symmetrizes the loop with
    half-propagation factors so the ring modes are the loop-averaged fields
    needed for nonlinear (pump-power) calculations.
    """

    END_OF_RING = "EndOfRing"
    MID_RING = "MidRing"


class ProcessKind(Enum):
    COUPLER = "Coupler"
    LOSS = "Loss"
    BACK_RING = "BackRing"
    BACK_COUPLER = "BackCoupler"
    BACK_PHOTON = "BackPhoton"


@dataclass(frozen=True)
class RingParams:
    """All physical parameters of one resonator configuration.

    t, alpha and xi are amplitude coefficients in [0, 1] (bus self-coupling,
    round-trip survival, backscatter transmission); phi, zeta and tau are the
    coupler, backscatter and loss phases in radians; n_e is the effective
    index and r the ring radius in meters.
    """

    t: float
    phi: float = 0.0
    alpha: float = 1.0
    xi: float = 1.0
    zeta: float = 0.0
    tau: float = 0.0
    n_e: float = 2.4
    r: float = 15e-6
    placement: Placement = Placement.IN_COUPLER

    def __post_init__(self) -> None:
        for name in ("t", "alpha", "xi"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and 0.0 <= v <= 1.0):
                raise InvalidParamError(f"{name} must be within [0, 1], got {v!r}")
        for name in ("phi", "zeta", "tau"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise InvalidParamError(f"{name} must be a finite phase in radians, got {v!r}")
        if not (isinstance(self.r, (int, float)) and math.isfinite(self.r) and self.r > 0):
            raise InvalidParamError(f"r must be a positive radius in meters, got {self.r!r}")
        if not (isinstance(self.n_e, (int, float)) and math.isfinite(self.n_e) and self.n_e > 0):
            raise InvalidParamError(f"n_e must be a positive index, got {self.n_e!r}")
        if not isinstance(self.placement, Placement):
            raise InvalidParamError(f"placement must be a Placement, got {self.placement!r}")


def round_trip_phase(lam: float | NDArray, params: RingParams) -> float | NDArray:
    """Phase accrued in one trip around the ring at wavelength ``lam`` (m)."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0) or not np.isfinite(lam).all():
        raise InvalidParamError("wavelength must be positive and finite")
    theta = 4.0 * math.pi**2 * params.n_e * params.r / lam + params.tau
    return float(theta) if theta.ndim == 0 else theta


def free_spectral_range(lam: float, params: RingParams) -> float:
    """Approximate wavelength spacing between adjacent resonances near ``lam``."""
    return lam**2 / (2.0 * math.pi * params.n_e * params.r)


def resonance_wavelength(params: RingParams, near: float = 1.55e-6) -> float:
    """Wavelength closest to ``near`` at which the round-trip phase is a
    multiple of a full cycle."""
    if near <= 0:
        raise InvalidParamError("near must be a positive wavelength")
    k = 4.0 * math.pi**2 * params.n_e * params.r
    m = max(1, round((k / near + params.tau) / (2.0 * math.pi)))
    denom = 2.0 * math.pi * m - params.tau
    if denom <= 0:
        raise InvalidParamError("tau too large for a positive resonance wavelength")
    return k / denom


# ---------------------------------------------------------------------------
# 2x2 building blocks (broadcast over leading dimensions)
# ---------------------------------------------------------------------------

def _stack2(a, b, c, d) -> NDArray:
    a, b, c, d = np.broadcast_arrays(*(np.asarray(x, dtype=complex) for x in (a, b, c, d)))
    return np.stack(
        [np.stack([a, b], axis=-1), np.stack([c, d], axis=-1)], axis=-2
    )


def _coupler2(t: float, phi: float) -> NDArray:
    s = math.sqrt(max(0.0, 1.0 - t * t))
    ph = np.exp(-2j * phi)
    return _stack2(ph * t, s, -ph * s, t)


def _loss2(alpha: float, theta) -> NDArray:
    s = math.sqrt(max(0.0, 1.0 - alpha * alpha))
    fwd = np.exp(-1j * np.asarray(theta, dtype=float))
    bwd = np.conj(fwd)
    return _stack2(fwd * alpha, bwd * s, -fwd * s, bwd * alpha)


def _back_ring2(xi: float, zeta: float) -> NDArray:
    s = math.sqrt(max(0.0, 1.0 - xi * xi))
    return _stack2(xi, np.exp(1j * zeta) * s, -np.exp(-1j * zeta) * s, xi)


def _back_coupler2(xi: float, zeta: float) -> NDArray:
    s = math.sqrt(max(0.0, 1.0 - xi * xi))
    lead, lag = np.exp(-0.5j * zeta), np.exp(0.5j * zeta)
    return _stack2(lead * xi, lag * s, -lead * s, lag * xi)


def _back_photon2(xi: float, zeta: float, placement: Placement) -> NDArray:
    s = math.sqrt(max(0.0, 1.0 - xi * xi))
    if placement is Placement.IN_COUPLER:
        lead = np.exp(-0.5j * zeta)
        return _stack2(lead * xi, 0.0, -lead * s, 1.0)
    return _stack2(xi, 0.0, -np.exp(-1j * zeta) * s, 1.0)


def _su2_principal_sqrt(m: NDArray) -> NDArray:
    """Principal square root of a (batched) SU(2) matrix with real trace.

    Uses the closed form (M + I)/sqrt(2 + tr M), which halves each
    eigenvalue's argument into the principal branch.
    """
    tr = m[..., 0, 0] + m[..., 1, 1]
    shift = 2.0 + tr
    if np.any(shift.real < BRANCH_CUT_TOL**2):
        raise BranchAmbiguityError(
            "round-trip eigenvalue at -1: half-propagation is branch-ambiguous; "
            "perturb the backscatter phase or the round-trip phase"
        )
    eye = np.eye(2, dtype=complex)
    return (m + eye) / np.sqrt(shift)[..., None, None]


def _back_photon_half2(xi: float, zeta: float) -> NDArray:
    """Square root of the triangular in-ring photon matrix [[xi,0],[c,1]]."""
    s = math.sqrt(max(0.0, 1.0 - xi * xi))
    c = -np.exp(-1j * zeta) * s
    root = math.sqrt(xi)
    return _stack2(root, 0.0, c / (1.0 + root), 1.0)


# ---------------------------------------------------------------------------
# 6x6 embeddings
# ---------------------------------------------------------------------------

_PAIRS_COUPLER = ((2, 0), (3, 1))   # (B_fwd, R_fwd), (B_bwd, R_bwd)
_PAIRS_LOSS = ((0, 4), (1, 5))      # (R_fwd, L_fwd), (R_bwd, L_bwd)
_PAIR_BACK = ((0, 1),)              # (R_fwd, R_bwd)


def _embed(m2: NDArray, pairs) -> NDArray:
    shape = m2.shape[:-2]
    u = np.zeros(shape + (6, 6), dtype=complex)
    u[...] = np.eye(6)
    for i, j in pairs:
        u[..., i, i] = m2[..., 0, 0]
        u[..., i, j] = m2[..., 0, 1]
        u[..., j, i] = m2[..., 1, 0]
        u[..., j, j] = m2[..., 1, 1]
    return u


def _back_matrix2(params: RingParams, photon: bool, half: bool) -> NDArray:
    if photon:
        if half:
            if params.placement is not Placement.IN_RING:
                raise InvalidParamError("half photon backscatter only used in-ring")
            return _back_photon_half2(params.xi, params.zeta)
        return _back_photon2(params.xi, params.zeta, params.placement)
    if params.placement is Placement.IN_RING:
        m = _back_ring2(params.xi, params.zeta)
        return _su2_principal_sqrt(m) if half else m
    if half:
        raise InvalidParamError("half backscatter is only defined for the in-ring placement")
    return _back_coupler2(params.xi, params.zeta)


def build_process(kind: ProcessKind, params: RingParams, theta: float) -> Matrix6:
    """Build the 6x6 matrix of one elementary process at round-trip phase
    ``theta``.  All kinds except BACK_PHOTON are unitary."""
    if not np.isfinite(theta).all() if isinstance(theta, np.ndarray) else not math.isfinite(theta):
        raise InvalidParamError("theta must be finite")
    if kind is ProcessKind.COUPLER:
        return _embed(_coupler2(params.t, params.phi), _PAIRS_COUPLER)
    if kind is ProcessKind.LOSS:
        return _embed(_loss2(params.alpha, theta), _PAIRS_LOSS)
    if kind is ProcessKind.BACK_RING:
        return _embed(_back_ring2(params.xi, params.zeta), _PAIR_BACK)
    if kind is ProcessKind.BACK_COUPLER:
        return _embed(_back_coupler2(params.xi, params.zeta), _PAIR_BACK)
    if kind is ProcessKind.BACK_PHOTON:
        return _embed(_back_photon2(params.xi, params.zeta, params.placement), _PAIR_BACK)
    raise InvalidParamError(f"unknown process kind {kind!r}")


def compose_total(params: RingParams, ordering: Ordering,
                  lam: float | NDArray, *, photon: bool = False) -> Matrix6:
    """Total scattering matrix of one round trip at wavelength ``lam``.

    With ``photon=True`` the backscatter factor is replaced by its
    non-unitary variant that removes back-scattered photons from the
    heralding path; everything else is unchanged.
    """
    theta = round_trip_phase(lam, params)
    cpl = _embed(_coupler2(params.t, params.phi), _PAIRS_COUPLER)
    if ordering is Ordering.END_OF_RING:
        back = _embed(_back_matrix2(params, photon, half=False), _PAIR_BACK)
        loss = _embed(_loss2(params.alpha, theta), _PAIRS_LOSS)
        return cpl @ back @ loss
    if ordering is not Ordering.MID_RING:
        raise InvalidParamError(f"unknown ordering {ordering!r}")
    loss_half = _embed(_su2_principal_sqrt(_loss2(params.alpha, theta)), _PAIRS_LOSS)
    if params.placement is Placement.IN_RING:
        back_half = _embed(_back_matrix2(params, photon, half=True), _PAIR_BACK)
        return loss_half @ back_half @ cpl @ back_half @ loss_half
    back = _embed(_back_matrix2(params, photon, half=False), _PAIR_BACK)
    return loss_half @ cpl @ back @ loss_half
