"""Small complex matrix helpers: mode-block extraction, guarded 2x2 solves,
and principal square roots of unitary matrices.

All functions accept numpy arrays and, where noted, batched leading
dimensions (shape ``(..., n, n)``).  Values are immutable from the caller's
point of view; every operation is pure and thread-safe.
"""
from __future__ import annotations

from enum import IntEnum

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import schur

from .errors import BranchAmbiguityError, NotUnitaryError, SingularSystemError

Matrix2 = NDArray[np.complexfloating]
Matrix6 = NDArray[np.complexfloating]

# Centralized numerical tolerances.
UNITARITY_TOL = 1e-12          # flagged-unitary matrices must satisfy this
SOLVE_RESIDUAL_TOL = 1e-12     # guaranteed ||Ax - b|| / ||b|| for solve_2x2
SQRT_ROUNDTRIP_TOL = 1e-10     # ||S@S - M|| bound for principal_sqrt_unitary
SQRT_UNITARY_PRE_TOL = 1e-10   # unitarity precondition for square roots
BRANCH_CUT_TOL = 1e-9          # |eigenvalue - (-1)| distance treated as ambiguous
CONDITION_CAP = 1e12           # default condition-number cap for solves
DET_FLOOR = 1e-300             # |det| below this is singular outright


class ModeIndex(IntEnum):
    """Fixed ordering of the six field modes (forward component first)."""

    R_FWD = 0
    R_BWD = 1
    B_FWD = 2
    B_BWD = 3
    L_FWD = 4
    L_BWD = 5


_MODE_SLICES = {
    "R": slice(ModeIndex.R_FWD, ModeIndex.R_BWD + 1),
    "B": slice(ModeIndex.B_FWD, ModeIndex.B_BWD + 1),
    "L": slice(ModeIndex.L_FWD, ModeIndex.L_BWD + 1),
}


def block_extract(u: Matrix6, row: str, col: str) -> Matrix2:
    """Extract the 2x2 sub-matrix coupling mode pair ``col`` into ``row``.

    ``row`` and ``col`` name one of the pairs ``"R"``, ``"B"``, ``"L"``;
    each pair is (forward, backward) in that order.  Batched leading
    dimensions pass through unchanged.
    """
    try:
        rows, cols = _MODE_SLICES[row], _MODE_SLICES[col]
    except KeyError as exc:
        raise KeyError(f"mode pair must be one of 'R', 'B', 'L', got {row!r}/{col!r}") from exc
    return u[..., rows, cols]


def solvable_mask(a: Matrix2, condition_cap: float = CONDITION_CAP) -> NDArray[np.bool_]:
    """Boolean mask of batch elements that solve_2x2 would accept."""
    a = np.asarray(a, dtype=complex)
    det = a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(a)
    finite = np.isfinite(a).all(axis=(-2, -1))
    return finite & (np.abs(det) >= DET_FLOOR) & (cond <= condition_cap)


def solve_2x2(a: Matrix2, b: NDArray[np.complexfloating],
              condition_cap: float = CONDITION_CAP) -> NDArray[np.complexfloating]:
    """Solve ``a @ x = b`` for 2x2 systems (batched leading dims supported).

    Raises SingularSystemError when the determinant underflows or the
    condition number exceeds ``condition_cap``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    ok = solvable_mask(a, condition_cap)
    if not np.all(ok):
        bad = np.argwhere(~np.atleast_1d(ok))
        raise SingularSystemError(
            f"2x2 system is singular or exceeds condition cap {condition_cap:g} "
            f"(first failing batch index {tuple(bad[0])})"
        )
    return np.linalg.solve(a, b[..., None])[..., 0]


def principal_sqrt_unitary(m: NDArray[np.complexfloating]) -> NDArray[np.complexfloating]:
    """Principal square root of a unitary matrix.

    The eigenvalue arguments of the result lie in (-pi/2, pi/2]: each
    eigenvalue argument, taken in (-pi, pi], is halved.  Raises
    NotUnitaryError if the input is not unitary within ``SQRT_UNITARY_PRE_TOL``
    and BranchAmbiguityError if an eigenvalue lies within ``BRANCH_CUT_TOL``
    of -1 (the branch cut).
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotUnitaryError(f"expected a square matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise NotUnitaryError("matrix has non-finite entries")
    n = m.shape[0]
    defect = np.abs(m.conj().T @ m - np.eye(n)).max()
    if defect > SQRT_UNITARY_PRE_TOL:
        raise NotUnitaryError(f"unitarity defect {defect:.3e} exceeds {SQRT_UNITARY_PRE_TOL:g}")
    # A unitary matrix is normal, so its complex Schur form is diagonal and
    # the Schur vectors give an orthonormal eigenbasis.
    tri, z = schur(m, output="complex")
    eigs = np.diag(tri)
    if np.any(np.abs(eigs + 1.0) < BRANCH_CUT_TOL):
        raise BranchAmbiguityError(
            "eigenvalue within tolerance of -1: square-root branch is ambiguous; "
            "perturb the backscatter phase or the round-trip phase"
        )
    roots = np.sqrt(np.abs(eigs)) * np.exp(0.5j * np.angle(eigs))
    return (z * roots) @ z.conj().T
