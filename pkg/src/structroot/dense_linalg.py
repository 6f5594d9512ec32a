"""Dense complex kernels: LU inverse, QR, rank-revealing QR, norms, small eigensolves.

Matrices are plain numpy arrays. LAPACK (through numpy/scipy) does the
factorizations; this module adds the conventions the rest of the package
relies on (positive real R diagonals, pivot thresholds, numerical rank).
"""

from __future__ import annotations

import warnings
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

from .errors import NoConvergence, RankDeficient, SingularMatrix

RRQR_TOL = 1e-8
SMALL_EIG_LIMIT = 64
# pivots below eps * max|M| mean singular to working precision; larger ones
# may still belong to an ill-conditioned but usable matrix
PIVOT_TOL = np.finfo(float).eps


class QRFactors(NamedTuple):
    Q: np.ndarray
    R: np.ndarray
    perm: np.ndarray


def companion_matrix(coeffs) -> np.ndarray:
    """Companion matrix with unit subdiagonal and last column ``-p_j / p_n``."""
    c = np.asarray(getattr(coeffs, "coeffs", coeffs))
    n = c.size - 1
    dtype = np.float64 if not np.any(np.imag(c)) else np.complex128
    C = np.zeros((n, n), dtype=dtype)
    C[np.arange(1, n), np.arange(n - 1)] = 1.0
    col = -(c[:-1] / c[-1])
    C[:, -1] = col.real if dtype is np.float64 else col
    return C


def _pivot_check(lu: np.ndarray, M: np.ndarray) -> None:
    scale = np.max(np.abs(M)) if M.size else 0.0
    piv = np.abs(np.diag(lu))
    if scale == 0.0 or np.min(piv) < PIVOT_TOL * scale or not np.all(np.isfinite(lu)):
        raise SingularMatrix(f"pivot {np.min(piv):.3e} below threshold (scale {scale:.3e})")


def lu_solve(M: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve ``M X = B`` with partial pivoting; SingularMatrix on a tiny pivot."""
    M = np.asarray(M)
    if not np.all(np.isfinite(M)):
        raise SingularMatrix("non-finite matrix entries")
    with warnings.catch_warnings():
        # exact zero pivots are reported through SingularMatrix below
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(M, check_finite=False)
    _pivot_check(lu, M)
    return sla.lu_solve((lu, piv), B, check_finite=False)


def lu_invert(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("lu_invert needs a square matrix")
    return lu_solve(M, np.eye(M.shape[0], dtype=M.dtype))


def _positive_diagonal(Q: np.ndarray, R: np.ndarray):
    d = np.diag(R).copy()
    phase = np.ones_like(d)
    nz = d != 0
    phase[nz] = d[nz] / np.abs(d[nz])
    Q = Q * phase[None, :]
    R = np.conj(phase)[:, None] * R
    return Q, R


def qr(M: np.ndarray) -> QRFactors:
    """Householder QR with ``diag(R)`` made positive real (the unique factorization)."""
    M = np.asarray(M)
    Q, R = np.linalg.qr(M, mode="reduced")
    Q, R = _positive_diagonal(Q, R)
    d = np.abs(np.diag(R))
    if d.size and (d[0] == 0 or np.min(d) < 1e-12 * d[0]):
        raise RankDeficient("matrix is not of full column rank")
    return QRFactors(Q, R, np.arange(M.shape[1]))


def rrqr(M: np.ndarray, tol: float = RRQR_TOL):
    """Column-pivoted QR; returns ``(QRFactors, numerical_rank)``.

    The numerical rank is the number of leading ``|r_kk| >= tol * |r_11|``.
    """
    M = np.asarray(M)
    Q, R, perm = sla.qr(M, mode="economic", pivoting=True, check_finite=False)
    Q, R = _positive_diagonal(Q, R)
    d = np.abs(np.diag(R))
    if d.size == 0 or d[0] == 0:
        return QRFactors(Q, R, perm), 0
    rank = int(np.count_nonzero(d >= tol * d[0]))
    return QRFactors(Q, R, perm), rank


def gerschgorin_discs(M: np.ndarray):
    """List of ``(center, radius)`` row discs."""
    M = np.asarray(M)
    absM = np.abs(M)
    radii = absM.sum(axis=1) - np.abs(np.diag(M))
    return [(complex(c), float(r)) for c, r in zip(np.diag(M), radii)]


def small_eig(M: np.ndarray) -> np.ndarray:
    """All eigenvalues of a small square matrix (closed form up to 2x2)."""
    M = np.asarray(M, dtype=np.complex128)
    r = M.shape[0]
    if M.ndim != 2 or M.shape[1] != r:
        raise ValueError("small_eig needs a square matrix")
    if r > SMALL_EIG_LIMIT:
        raise ValueError(f"small_eig is limited to {SMALL_EIG_LIMIT}x{SMALL_EIG_LIMIT} blocks")
    if r == 0:
        return np.zeros(0, dtype=np.complex128)
    if r == 1:
        return M[0, :1].copy()
    if r == 2:
        a, b, c, d = M[0, 0], M[0, 1], M[1, 0], M[1, 1]
        half_tr = 0.5 * (a + d)
        disc = np.sqrt(0.25 * (a - d) ** 2 + b * c)
        e1 = half_tr + disc if abs(half_tr + disc) >= abs(half_tr - disc) else half_tr - disc
        # product form avoids cancellation in the smaller root
        e2 = (a * d - b * c) / e1 if e1 != 0 else 0j
        return np.array([e1, e2])
    if not np.all(np.isfinite(M)):
        raise NoConvergence("non-finite block")
    try:
        return np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc


def norms(M: np.ndarray):
    """``(one_norm, inf_norm, frobenius_norm)``."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0, 0.0, 0.0
    a = np.abs(M)
    return float(a.sum(axis=0).max()), float(a.sum(axis=1).max()), float(np.sqrt((a**2).sum()))


def inf_norm(M: np.ndarray) -> float:
    return float(np.abs(M).sum(axis=1).max()) if np.size(M) else 0.0
