"""Dominant and dominated eigenspaces, compression to a small block, refinement.

Given a matrix function ``W = phi(M)`` whose dominant (or dominated) eigenspace
is the one associated with the wanted eigenvalues of ``M``, a random sketch of
``W`` plus a rank-revealing QR gives an orthonormal basis ``U``; the eigenvalues
of ``U^H M U`` then approximate the wanted eigenvalues of ``M``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

from . import dense_linalg as dl
from .errors import NoConvergence, NoDominance, SingularMatrix
from .frobenius import FrobeniusElement, apply_to_vector

DOMINANCE_GAP = 1e3
OVERSAMPLE = 2
REAL_FLOOR = 1e-10
NOISE_FLOOR = 1e-13


@dataclass
class EigenspaceResult:
    basis: np.ndarray
    block: np.ndarray
    eigenvalues: np.ndarray
    residual: float
    r_diag: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.basis.shape[1]


class Subspace(NamedTuple):
    basis: np.ndarray
    rank: int
    r_diag: np.ndarray


@dataclass(frozen=True)
class NearRealFilter:
    """``|Im z| <= epsilon |z|`` counts as real; up to ``band`` times that is near-real."""

    epsilon: float = 1e-6
    band: float = 1e3

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


class RQResult(NamedTuple):
    eigenvalue: complex
    vector: np.ndarray
    iterations: int
    residuals: list


def _apply(W, X: np.ndarray) -> np.ndarray:
    if isinstance(W, FrobeniusElement):
        return np.column_stack([apply_to_vector(W, X[:, j]) for j in range(X.shape[1])])
    if callable(W):
        return W(X)
    return np.asarray(W) @ X


def _dim(W) -> int:
    if isinstance(W, FrobeniusElement):
        return W.n
    return np.asarray(W).shape[0]


def random_multiplier(n: int, k: int, rng: np.random.Generator, toeplitz: bool = False) -> np.ndarray:
    """Gaussian ``n x k`` multiplier, dense or Toeplitz; resampled once if badly conditioned."""

    def draw():
        if toeplitz:
            col = rng.standard_normal(n)
            row = rng.standard_normal(k)
            row[0] = col[0]
            return sla.toeplitz(col, row)
        return rng.standard_normal((n, k))

    G = draw()
    if np.linalg.cond(G) > 1e6:
        G = draw()
    return G


def cut_rank(
    d: np.ndarray,
    r_plus: int,
    tol: float = dl.RRQR_TOL,
    gap: float = DOMINANCE_GAP,
    prefer: str = "gap",
    allow_full: bool = True,
) -> int:
    """Dimension of the dominant part read from an R diagonal.

    Two tests are tried in the order given by ``prefer``. The gap test takes
    the largest drop ``d_j / d_{j+1}`` among the first ``r_plus`` positions
    when it reaches ``gap``. The rank test takes the numerical rank at ``tol``
    when it is below the sketch width and at most ``r_plus``. A full-width
    sketch of at most ``r_plus`` columns with neither is taken whole unless
    ``allow_full`` is off. NoDominance when nothing applies.
    """
    if prefer not in ("gap", "rank"):
        raise ValueError("prefer must be 'gap' or 'rank'")
    if d.size == 0 or d[0] == 0:
        raise NoDominance("zero sketch")
    m = min(r_plus, d.size - 1)
    best = 1.0
    # directions at rounding level carry no information; clamp them to the floor
    # so a drop into noise cannot outrank a genuine drop above it
    d = np.maximum(d, NOISE_FLOOR * d[0])

    def by_gap():
        nonlocal best
        if m <= 0:
            return None
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = d[:m] / d[1 : m + 1]
        j = int(np.argmax(ratios))
        best = ratios[j]
        return j + 1 if best >= gap else None

    rank = int(np.count_nonzero(d >= tol * d[0]))

    def by_rank():
        return max(rank, 1) if rank < d.size and rank <= r_plus else None

    tests = (by_gap, by_rank) if prefer == "gap" else (by_rank, by_gap)
    for test in tests:
        r = test()
        if r is not None:
            return r
    if allow_full and rank == d.size <= r_plus:
        # the sketch spans the whole space and shows no drop: everything is dominant
        return rank
    raise NoDominance(f"no drop of {gap:g} within the first {r_plus} directions (best {best:.3g})")


def dominant_eigenspace(
    W,
    r_plus: int,
    seed=None,
    *,
    toeplitz: bool = False,
    sweeps: int = 1,
    tol: float = dl.RRQR_TOL,
    gap: float = DOMINANCE_GAP,
    oversample: int = OVERSAMPLE,
    prefer: str = "gap",
    allow_full: bool = True,
) -> Subspace:
    """Orthonormal basis of the strongly dominant eigenspace of ``W``.

    ``W`` may be a dense array, a FrobeniusElement (products then go through
    the structured mat-vec) or a callable acting on ``n x k`` blocks.
    """
    n = _dim(W)
    rng = np.random.default_rng(seed)
    k = min(n, r_plus + oversample)
    Y = _apply(W, random_multiplier(n, k, rng, toeplitz))
    for _ in range(sweeps - 1):
        Y = _apply(W, np.linalg.qr(Y)[0])
    if not np.all(np.isfinite(Y)):
        raise NoDominance("non-finite sketch")
    factors, _ = dl.rrqr(Y, tol)
    d = np.abs(np.diag(factors.R))
    r = cut_rank(d, r_plus, tol, gap, prefer, allow_full)
    return Subspace(factors.Q[:, :r], r, d)


def dominated_eigenspace(
    W,
    r_plus: int,
    iters: int = 50,
    seed=None,
    *,
    tol: float = dl.RRQR_TOL,
    gap: float = DOMINANCE_GAP,
    oversample: int = OVERSAMPLE,
    rotation_tol: float = 1e-8,
) -> Subspace:
    """Inverse orthogonal iteration for the strongly dominated eigenspace of ``W``."""
    W = np.asarray(W)
    n = W.shape[0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(W, check_finite=False)
    dl._pivot_check(lu, W)
    rng = np.random.default_rng(seed)
    k = min(n, r_plus + oversample)
    Q = np.linalg.qr(rng.standard_normal((n, k)))[0]
    prev = None
    for _ in range(iters):
        Z = sla.lu_solve((lu, piv), Q, check_finite=False)
        if not np.all(np.isfinite(Z)):
            raise SingularMatrix("inverse iteration overflowed")
        factors, _ = dl.rrqr(Z, tol)
        d = np.abs(np.diag(factors.R))
        r = cut_rank(d, r_plus, tol, gap)
        U = factors.Q[:, :r]
        if prev is not None and prev.shape[1] == r:
            rot = np.linalg.norm(U - prev @ (prev.conj().T @ U), 2)
            if rot < rotation_tol:
                return Subspace(U, r, d)
        prev = U
        Q = factors.Q[:, : min(k, factors.Q.shape[1])]
    raise NoConvergence(f"subspace still rotating after {iters} sweeps")


def compress(M, basis: np.ndarray) -> EigenspaceResult:
    """Block ``U^H M U`` for orthonormal ``U``, its eigenvalues and the invariance residual."""
    U = np.asarray(basis)
    MU = _apply(M, U.astype(np.complex128))
    L = U.conj().T @ MU
    resid = MU - U @ L
    scale = dl.inf_norm(np.asarray(M)) if not isinstance(M, FrobeniusElement) and not callable(M) else 1.0
    residual = dl.inf_norm(resid) / max(scale, np.finfo(float).tiny)
    return EigenspaceResult(U, L, dl.small_eig(L), float(residual))


def rayleigh_quotient_iteration(M, lam0: complex, v0, max_iters: int = 50, tol: float = 1e-10) -> RQResult:
    """Shifted inverse iteration with the shift updated to ``v^H M v``.

    Stops once ``||M v - lambda v|| <= tol ||M||_inf`` (``||v|| = 1``).
    """
    M = np.asarray(M, dtype=np.complex128)
    n = M.shape[0]
    scale = max(dl.inf_norm(M), np.finfo(float).tiny)
    v = np.asarray(v0, dtype=np.complex128)
    v = v / np.linalg.norm(v)
    lam = complex(lam0)
    eye = np.eye(n)
    history = []
    for it in range(1, max_iters + 1):
        try:
            w = dl.lu_solve(M - lam * eye, v)
        except SingularMatrix:
            # lam is an eigenvalue to working precision; nudge it off the spectrum
            w = np.linalg.solve(M - (lam + 1e-14 * scale) * eye, v)
        nw = np.linalg.norm(w)
        if not np.isfinite(nw) or nw == 0:
            raise NoConvergence("Rayleigh quotient iteration broke down")
        v = w / nw
        Mv = M @ v
        lam = complex(np.vdot(v, Mv))
        res = float(np.linalg.norm(Mv - lam * v))
        history.append(res)
        if res <= tol * scale:
            return RQResult(lam, v, it, history)
    raise NoConvergence(f"Rayleigh quotient iteration: residual {history[-1]:.3e} after {max_iters} steps")


def filter_real(eigenvalues, f: NearRealFilter = NearRealFilter()):
    """Split into ``(real, near_real, rest)``; real values are returned as floats."""
    z = np.asarray(eigenvalues, dtype=np.complex128).ravel()
    im = np.abs(z.imag)
    mod = np.abs(z)
    is_real = (im <= REAL_FLOOR) | (im <= f.epsilon * mod)
    is_near = ~is_real & (im <= f.band * f.epsilon * mod)
    return z[is_real].real.copy(), z[is_near], z[~is_real & ~is_near]


def recover_eigenvalues(M, W, r_plus: int, seed=None, **kwargs) -> EigenspaceResult:
    """Dominant eigenspace of ``W`` compressed against ``M``."""
    sub = dominant_eigenspace(W, r_plus, seed, **kwargs)
    res = compress(M, sub.basis)
    res.r_diag = sub.r_diag
    return res
