"""Maps of the spectrum that isolate the real eigenvalues of a companion matrix.

The Cayley map ``lambda -> (lambda + i)/(lambda - i)`` sends the real line onto
the unit circle. Powers keep the circle fixed and push every other image
towards 0 or infinity; the back-map ``M_k = i(P^k + I)(P^k - I)^{-1}`` and
``Q_k = M_k^2 + I`` then give real eigenvalues images >= 1 and nonreal ones
images near 0. ``T_k = P^k + P^{-k}`` instead confines real images to
``[-2, 2]`` and sends the rest far away.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import dense_linalg as dl
from . import frobenius as fb
from .eigenspace import (
    EigenspaceResult,
    NearRealFilter,
    compress,
    dominant_eigenspace,
    filter_real,
    rayleigh_quotient_iteration,
)
from .errors import NoConvergence, NoDominance, SingularElement, SingularMatrix, ZeroConstantTerm
from .poly_core import Polynomial, evaluate, max_root_radius, reverse, scale_variable, taylor_shift


@dataclass
class MapConfig:
    tau: float = 1e8
    h_plus: int = 20
    q_norm: str = "inf"
    a_scale: float = 1.0
    t_shift: float = 0.0
    use_trace_shift: bool = False
    retries: int = 2
    rq_on_power: bool = False
    real_epsilon: float = 1e-6
    # kept for fidelity with the heuristic's parameter list; never read
    v: float = 0.0
    w: float = 1.0

    def __post_init__(self):
        if self.tau <= 1:
            raise ValueError("tau must exceed 1")
        if self.h_plus < 1:
            raise ValueError("h_plus must be at least 1")
        if self.q_norm not in ("1", "inf"):
            raise ValueError("q_norm must be '1' or 'inf'")


# irrational relative nudge of ``a`` used when some mu**k lands exactly on 1
_A_NUDGE = (np.sqrt(5.0) - 1.0) / 20.0
_TAU_GROWTH = 1e4
_PERIODIC_LIMIT = 1.0 / np.sqrt(np.finfo(float).eps)


# -- scalar models -----------------------------------------------------------

def cayley_scalar(lam, a: float = 1.0, t: float = 0.0):
    z = a * (np.asarray(lam, dtype=np.complex128) + t)
    return (z + 1j) / (z - 1j)


def inverse_cayley_scalar(mu):
    mu = np.asarray(mu, dtype=np.complex128)
    return 1j * (mu + 1) / (mu - 1)


def mk_scalar(mu, k: int):
    mk = np.asarray(mu, dtype=np.complex128) ** k
    return 1j * (mk + 1) / (mk - 1)


def qk_scalar(beta):
    beta = np.asarray(beta, dtype=np.complex128)
    return beta**2 + 1


def tk_scalar(mu, k: int):
    mk = np.asarray(mu, dtype=np.complex128) ** k
    return mk + 1.0 / mk


# -- matrix maps ---------------------------------------------------------------

def trace_shift(M: np.ndarray):
    """Shift ``t = -Re tr(M)`` and scale ``a = t/n`` (``a = 1`` for a vanishing trace)."""
    M = np.asarray(M)
    n = M.shape[0]
    t = -float(np.real(np.trace(M)))
    a = t / n if abs(t) >= 1e-12 * n else 1.0
    return a, t


def _power(P, k: int):
    if k < 1:
        raise ValueError("power must be positive")
    if isinstance(P, fb.FrobeniusElement):
        result, base = None, P
        while k:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base * base
        return result
    return np.linalg.matrix_power(np.asarray(P), k)


def _inverse(X):
    if isinstance(X, fb.FrobeniusElement):
        return fb.invert(X)
    return dl.lu_invert(X)


def mk_map(P_power):
    """``i (P^k + I)(P^k - I)^{-1}`` in the representation of the input."""
    if isinstance(P_power, fb.FrobeniusElement):
        return (P_power + 1.0) * _inverse(P_power - 1.0) * 1j
    Pk = np.asarray(P_power, dtype=np.complex128)
    eye = np.eye(Pk.shape[0])
    return 1j * (Pk + eye) @ dl.lu_invert(Pk - eye)


def qk_map(Mk):
    if isinstance(Mk, fb.FrobeniusElement):
        return Mk * Mk + 1.0
    Mk = np.asarray(Mk)
    return Mk @ Mk + np.eye(Mk.shape[0])


def tk_map(P, k: int, P_inverse=None):
    """``P^k + P^{-k}``; pass ``P_inverse`` when it is cheaper than a general inversion."""
    Pk = _power(P, k)
    Pmk = _power(P_inverse, k) if P_inverse is not None else _inverse(Pk)
    return Pk + Pmk


def cayley_inverse(p, a_scale: float = 1.0, t_shift: float = 0.0) -> fb.FrobeniusElement:
    """``P^{-1} = (aM + tI - iI)(aM + tI + iI)^{-1}``, built with the O(n) linear inverse."""
    mod = p if isinstance(p, fb.Modulus) else fb.Modulus(p)
    num = mod.reduce(np.array([a_scale * t_shift - 1j, a_scale]))
    inv = fb.invert_linear(a_scale, a_scale * t_shift + 1j, mod)
    return fb.mul(fb.FrobeniusElement(num, mod), inv)


def _dense_norm(X, q: str) -> float:
    D = fb.to_dense(X) if isinstance(X, fb.FrobeniusElement) else np.asarray(X)
    one, inf, _ = dl.norms(D)
    return inf if q == "inf" else one


def _scaling(p: Polynomial, cfg: MapConfig):
    if cfg.use_trace_shift:
        return trace_shift(dl.companion_matrix(p))
    return cfg.a_scale, cfg.t_shift


# -- pipelines -----------------------------------------------------------------

class _PeriodicImage(SingularMatrix):
    """``P^k - I`` is singular: some eigenvalue image satisfies ``mu**k == 1``."""


def _dense_cayley(C: np.ndarray, a: float, t: float) -> np.ndarray:
    n = C.shape[0]
    Mh = a * (C + t * np.eye(n))
    return (Mh + 1j * np.eye(n)) @ dl.lu_invert(Mh - 1j * np.eye(n))


def _real_line_once(mod, C, a, t, tau, h_plus, cfg, r_plus, seed, dense):
    try:
        P = _dense_cayley(C, a, t) if dense else fb.cayley(mod, a, t)
    except SingularMatrix as exc:
        # a(lambda + t) = +-i for some root
        raise _PeriodicImage(str(exc)) from exc
    Pk, g = P, 0
    while True:
        nxt = Pk @ Pk if dense else Pk * Pk
        if not np.all(np.isfinite(nxt if dense else nxt.residue)):
            raise NoDominance("powers of the Cayley image overflowed")
        if _dense_norm(nxt, cfg.q_norm) > tau and g > 0:
            # keep the last power below tau: P^k - I stays invertible to working accuracy
            break
        Pk, g = nxt, g + 1
        if g >= h_plus:
            break
    try:
        Mk = mk_map(Pk)
    except SingularMatrix as exc:
        raise _PeriodicImage(str(exc)) from exc
    if _dense_norm(Mk, cfg.q_norm) > _PERIODIC_LIMIT:
        # a real image sits next to a k-th root of unity and would swamp the others
        raise _PeriodicImage("back-map image exceeds the working-precision limit")
    Qk = qk_map(Mk)
    if not dense:
        Qk = fb.to_dense(Qk)
    sub = dominant_eigenspace(Qk, r_plus, seed)
    res = _polish(Qk, C, sub.basis)
    res.r_diag = sub.r_diag
    if cfg.rq_on_power:
        res.eigenvalues = _rq_on_power(Pk if dense else fb.to_dense(Pk), C, sub.basis)
    _, _, rest = filter_real(res.eigenvalues, NearRealFilter(cfg.real_epsilon))
    if rest.size:
        raise NoDominance(f"dominant eigenspace of Q_k holds {rest.size} nonreal eigenvalues")
    res.info.update(squarings=g, k=2**g, a_scale=a, t_shift=t)
    return res


def _rq_on_power(Pk: np.ndarray, C: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Rayleigh quotient iteration on ``P^k`` from the basis columns; eigenvalues read off ``C_p``."""
    out = []
    for j in range(basis.shape[1]):
        v0 = basis[:, j]
        lam0 = np.vdot(v0, Pk @ v0) / np.vdot(v0, v0)
        try:
            v = rayleigh_quotient_iteration(Pk, lam0, v0).vector
        except NoConvergence:
            v = v0
        out.append(np.vdot(v, C @ v) / np.vdot(v, v))
    return np.asarray(out, dtype=np.complex128)


def real_line_squaring(
    p: Polynomial,
    cfg: MapConfig = MapConfig(),
    r_plus: int = 8,
    seed=None,
    dense: bool = False,
) -> EigenspaceResult:
    """Cayley map, repeated squaring, back-map to ``Q_k``, dominant eigenspace.

    Squaring stops once the next power would exceed ``tau`` in norm (or after
    ``h_plus`` squarings); the last power within the bound is back-mapped.

    The eigenspaces of ``Q_k`` are those of ``C_p``, so the basis is compressed
    against ``C_p`` itself and the reported eigenvalues need no unshifting.
    A dominant space holding nonreal eigenvalues counts as a failed isolation.
    On NoDominance the squaring budget is doubled (and ``tau`` raised 1e4-fold) up to
    ``cfg.retries`` times. If some real image hits ``mu**k == 1`` exactly the
    back-map is singular and the scale ``a`` is perturbed instead.
    ``dense`` runs the same stages on dense matrices (reference path).
    """
    if not p.is_real:
        raise ValueError("real_line_squaring needs a real polynomial")
    mod = None if dense else fb.Modulus(p)
    C = dl.companion_matrix(p)
    a, t = _scaling(p, cfg)
    tau, h_plus = cfg.tau, cfg.h_plus
    last = None
    for attempt in range(cfg.retries + 1):
        try:
            res = _real_line_once(mod, C, a, t, tau, h_plus, cfg, r_plus, seed, dense)
            res.info["attempts"] = attempt + 1
            return res
        except _PeriodicImage as exc:
            last = exc
            a *= 1.0 + _A_NUDGE
        except NoDominance as exc:
            last = exc
            h_plus *= 2
            tau *= _TAU_GROWTH
    raise last


def _polish(W: np.ndarray, C: np.ndarray, U: np.ndarray, sweeps: int = 10, tol: float = 1e-12) -> EigenspaceResult:
    """Subspace iteration on ``W`` from ``U`` until the compressed eigenvalues settle."""
    res = compress(C, U)
    for _ in range(sweeps):
        U = np.linalg.qr(W @ U)[0]
        new = compress(C, U)
        moved = np.max(np.abs(np.sort_complex(new.eigenvalues) - np.sort_complex(res.eigenvalues)))
        res = new
        if moved <= tol * max(1.0, np.max(np.abs(res.eigenvalues))):
            break
    return res


def mobius_isolation(
    p: Polynomial,
    cfg: MapConfig = MapConfig(),
    k: int = 8,
    r_plus: int = 8,
    seed=None,
    max_squarings: int = 12,
) -> EigenspaceResult:
    """Isolate real eigenvalues with ``T_k = P^k + P^{-k}``.

    Real images of ``T_k`` lie in ``[-2, 2]`` and the rest far outside, so the
    inverse of ``T_k`` is squared (with normalization) until its dominant
    eigenspace passes the gap test and compresses to real eigenvalues only.
    Squaring also widens gaps among the real images, so real roots whose
    images are far from 0 may be dropped; the method does not deflate them.
    """
    mod = fb.Modulus(p)
    C = dl.companion_matrix(p)
    a, t = _scaling(p, cfg)
    for attempt in range(cfg.retries + 1):
        try:
            Tk = tk_map(fb.cayley(mod, a, t), k, cayley_inverse(mod, a, t))
            W = dl.lu_invert(fb.to_dense(Tk))
            break
        except SingularMatrix:
            # some root maps to +-i, or an image satisfies mu**(2k) == -1
            if attempt == cfg.retries:
                raise
            a *= 1.0 + _A_NUDGE
    W = W / dl.inf_norm(W)
    f = NearRealFilter(cfg.real_epsilon)
    last = None
    for j in range(max_squarings + 1):
        if j:
            W = W @ W
            W = W / dl.inf_norm(W)
        try:
            sub = dominant_eigenspace(W, r_plus, seed)
        except NoDominance as exc:
            last = exc
            continue
        res = _polish(W, C, sub.basis)
        if filter_real(res.eigenvalues, f)[2].size:
            last = NoDominance("nonreal eigenvalues left in the dominant space")
            continue
        res.r_diag = sub.r_diag
        res.info.update(k=k, squarings=j, a_scale=a, t_shift=t)
        return res
    raise last


class _ShiftedSetup(NamedTuple):
    modulus: fb.Modulus
    base: fb.FrobeniusElement
    rho: float
    back: Callable[[np.ndarray], np.ndarray]


def _shifted_setup(p: Polynomial, s: complex, mode: str, rescale: bool) -> _ShiftedSetup:
    if mode not in ("largest", "nearest"):
        raise ValueError("mode must be 'largest' or 'nearest'")
    if mode == "largest":
        target = p
    else:
        if abs(evaluate(p, s)) <= fb.SINGULAR_TOL * np.max(np.abs(p.coeffs)):
            raise SingularElement(f"shift {s} is a root")
        target = reverse(taylor_shift(p, s))
    rho = _safe_radius(target) if rescale else 1.0
    if rho != 1.0:
        target = scale_variable(target, rho)
    mod = fb.Modulus(target)
    shift = s / rho if mode == "largest" else 0.0
    base = fb.FrobeniusElement(np.array([-shift, 1.0]), mod)
    if mode == "largest":
        return _ShiftedSetup(mod, base, rho, lambda z: rho * z)
    return _ShiftedSetup(mod, base, rho, lambda z: s + 1.0 / (rho * z))


def _safe_radius(p: Polynomial) -> float:
    """Largest root radius, clipped so the rescaled coefficients stay representable."""
    try:
        rho = max_root_radius(p)
    except ZeroConstantTerm:
        rho = 1.0
    cap = np.exp(600.0 / max(p.degree, 1))
    return float(min(max(rho, 1.0), cap))


def _extract(setup: _ShiftedSetup, W: fb.FrobeniusElement, r_plus: int, seed, prefer: str) -> EigenspaceResult:
    # a proper subspace is required: equal moduli must not pass as dominance
    r_plus = min(r_plus, W.n - 1)
    D = fb.to_dense(W)
    sub = dominant_eigenspace(D, r_plus, seed, prefer=prefer, allow_full=False)
    res = _polish(D, dl.companion_matrix(setup.modulus.poly), sub.basis)
    res.r_diag = sub.r_diag
    res.info["images"] = res.eigenvalues
    res.eigenvalues = setup.back(res.eigenvalues)
    return res


def shifted_power_pipeline(
    p: Polynomial,
    s: complex,
    mode: str = "largest",
    h: int = 12,
    r_plus: int = 4,
    seed=None,
    rescale: bool = True,
) -> EigenspaceResult:
    """``h`` scaled squarings of ``C_p - sI`` (largest) or of ``(C_p - sI)^{-1}`` (nearest).

    The nearest mode avoids the inversion: the companion matrix of
    ``rev(p(x + s))`` has eigenvalues ``1/(lambda_j - s)``. With ``rescale``
    the variable is first scaled so the largest root has modulus about 1;
    residues in the monomial basis lose accuracy like ``|lambda|**n`` otherwise.
    """
    setup = _shifted_setup(p, s, mode, rescale)
    W, _ = fb.power_squaring(setup.base, h, scaled=True)
    res = _extract(setup, W, r_plus, seed, "gap")
    res.info.update(mode=mode, shift=s, squarings=h, rho=setup.rho)
    return res


def squaring_to_dominance(
    p: Polynomial,
    s: complex,
    r_plus: int = 10,
    max_squarings: int = 30,
    seed=None,
    mode: str = "largest",
    rescale: bool = True,
) -> EigenspaceResult:
    """Square ``C_p - sI`` one step at a time until at most ``r_plus`` sketch directions survive.

    The test after each squaring is the numerical rank of the sketch (falling
    back to the gap test); ``info["squarings"]`` is the number of steps taken.
    """
    setup = _shifted_setup(p, s, mode, rescale)
    W = setup.base
    last = None
    for g in range(1, max_squarings + 1):
        W, _ = fb.power_squaring(W, 1, scaled=True)
        try:
            res = _extract(setup, W, r_plus, seed, "rank")
        except NoDominance as exc:
            last = exc
            continue
        res.info.update(mode=mode, shift=s, squarings=g, rho=setup.rho)
        return res
    raise NoDominance(f"no dominant eigenspace after {max_squarings} squarings ({last})")


def gerschgorin_squarings(p: Polynomial, cfg: MapConfig = MapConfig(), isolation: float = 1e8) -> int:
    """A-priori squaring count from the Gerschgorin discs of ``P`` (diagnostic).

    Uses the largest disc reach ``rho`` outside the unit circle and returns the
    smallest ``h`` with ``rho**(2**h) >= isolation``; 0 when no disc leaves it.
    """
    a, t = _scaling(p, cfg)
    P = fb.to_dense(fb.cayley(fb.Modulus(p), a, t))
    reach = max(abs(c) + r for c, r in dl.gerschgorin_discs(P))
    if reach <= 1.0:
        return 0
    return int(np.ceil(np.log2(np.log(isolation) / np.log(reach))))
