"""Matrix sign iterations, sign-based spectral projectors and quad-tree counting.

Two families are implemented. The complex iterations (Newton and the [2/0]
Padé map) converge to ``sign(A)``, which splits the spectrum by the imaginary
axis. Their real rewrites ``N <- (N - N^{-1})/2`` and
``N <- -(3N^5 + 10N^3 + 15N)/8`` never leave real arithmetic: images of real
eigenvalues stay real while nonreal ones are drawn to ``+-i``, so ``I + N^2``
annihilates the nonreal part of the spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import dense_linalg as dl
from . import frobenius as fb
from . import spectral_maps as sm
from .errors import AmbiguousCount, BudgetExceeded, Diverged, NoConvergence, SingularMatrix
from .poly_core import Polynomial, cauchy_bound

VARIANTS = ("newton", "newton_scaled", "pade20", "real_newton", "real_newton_scaled", "real_pade")
COUNT_GUARD = 0.1
NORM_CONTROL_LIMIT = 10.0
DIVERGENCE_RUN = 3
# condition estimate beyond which a real Newton iterate counts as singular
SINGULAR_COND = 1e-2 / np.finfo(float).eps


@dataclass
class SignIterConfig:
    variant: str = "newton"
    tol: float = 1e-10
    max_iters: int = 100
    shift_range: float | None = None  # None: 0.1 * ||M||_inf / n
    norm_control: bool = False
    fixed_steps: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.shift_range is not None and self.shift_range < 0:
            raise ValueError("shift_range must be non-negative")


@dataclass
class SignResult:
    sign_matrix: np.ndarray
    iters: int
    history: list = field(default_factory=list)
    singular_shift_events: int = 0


def _step_size(new: np.ndarray, old: np.ndarray) -> float:
    return dl.inf_norm(new - old)


def _converged(new: np.ndarray, step: float, tol: float) -> bool:
    return step <= tol * (1.0 + dl.inf_norm(new))


def _scaled_newton_step(N: np.ndarray, Ninv: np.ndarray, sign: float) -> np.ndarray:
    # alpha = ||N|| / ||N^{-1}||; the outer 1/sqrt(alpha) keeps the fixed points at +-1
    alpha = dl.inf_norm(N) / dl.inf_norm(Ninv)
    return 0.5 * (N + sign * alpha * Ninv) / np.sqrt(alpha)


# -- complex iterations --------------------------------------------------------

def sign_newton(A: np.ndarray, cfg: SignIterConfig = SignIterConfig()) -> SignResult:
    """Newton iteration ``N <- (N + N^{-1})/2``, optionally norm-scaled."""
    N = np.asarray(A, dtype=np.complex128).copy()
    scaled = cfg.variant == "newton_scaled"
    history = []
    for it in range(1, cfg.max_iters + 1):
        Ninv = dl.lu_invert(N)
        new = _scaled_newton_step(N, Ninv, 1.0) if scaled else 0.5 * (N + Ninv)
        step = _step_size(new, N)
        history.append(step)
        N = new
        if not np.all(np.isfinite(N)):
            raise NoConvergence("Newton iterate overflowed")
        if _converged(N, step, cfg.tol):
            return SignResult(N, it, history)
    raise NoConvergence(f"sign iteration: step {history[-1]:.3e} after {cfg.max_iters} iterations")


def sign_pade20(A: np.ndarray, cfg: SignIterConfig = SignIterConfig(variant="pade20")) -> SignResult:
    """Inversion-free iteration ``N <- (15I - 10N^2 + 3N^4) N / 8``.

    With ``cfg.fixed_steps`` exactly that many steps run, without the
    divergence check; eigenvalues outside the basin are then allowed to grow.
    """
    N = np.asarray(A, dtype=np.complex128).copy()
    eye = np.eye(N.shape[0])
    fixed = cfg.fixed_steps
    history = []
    growth = 0
    for it in range(1, (fixed or cfg.max_iters) + 1):
        N2 = N @ N
        new = (15 * eye - 10 * N2 + 3 * N2 @ N2) @ N / 8
        step = _step_size(new, N)
        if not np.isfinite(step):
            raise Diverged("Padé iterate overflowed")
        growth = growth + 1 if history and step > history[-1] else 0
        history.append(step)
        N = new
        if fixed is not None:
            continue
        if growth >= DIVERGENCE_RUN:
            raise Diverged(f"step size grew {DIVERGENCE_RUN} times in a row (now {step:.3e})")
        if _converged(N, step, cfg.tol):
            return SignResult(N, it, history)
    if fixed is not None:
        return SignResult(N, fixed, history)
    raise NoConvergence(f"Padé iteration: step {history[-1]:.3e} after {cfg.max_iters} iterations")


# -- real iterations -----------------------------------------------------------

def _shift_rng(cfg: SignIterConfig):
    return np.random.default_rng(cfg.seed)


def sign_real_newton(
    M: np.ndarray,
    cfg: SignIterConfig = SignIterConfig(variant="real_newton"),
    until: Callable[[np.ndarray], bool] | None = None,
) -> SignResult:
    """Real iteration ``N <- (N - N^{-1})/2`` (norm-scaled for ``real_newton_scaled``).

    Runs ``cfg.fixed_steps`` steps (5 when unset) or stops earlier once
    ``until(N)`` holds. A singular iterate gets a random real shift drawn from
    ``[-shift_range, shift_range]`` and the step is retried.
    """
    N = np.array(M, dtype=np.float64, copy=True)
    n = N.shape[0]
    steps = cfg.fixed_steps if cfg.fixed_steps is not None else 5
    r = cfg.shift_range if cfg.shift_range is not None else 0.1 * dl.inf_norm(N) / n
    scaled = cfg.variant == "real_newton_scaled"
    rng = _shift_rng(cfg)
    history, events = [], 0
    for it in range(1, steps + 1):
        for _ in range(cfg.max_iters):
            try:
                Ninv = dl.lu_invert(N)
                if dl.inf_norm(N) * dl.inf_norm(Ninv) > SINGULAR_COND:
                    # an eigenvalue sits at rounding level: the inverse is noise
                    raise SingularMatrix("iterate singular to working precision")
                break
            except SingularMatrix:
                events += 1
                N = N + rng.uniform(-r, r) * np.eye(n)
        else:
            raise NoConvergence(f"{events} singular iterates could not be shifted away")
        new = _scaled_newton_step(N, Ninv, -1.0) if scaled else 0.5 * (N - Ninv)
        history.append(_step_size(new, N))
        N = new
        if until is not None and until(N):
            return SignResult(N, it, history, events)
    return SignResult(N, steps, history, events)


def norm_control(N: np.ndarray) -> np.ndarray:
    """``N (N^2 + 2I)^{-1}``: real images land in ``[-sqrt(2)/4, sqrt(2)/4]``, +-i stay fixed."""
    N = np.asarray(N)
    return N @ dl.lu_invert(N @ N + 2.0 * np.eye(N.shape[0]))


def real_pade_step(N: np.ndarray) -> np.ndarray:
    # real images grow like |x|**5; overflow surfaces as non-finite entries
    with np.errstate(over="ignore", invalid="ignore"):
        N2 = N @ N
        return -(N @ (3.0 * N2 @ N2 + 10.0 * N2 + 15.0 * np.eye(N.shape[0]))) / 8.0


def sign_real_pade(
    M: np.ndarray,
    cfg: SignIterConfig = SignIterConfig(variant="real_pade"),
    until: Callable[[np.ndarray], bool] | None = None,
) -> SignResult:
    """Real iteration ``N <- -(3N^5 + 10N^3 + 15N)/8``.

    With ``cfg.fixed_steps`` set, exactly that many steps run (or fewer when
    ``until(N)`` holds) and growth of the real images is expected. Otherwise
    the step-size rule applies and 3 consecutive step increases raise Diverged.
    Norm control, when enabled, compresses any iterate with ``||N||_inf > 10``.
    """
    N = np.array(M, dtype=np.float64, copy=True)
    fixed = cfg.fixed_steps
    limit = fixed if fixed is not None else cfg.max_iters
    history, growth = [], 0
    for it in range(1, limit + 1):
        if cfg.norm_control and dl.inf_norm(N) > NORM_CONTROL_LIMIT:
            N = norm_control(N)
        new = real_pade_step(N)
        step = _step_size(new, N)
        if not np.isfinite(step):
            raise Diverged("real Padé iterate overflowed")
        growth = growth + 1 if history and step > history[-1] else 0
        history.append(step)
        N = new
        if until is not None and until(N):
            return SignResult(N, it, history)
        if fixed is None:
            if growth >= DIVERGENCE_RUN:
                raise Diverged(f"step size grew {DIVERGENCE_RUN} times in a row (now {step:.3e})")
            if _converged(N, step, cfg.tol):
                return SignResult(N, it, history)
    if fixed is not None:
        return SignResult(N, fixed, history)
    raise NoConvergence(f"real Padé iteration: step {history[-1]:.3e} after {limit} iterations")


def sign(A: np.ndarray, cfg: SignIterConfig = SignIterConfig()) -> SignResult:
    """Dispatch on ``cfg.variant``."""
    v = cfg.variant
    if v in ("newton", "newton_scaled"):
        return sign_newton(A, cfg)
    if v == "pade20":
        return sign_pade20(A, cfg)
    if v in ("real_newton", "real_newton_scaled"):
        return sign_real_newton(A, cfg)
    return sign_real_pade(A, cfg)


# -- basin relocation ------------------------------------------------------------

def basin_move(p: Polynomial, k: int, cfg: sm.MapConfig = sm.MapConfig()):
    """``0.1 T_k + iI`` and ``0.1 T_k - iI`` with ``T_k = P^k + P^{-k}``.

    Real roots map into the discs of radius 0.2 about ``+-i``; nonreal roots
    leave them once ``k`` is large.
    """
    mod = fb.Modulus(p)
    a, t = cfg.a_scale, cfg.t_shift
    if cfg.use_trace_shift:
        a, t = sm.trace_shift(dl.companion_matrix(p))
    T = fb.to_dense(sm.tk_map(fb.cayley(mod, a, t), k, sm.cayley_inverse(mod, a, t)))
    eye = np.eye(mod.n)
    return 0.1 * T + 1j * eye, 0.1 * T - 1j * eye


# -- projectors and counting ---------------------------------------------------------

def spectral_projectors(S) -> tuple:
    """``(I - S, I + S, I - S^2)`` for a sign matrix (or SignResult).

    ``(I - S)/2`` projects onto the left half-plane part, ``(I + S)/2`` onto the
    right one, and ``I - S^2`` vanishes when no eigenvalue sits on the axis.
    """
    S = S.sign_matrix if isinstance(S, SignResult) else np.asarray(S)
    eye = np.eye(S.shape[0])
    return eye - S, eye + S, eye - S @ S


def projector_ranks(S, tol: float = 1e-6) -> tuple:
    """Numerical ranks ``(p, q, r)`` of the three projectors, by rank-revealing QR.

    The threshold is absolute, ``tol * max(1, ||S||_inf)``: ``I - S^2`` of a
    converged sign is pure rounding noise and has no scale of its own.
    """
    S = S.sign_matrix if isinstance(S, SignResult) else np.asarray(S)
    floor = tol * max(1.0, dl.inf_norm(S))
    ranks = []
    for P in spectral_projectors(S):
        d = np.abs(np.diag(dl.rrqr(P, tol)[0].R))
        ranks.append(int(np.count_nonzero(d > floor)))
    return tuple(ranks)


def _rounded(x: float) -> int:
    r = round(x)
    if abs(x - r) >= COUNT_GUARD:
        raise AmbiguousCount(f"trace {x:.4f} is not close to an integer")
    return int(r)


def _matrix_of(p_or_M) -> np.ndarray:
    if isinstance(p_or_M, Polynomial):
        return dl.companion_matrix(p_or_M)
    return np.asarray(p_or_M)


def count_in_halfplane(p_or_M, alpha: complex = 1.0, sigma: complex = 0.0, cfg: SignIterConfig = SignIterConfig()):
    """Eigenvalues of ``alpha A - sigma I`` left and right of the imaginary axis.

    ``alpha = 1`` counts against the vertical line ``Re z = sigma``;
    ``alpha = -i`` counts against the horizontal line ``Im z = sigma``
    (``right`` is then the part above it).
    """
    A = _matrix_of(p_or_M)
    n = A.shape[0]
    S = sign_newton(alpha * A - sigma * np.eye(n), cfg).sign_matrix
    tr = np.trace(S)
    if abs(tr.imag) >= COUNT_GUARD:
        raise AmbiguousCount(f"sign trace has imaginary part {tr.imag:.3g}")
    left = _rounded((n - tr.real) / 2)
    return left, n - left


# -- quad-tree ---------------------------------------------------------------------

@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[x0, x1] x [y0, y1]``."""

    x0: float
    x1: float
    y0: float
    y1: float

    @classmethod
    def square(cls, center: complex, half_width: float) -> "Box":
        c = complex(center)
        return cls(c.real - half_width, c.real + half_width, c.imag - half_width, c.imag + half_width)

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    @property
    def width(self) -> float:
        return max(self.x1 - self.x0, self.y1 - self.y0)

    @property
    def half_width(self) -> float:
        return 0.5 * self.width

    def contains(self, z: complex) -> bool:
        return self.x0 <= z.real <= self.x1 and self.y0 <= z.imag <= self.y1


class BoxCount(NamedTuple):
    box: Box
    count: int


class QuadTree:
    """Sign evaluations per boundary line, cached, with a budget.

    The projector onto a box is the product of the four commuting half-plane
    projectors of its boundary lines; its trace is the eigenvalue count.
    """

    def __init__(self, A: np.ndarray, cfg: SignIterConfig = SignIterConfig(), budget: int | None = None, seed=None):
        self.A = np.asarray(A, dtype=np.complex128)
        self.n = self.A.shape[0]
        self.cfg = cfg
        self.budget = budget if budget is not None else 10 * self.n
        self.evaluations = 0
        self.rng = np.random.default_rng(seed)
        self._signs: dict = {}
        self.scale = max(dl.inf_norm(self.A), 1.0)

    def line_sign(self, axis: str, value: float) -> np.ndarray:
        key = (axis, float(value))
        if key not in self._signs:
            if self.evaluations >= self.budget:
                raise BudgetExceeded(f"more than {self.budget} sign evaluations")
            self.evaluations += 1
            alpha = 1.0 if axis == "x" else -1j
            eye = np.eye(self.n)
            self._signs[key] = sign_newton(alpha * self.A - value * eye, self.cfg).sign_matrix
        return self._signs[key]

    def projector(self, box: Box) -> np.ndarray:
        eye = np.eye(self.n)
        P = 0.5 * (eye + self.line_sign("x", box.x0))
        P = P @ (0.5 * (eye - self.line_sign("x", box.x1)))
        P = P @ (0.5 * (eye + self.line_sign("y", box.y0)))
        return P @ (0.5 * (eye - self.line_sign("y", box.y1)))

    def count(self, box: Box) -> int:
        tr = np.trace(self.projector(box))
        if abs(tr.imag) >= COUNT_GUARD:
            raise AmbiguousCount(f"box trace has imaginary part {tr.imag:.3g}")
        return _rounded(tr.real)

    def _jitter(self, width: float) -> float:
        return float(self.rng.uniform(-1, 1)) * 1e-3 * width

    def safe_count(self, box: Box, tries: int = 5):
        """Count, moving boundary lines slightly while the count is ambiguous."""
        last = None
        for _ in range(tries):
            try:
                return box, self.count(box)
            except (AmbiguousCount, NoConvergence, SingularMatrix) as exc:
                last = exc
                w = box.width
                box = Box(box.x0 - abs(self._jitter(w)), box.x1 + abs(self._jitter(w)),
                          box.y0 - abs(self._jitter(w)), box.y1 + abs(self._jitter(w)))
        raise AmbiguousCount(str(last))

    def split(self, box: Box, count: int, tries: int = 5):
        """Four children with counts adding up to ``count``; split lines are jittered if needed."""
        last = None
        for attempt in range(tries):
            c = box.center
            cx = c.real + (self._jitter(box.width) if attempt else 0.0)
            cy = c.imag + (self._jitter(box.width) if attempt else 0.0)
            kids = [
                Box(box.x0, cx, box.y0, cy),
                Box(cx, box.x1, box.y0, cy),
                Box(box.x0, cx, cy, box.y1),
                Box(cx, box.x1, cy, box.y1),
            ]
            try:
                counts = [self.count(k) for k in kids]
            except (AmbiguousCount, NoConvergence, SingularMatrix) as exc:
                last = exc
                continue
            if sum(counts) == count:
                return list(zip(kids, counts))
            last = AmbiguousCount(f"children hold {sum(counts)} of {count} eigenvalues")
        raise AmbiguousCount(str(last))

    def isolate(self, box: Box, target_count: int = 1, min_width: float = 1e-6) -> list:
        box, total = self.safe_count(box)
        if total == 0:
            return [BoxCount(box, 0)]
        out, stack = [], [(box, total)]
        while stack:
            b, c = stack.pop()
            if c <= target_count or b.width < min_width:
                out.append(BoxCount(b, c))
                continue
            stack.extend((k, kc) for k, kc in self.split(b, c) if kc > 0)
        return out


def quadtree_isolate(
    p: Polynomial,
    box=None,
    target_count: int = 1,
    min_width: float = 1e-6,
    cfg: SignIterConfig = SignIterConfig(),
    seed=None,
) -> list:
    """Boxes holding at most ``target_count`` roots each (or narrower than ``min_width``).

    ``box`` is ``(center, half_width)`` or a Box; by default a square about 0
    that contains every root.
    """
    A = dl.companion_matrix(p)
    if box is None:
        box = Box.square(0.0, cauchy_bound(p) * 1.01)
    elif not isinstance(box, Box):
        box = Box.square(*box)
    return QuadTree(A, cfg, seed=seed).isolate(box, target_count, min_width)


# -- scalar models ---------------------------------------------------------------------

def scalar_newton(lam: complex) -> complex:
    return 0.5 * (lam + 1.0 / lam)


def scalar_pade(lam: complex) -> complex:
    return lam * (15.0 - 10.0 * lam**2 + 3.0 * lam**4) / 8.0


def scalar_real_newton(lam: complex) -> complex:
    return 0.5 * (lam - 1.0 / lam)


def scalar_real_pade(lam: complex) -> complex:
    return -(3.0 * lam**5 + 10.0 * lam**3 + 15.0 * lam) / 8.0


def scalar_sign(lam: complex) -> float:
    return 1.0 if complex(lam).real > 0 else -1.0


def scalar_convergence_check(lam0: complex, variant: str = "newton", iters: int = 6) -> np.ndarray:
    """``|lambda_i - delta|`` for ``i = 0..iters`` of the scalar Newton or Padé recurrence.

    ``delta`` is the sign of ``lambda_0`` for Newton; for Padé it is the sign of
    each iterate, matching the per-step error of the cubic recurrence.
    """
    if variant not in ("newton", "pade"):
        raise ValueError("variant must be 'newton' or 'pade'")
    lam = complex(lam0)
    delta = scalar_sign(lam) if lam.real != 0 else 0.0
    step = scalar_newton if variant == "newton" else scalar_pade
    errs = []
    for i in range(iters + 1):
        d = delta if variant == "newton" else (scalar_sign(lam) if lam.real != 0 else 0.0)
        errs.append(abs(lam - d))
        if i < iters:
            lam = step(lam)
    return np.asarray(errs)


def newton_envelope(lam0: complex, iters: int = 6) -> np.ndarray:
    """Bound ``2 g^(2^i) / (1 - g^(2^i))`` with ``g = |(lambda - delta)/(lambda + delta)|``."""
    d = scalar_sign(lam0)
    g = abs((lam0 - d) / (lam0 + d))
    gi = g ** (2.0 ** np.arange(iters + 1))
    return 2 * gi / (1 - gi)


def pade_envelope(iters: int = 4) -> np.ndarray:
    """Bound ``(32/113)(113/128)^(3^i)`` for ``i = 0..iters`` (stated for ``i >= 1``)."""
    return (32 / 113) * (113 / 128) ** (3.0 ** np.arange(iters + 1))
