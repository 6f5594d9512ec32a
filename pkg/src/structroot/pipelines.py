"""End-to-end root finders built from the sign iterations and the squaring maps.

Each pipeline returns a RootReport. Failures inside a phase are written to
``report.errors`` instead of being raised, so a batch of runs never stops on
one bad instance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import dense_linalg as dl
from . import matrix_sign as ms
from .eigenspace import (
    REAL_FLOOR,
    NearRealFilter,
    compress,
    dominant_eigenspace,
    filter_real,
    rayleigh_quotient_iteration,
)
from .errors import BudgetExceeded, NoDominance, RootFindingError
from .poly_core import Polynomial, cauchy_bound, evaluate, reverse
from .spectral_maps import MapConfig, squaring_to_dominance

PADE_MAX_STEPS = 12
R_PLUS = 10
ORACLE_POINTS_PER_DEGREE = 10_000
ORACLE_TOL = 1e-12
EMPTY_TOL = 1e-6


@dataclass
class RealRoot:
    value: float
    residual: float
    refined: bool = False
    crude: float | None = None


@dataclass
class ComplexRoot:
    value: complex
    residual: float
    refined: bool = False


@dataclass
class RootReport:
    poly_id: str
    method: str
    real_roots: list = field(default_factory=list)
    complex_roots: list = field(default_factory=list)
    iterations: dict = field(default_factory=dict)
    recovery: float | None = None
    recovery_refined: float | None = None
    errors: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    def all_roots(self) -> np.ndarray:
        vals = [r.value for r in self.real_roots] + [r.value for r in self.complex_roots]
        return np.asarray(vals, dtype=np.complex128)

    def records(self) -> list:
        """One dict per root: ``re, im, residual, method, iterations``."""
        its = ";".join(f"{k}={v}" for k, v in self.iterations.items())
        out = []
        for r in self.real_roots + self.complex_roots:
            z = complex(r.value)
            out.append(dict(re=z.real, im=z.imag, residual=r.residual, method=self.method, iterations=its))
        return out

    def to_text(self) -> str:
        lines = [f"# {self.poly_id} method={self.method}"]
        lines += [f"# {k}: {v}" for k, v in self.iterations.items()]
        if self.recovery is not None:
            lines.append(f"# recovered: {self.recovery:.1f}%")
        if self.recovery_refined is not None:
            lines.append(f"# recovered with refinement: {self.recovery_refined:.1f}%")
        lines += [f"# error in {k}: {v}" for k, v in self.errors.items()]
        for r in self.real_roots:
            flag = " refined" if r.refined else ""
            lines.append(f"real {r.value:.15g} residual {r.residual:.3e}{flag}")
        for r in self.complex_roots:
            flag = " refined" if r.refined else ""
            lines.append(f"complex {r.value.real:.15g} {r.value.imag:+.15g}i residual {r.residual:.3e}{flag}")
        return "\n".join(lines) + "\n"


def normalized_residual(p: Polynomial, z) -> np.ndarray:
    """``|p(z)| / (max|p_i| max(1, |z|)**n)``, evaluated without overflow."""
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    out = np.empty(z.size)
    inner = np.abs(z) <= 1.0
    scale = np.max(np.abs(p.coeffs))
    out[inner] = np.abs(evaluate(p, z[inner]))
    # |p(z)| / |z|**n = |rev(p)(1/z)|
    out[~inner] = np.abs(evaluate(reverse(p), 1.0 / z[~inner]))
    return out / scale


# -- oracle ----------------------------------------------------------------------

def _horner(c: np.ndarray, x: np.ndarray) -> np.ndarray:
    acc = np.full(x.shape, c[-1])
    for coef in c[-2::-1]:
        acc *= x
        acc += coef
    return acc


def _sign_at(p: Polynomial, rev: Polynomial, x: np.ndarray) -> np.ndarray:
    """Sign of ``p(x)`` for real ``x``; large ``|x|`` goes through the reversed polynomial."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty(x.shape)
    inner = np.abs(x) <= 1.0
    out[inner] = np.sign(_horner(p.real_coeffs(), x[inner]))
    xo = x[~inner]
    # p(x) = x**n rev(1/x)
    parity = np.where(xo < 0, (-1.0) ** p.degree, 1.0)
    out[~inner] = parity * np.sign(_horner(rev.real_coeffs(), 1.0 / xo))
    return out


def _bisect(p, rev, a: float, b: float, sa: float, tol: float) -> float:
    while b - a > tol * max(1.0, abs(a)):
        m = 0.5 * (a + b)
        sm_ = _sign_at(p, rev, np.array([m]))[0]
        if sm_ == 0:
            return m
        if sm_ == sa:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def _fujiwara_bound(p: Polynomial) -> float:
    c = np.abs(p.coeffs)
    n = p.degree
    terms = [(c[n - k] / c[n]) ** (1.0 / k) for k in range(1, n)]
    terms.append((c[0] / (2 * c[n])) ** (1.0 / n))
    return 2.0 * max(terms) * (1 + 1e-12)


def oracle_real_roots(p: Polynomial, points_per_degree: int = ORACLE_POINTS_PER_DEGREE, cross_check: bool = True) -> np.ndarray:
    """Real roots by a sign-change scan over ``[-1-B, 1+B]`` and bisection to 1e-12.

    ``B`` is the Cauchy bound; an equally dense grid over the Fujiwara bound
    is merged in, since ``B`` can be far larger than every root. Roots of even multiplicity and pairs closer than
    the grid spacing produce no sign change and are missed. For degree up to
    64 the count is compared with the real eigenvalues of the companion matrix
    and a warning is issued on disagreement.
    """
    if not p.is_real:
        raise ValueError("oracle_real_roots needs real coefficients")
    if p.degree < 1:
        return np.zeros(0)
    rev = reverse(p)
    B = cauchy_bound(p)
    m = points_per_degree * p.degree + 1
    x = np.linspace(-1.0 - B, 1.0 + B, m)
    F = _fujiwara_bound(p)
    if F < B:
        # no root lies beyond the Fujiwara bound; rescan that interval at full density
        x = np.union1d(x[np.abs(x) <= F], np.linspace(-F, F, m))
    s = _sign_at(p, rev, x)
    roots = list(x[s == 0])
    nz = np.flatnonzero(s != 0)
    change = nz[:-1][s[nz[:-1]] != s[nz[1:]]]
    nxt = nz[1:][s[nz[:-1]] != s[nz[1:]]]
    for i, j in zip(change, nxt):
        if j == i + 1:
            roots.append(_bisect(p, rev, x[i], x[j], s[i], ORACLE_TOL))
    roots = np.sort(np.asarray(roots, dtype=np.float64))
    if cross_check and p.degree <= dl.SMALL_EIG_LIMIT:
        z = dl.small_eig(dl.companion_matrix(p))
        real, _, _ = filter_real(z, NearRealFilter(1e-8))
        if real.size != roots.size:
            warnings.warn(
                f"grid scan found {roots.size} real roots, companion eigenvalues suggest {real.size}",
                RuntimeWarning,
                stacklevel=2,
            )
    return roots


def match_fraction(computed, truth, decimals: int) -> float | None:
    """Percent of ``truth`` matched by ``computed`` within ``0.5 * 10**-decimals``.

    Matching is greedy by distance and one-to-one. None when ``truth`` is empty.
    """
    truth = np.asarray(truth, dtype=np.float64)
    if truth.size == 0:
        return None
    comp = np.asarray(computed, dtype=np.float64)
    tol = 0.5 * 10.0**-decimals
    pairs = sorted(
        (abs(c - t), i, j) for i, c in enumerate(comp) for j, t in enumerate(truth) if abs(c - t) <= tol
    )
    used_c, used_t = set(), set()
    for _, i, j in pairs:
        if i not in used_c and j not in used_t:
            used_c.add(i)
            used_t.add(j)
    return 100.0 * len(used_t) / truth.size


# -- real roots from the real sign iterations -----------------------------------

def real_candidates(C: np.ndarray, N: np.ndarray, r_plus: int, eps: float, seed):
    """Real eigenvalues of ``C`` read from the dominant eigenspace of ``I + N^2``.

    Returns ``(values, ritz_vectors)`` for the Ritz values that pass the real
    filter at ``eps``.
    """
    n = C.shape[0]
    with np.errstate(over="ignore", invalid="ignore"):
        W = np.eye(n) + N @ N
    if not np.all(np.isfinite(W)):
        raise NoDominance("I + N^2 overflowed")
    if dl.inf_norm(W) <= EMPTY_TOL * (1.0 + dl.inf_norm(N) ** 2):
        # every image sits at +-i: no real eigenvalues
        return np.zeros(0), []
    sub = dominant_eigenspace(W, min(r_plus, n), seed)
    res = compress(C, sub.basis)
    w, Y = np.linalg.eig(res.block)
    keep = real_mask(w, eps)
    vals = w[keep].real
    vecs = (sub.basis @ Y[:, keep]).T
    order = np.argsort(vals)
    return vals[order], [vecs[i] for i in order]


def real_mask(z, eps: float) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128)
    im = np.abs(z.imag)
    return (im <= REAL_FLOOR) | (im <= eps * np.abs(z))


def _stable(prev, cur, decimals: int) -> bool:
    if prev is None or prev.size != cur.size:
        return False
    return bool(np.all(np.abs(prev - cur) <= 0.5 * 10.0**-decimals))


def refine_real(C: np.ndarray, p: Polynomial, values, vectors) -> list:
    """Rayleigh quotient refinement that keeps a crude value unless RQ improves it.

    A refined value is accepted when it is real, its residual is no larger and
    it stays closer to its own starting value than to any other candidate.
    """
    values = np.asarray(values, dtype=np.float64)
    out = []
    for i, (lam0, v) in enumerate(zip(values, vectors)):
        r0 = float(normalized_residual(p, lam0)[0])
        root = RealRoot(float(lam0), r0, False, float(lam0))
        try:
            lam = rayleigh_quotient_iteration(C, lam0, v).eigenvalue
        except RootFindingError:
            out.append(root)
            continue
        others = np.delete(values, i)
        own = abs(lam.real - lam0)
        if abs(lam.imag) <= 1e-8 * max(1.0, abs(lam)) and (others.size == 0 or own < np.min(np.abs(others - lam.real))):
            r1 = float(normalized_residual(p, lam.real)[0])
            if r1 <= r0:
                root = RealRoot(float(lam.real), r1, True, float(lam0))
        out.append(root)
    return out


def real_roots_pipeline(
    p: Polynomial,
    newton_steps: int = 5,
    cfg: ms.SignIterConfig | None = None,
    refine: bool = True,
    seed=None,
    *,
    decimals: int = 3,
    epsilon_real: float = 1e-6,
    r_plus: int = R_PLUS,
    pade_max_steps: int = PADE_MAX_STEPS,
    truth=None,
    poly_id: str = "",
) -> RootReport:
    """Real roots through real Newton steps, real Padé steps and ``I + N^2``.

    The Padé phase stops once the candidate real set is unchanged to
    ``decimals`` places between consecutive steps. ``cfg.norm_control``
    compresses large iterates before each Padé step. With ``truth`` (sorted
    real roots) the report carries recovery percentages with and without the
    refinement.
    """
    if not p.is_real:
        raise ValueError("real_roots_pipeline needs real coefficients")
    if p.degree < 1:
        raise ValueError("degree must be at least 1")
    cfg = cfg or ms.SignIterConfig(variant="real_newton", norm_control=True, seed=seed)
    report = RootReport(poly_id, "sign-real")
    C = dl.companion_matrix(p)
    newton_cfg = replace(cfg, variant="real_newton", fixed_steps=newton_steps, seed=cfg.seed if cfg.seed is not None else seed)
    try:
        nres = ms.sign_real_newton(C, newton_cfg)
    except RootFindingError as exc:
        report.errors["newton"] = repr(exc)
        return report
    N = nres.sign_matrix
    report.iterations["newton_steps"] = nres.iters
    report.info["singular_shifts"] = nres.singular_shift_events

    prev, found = None, None
    for step in range(1, pade_max_steps + 1):
        if cfg.norm_control and dl.inf_norm(N) > ms.NORM_CONTROL_LIMIT:
            N = ms.norm_control(N)
        N = ms.real_pade_step(N)
        if not np.all(np.isfinite(N)):
            report.errors["pade"] = repr(ms.Diverged(f"real Padé iterate overflowed at step {step}"))
            break
        try:
            vals, vecs = real_candidates(C, N, r_plus, epsilon_real, seed)
        except RootFindingError as exc:
            report.errors["extract"] = repr(exc)
            prev = None
            continue
        report.errors.pop("extract", None)
        if _stable(prev, vals, decimals):
            found = (step, vals, vecs)
            break
        prev = vals
    if found is None:
        report.errors.setdefault("pade", f"candidates not stable after {pade_max_steps} steps")
        return report
    step, vals, vecs = found
    report.iterations["pade_steps"] = step
    if refine:
        report.real_roots = refine_real(C, p, vals, vecs)
    else:
        res = normalized_residual(p, vals) if vals.size else []
        report.real_roots = [RealRoot(float(v), float(r), False, float(v)) for v, r in zip(vals, res)]
    if truth is not None:
        report.recovery = match_fraction([r.crude for r in report.real_roots], truth, decimals)
        report.recovery_refined = match_fraction([r.value for r in report.real_roots], truth, decimals)
    return report


# -- repeated squaring ---------------------------------------------------------------

def squaring_pipeline(
    p: Polynomial,
    s: float | None = None,
    cfg: MapConfig | None = None,
    seed=None,
    *,
    r_plus: int = R_PLUS,
    max_squarings: int = 30,
    poly_id: str = "",
) -> RootReport:
    """Roots of largest modulus of ``C_p - sI`` by squaring until dominance.

    ``s`` defaults to a uniform draw on ``[-1, 1]``. A NoDominance failure is
    retried once with a fresh shift. ``cfg.h_plus`` caps the squarings when
    given a config.
    """
    if not p.is_real:
        raise ValueError("squaring_pipeline needs real coefficients")
    rng = np.random.default_rng(seed)
    if cfg is not None:
        max_squarings = cfg.h_plus
    report = RootReport(poly_id, "squaring")
    shift = float(rng.uniform(-1.0, 1.0)) if s is None else float(s)
    for attempt in range(2):
        try:
            res = squaring_to_dominance(p, shift, r_plus, max_squarings, seed)
            break
        except RootFindingError as exc:
            report.errors[f"attempt{attempt + 1}"] = repr(exc)
            shift = float(rng.uniform(-1.0, 1.0))
    else:
        return report
    report.iterations["squarings"] = res.info["squarings"]
    report.info.update(dimension=res.dimension, shift=res.info["shift"], attempts=attempt + 1)
    z = res.eigenvalues
    resid = normalized_residual(p, z)
    for val, r, is_real in zip(z, resid, real_mask(z, 1e-6)):
        if is_real:
            report.real_roots.append(RealRoot(float(val.real), float(r)))
        else:
            report.complex_roots.append(ComplexRoot(complex(val), float(r)))
    return report


# -- complex roots by quad-tree ------------------------------------------------------

def _box_roots(qt: ms.QuadTree, C: np.ndarray, box: ms.Box, count: int):
    P = qt.projector(box)
    factors, _ = dl.rrqr(P)
    U = factors.Q[:, :count]
    res = compress(C, U)
    w, Y = np.linalg.eig(res.block)
    return w, U @ Y


def _refine_complex(C: np.ndarray, w: np.ndarray, V: np.ndarray) -> tuple:
    out, flags = w.copy(), np.zeros(w.size, dtype=bool)
    for i in range(w.size):
        try:
            lam = rayleigh_quotient_iteration(C, w[i], V[:, i]).eigenvalue
        except RootFindingError:
            continue
        others = np.delete(out, i)
        # keep the crude value when refinement slides onto a neighbour
        if others.size == 0 or abs(lam - w[i]) < np.min(np.abs(others - lam)):
            out[i], flags[i] = lam, True
    return out, flags


def complex_roots_pipeline(
    p: Polynomial,
    box=None,
    cfg: ms.SignIterConfig | None = None,
    refine: bool = True,
    seed=None,
    *,
    target_count: int = 2,
    min_width: float = 1e-6,
    poly_id: str = "",
) -> RootReport:
    """All roots: quad-tree boxes of at most ``target_count`` roots, then a projector basis per box.

    A box whose subdivision fails (budget or an ambiguous count) is not split
    further; its roots are still read from its own projector.
    """
    cfg = cfg or ms.SignIterConfig()
    report = RootReport(poly_id, "quadtree")
    if p.degree < 1:
        return report
    C = dl.companion_matrix(p)
    if box is None:
        box = ms.Box.square(0.0, cauchy_bound(p) * 1.01)
    elif not isinstance(box, ms.Box):
        box = ms.Box.square(*box)
    qt = ms.QuadTree(C, cfg, seed=seed)
    try:
        box, total = qt.safe_count(box)
    except RootFindingError as exc:
        report.errors["count"] = repr(exc)
        return report
    leaves, stack = [], [(box, total)] if total else []
    while stack:
        b, c = stack.pop()
        if c <= target_count or b.width < min_width:
            leaves.append((b, c))
            continue
        try:
            stack.extend((k, kc) for k, kc in qt.split(b, c) if kc > 0)
        except (BudgetExceeded, RootFindingError) as exc:
            report.errors[f"box {b.center:.6g}"] = repr(exc)
            leaves.append((b, c))
    vals, refined = [], []
    for b, c in leaves:
        try:
            w, V = _box_roots(qt, C, b, c)
        except RootFindingError as exc:
            report.errors[f"box {b.center:.6g}"] = repr(exc)
            continue
        if refine:
            w, flags = _refine_complex(C, w, V)
        else:
            flags = np.zeros(w.size, dtype=bool)
        vals.extend(w)
        refined.extend(flags)
    report.iterations["boxes"] = len(leaves)
    report.iterations["sign_evaluations"] = qt.evaluations
    vals = np.asarray(vals, dtype=np.complex128)
    resid = normalized_residual(p, vals) if vals.size else []
    for z, r, f in zip(vals, resid, refined):
        if abs(z.imag) <= 1e-10 * max(1.0, abs(z)):
            report.real_roots.append(RealRoot(float(z.real), float(r), bool(f)))
        else:
            report.complex_roots.append(ComplexRoot(complex(z), float(r), bool(f)))
    return report


def hausdorff(a, b) -> float:
    """Hausdorff distance between two finite point sets in the complex plane."""
    a = np.asarray(a, dtype=np.complex128).ravel()
    b = np.asarray(b, dtype=np.complex128).ravel()
    if a.size == 0 or b.size == 0:
        return 0.0 if a.size == b.size else np.inf
    D = np.abs(a[:, None] - b[None, :])
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))
