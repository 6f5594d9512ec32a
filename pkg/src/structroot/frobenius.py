"""Arithmetic in the algebra generated by a companion matrix.

An element ``q(C_p)`` is stored as its residue ``q mod p`` (degree < n). The
companion matrix acts on coefficient vectors as multiplication by ``x`` modulo
``p``, so products and matrix-vector products are polynomial products followed
by a reduction; both run through FFTs. Reduction uses the reversed modulus and
a Newton power-series inverse of it, computed once per modulus.
"""

from __future__ import annotations

import numpy as np

from . import dense_linalg
from .errors import (
    AlgebraOverflow,
    DimensionMismatch,
    ModulusMismatch,
    SingularElement,
    SingularMatrix,
)
from .poly_core import Polynomial, evaluate, poly_mul

SINGULAR_TOL = 1e-12
DENSE_NORM_LIMIT = 512


def _series_inverse(g: np.ndarray, m: int) -> np.ndarray:
    """First ``m`` coefficients of ``1 / g(x)`` (requires ``g[0] != 0``)."""
    h = np.array([1.0 / g[0]], dtype=np.complex128)
    k = 1
    while k < m:
        k = min(2 * k, m)
        gh = poly_mul(g[:k], h)[:k]
        corr = -gh
        corr[0] += 2.0
        h = poly_mul(h, corr)[:k]
    return h[:m]


class Modulus:
    """A defining polynomial together with its cached reduction data."""

    __slots__ = ("poly", "n", "monic", "_rev_inv", "_key")

    def __init__(self, p: Polynomial):
        if p.degree < 1:
            raise ValueError("modulus must have degree >= 1")
        self.poly = p
        self.n = p.degree
        self.monic = p.coeffs / p.coeffs[-1]
        self._rev_inv = np.zeros(0, dtype=np.complex128)
        self._key = hash(p)

    def __eq__(self, other):
        return self is other or (isinstance(other, Modulus) and self.poly == other.poly)

    def __hash__(self):
        return self._key

    def rev_inverse(self, m: int) -> np.ndarray:
        if self._rev_inv.size < m:
            self._rev_inv = _series_inverse(self.monic[::-1], m)
        return self._rev_inv[:m]

    def reduce(self, f: np.ndarray) -> np.ndarray:
        """Residue of the coefficient vector ``f`` modulo the monic modulus."""
        n = self.n
        f = np.asarray(f, dtype=np.complex128)
        if f.size <= n:
            return np.pad(f, (0, n - f.size))
        m = f.size - n  # quotient length
        q_rev = poly_mul(f[::-1][:m], self.rev_inverse(m))[:m]
        q = q_rev[::-1]
        low = poly_mul(q, self.monic[:n])[:n]
        return f[:n] - low


def _as_modulus(p) -> Modulus:
    return p if isinstance(p, Modulus) else Modulus(p)


class FrobeniusElement:
    """Residue ``r`` (length n) representing ``r(C_p)``."""

    __slots__ = ("residue", "modulus")

    def __init__(self, residue, modulus: Modulus):
        r = np.asarray(residue, dtype=np.complex128)
        if r.size != modulus.n:
            r = modulus.reduce(r)
        r.setflags(write=False)
        self.residue = r
        self.modulus = modulus

    @property
    def n(self) -> int:
        return self.modulus.n

    def _check(self, other: "FrobeniusElement"):
        if not (self.modulus == other.modulus):
            raise ModulusMismatch("elements belong to algebras of different polynomials")

    def __add__(self, other):
        if isinstance(other, FrobeniusElement):
            self._check(other)
            return FrobeniusElement(self.residue + other.residue, self.modulus)
        r = self.residue.copy()
        r[0] += other
        return FrobeniusElement(r, self.modulus)

    __radd__ = __add__

    def __neg__(self):
        return FrobeniusElement(-self.residue, self.modulus)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, FrobeniusElement):
            return mul(self, other)
        return FrobeniusElement(self.residue * other, self.modulus)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return FrobeniusElement(self.residue / scalar, self.modulus)

    def __repr__(self):
        return f"FrobeniusElement(n={self.n}, residue={np.array2string(self.residue, precision=3)})"


def identity(p) -> FrobeniusElement:
    mod = _as_modulus(p)
    r = np.zeros(mod.n, dtype=np.complex128)
    r[0] = 1.0
    return FrobeniusElement(r, mod)


def from_poly(q: Polynomial, p) -> FrobeniusElement:
    """Embed ``q`` as ``q(C_p)``."""
    mod = _as_modulus(p)
    return FrobeniusElement(mod.reduce(q.coeffs), mod)


def mul(a: FrobeniusElement, b: FrobeniusElement) -> FrobeniusElement:
    a._check(b)
    return FrobeniusElement(a.modulus.reduce(poly_mul(a.residue, b.residue)), a.modulus)


def apply_to_vector(a: FrobeniusElement, v) -> np.ndarray:
    """``to_dense(a) @ v`` without forming the matrix.

    The companion matrix shifts coefficient vectors, so ``a(C_p) v`` is the
    residue of the product polynomial ``a(x) v(x)``.
    """
    v = np.asarray(v, dtype=np.complex128)
    if v.shape != (a.n,):
        raise DimensionMismatch(f"vector of length {v.size} for an algebra of size {a.n}")
    return a.modulus.reduce(poly_mul(a.residue, v))


def to_dense(a: FrobeniusElement) -> np.ndarray:
    """Dense ``n x n`` image ``a(C_p)``; column ``j`` is the residue of ``x**j a``."""
    n = a.n
    c = a.modulus.monic
    out = np.empty((n, n), dtype=np.complex128)
    col = a.residue.copy()
    for j in range(n):
        out[:, j] = col
        top = col[-1]
        col = np.concatenate(([0j], col[:-1])) - top * c[:n]
    return out


def _norm_inf(a: FrobeniusElement) -> float:
    if a.n <= DENSE_NORM_LIMIT:
        return dense_linalg.inf_norm(to_dense(a))
    # coefficient 1-norm bounds the dense norm only up to a modulus-dependent factor
    return float(np.abs(a.residue).sum())


def _poly_divmod(num: np.ndarray, den: np.ndarray):
    """Long division of coefficient vectors (constant term first), den monic."""
    num = num.copy()
    dn = den.size - 1
    if num.size - 1 < dn:
        return np.zeros(1, dtype=np.complex128), num
    q = np.zeros(num.size - dn, dtype=np.complex128)
    for k in range(num.size - 1, dn - 1, -1):
        coef = num[k]
        q[k - dn] = coef
        num[k - dn : k + 1] -= coef * den
    return q, num[:dn] if dn else np.zeros(1, dtype=np.complex128)


def _trim(v: np.ndarray, scale: float, tol: float) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > tol * scale)
    return v[: nz[-1] + 1] if nz.size else v[:0]


def invert_euclid(a: FrobeniusElement) -> FrobeniusElement:
    """Inverse by the extended Euclidean algorithm with monic remainders."""
    mod = a.modulus
    scale = max(np.max(np.abs(a.residue)), 1.0)
    r0 = mod.monic.copy()
    r1 = _trim(a.residue.copy(), scale, SINGULAR_TOL)
    if r1.size == 0:
        raise SingularElement("zero element")
    s0 = np.zeros(1, dtype=np.complex128)
    s1 = np.ones(1, dtype=np.complex128)
    while r1.size > 1:
        lead = r1[-1]
        r1m, s1m = r1 / lead, s1 / lead
        q, rem = _poly_divmod(r0, r1m)
        rscale = max(np.max(np.abs(r0)), 1.0)
        rem = _trim(rem, rscale, SINGULAR_TOL)
        qs = poly_mul(q, s1m)
        size = max(qs.size, s0.size)
        s_new = np.pad(s0, (0, size - s0.size)) - np.pad(qs, (0, size - qs.size))
        r0, s0 = r1m, s1m
        r1, s1 = rem, s_new
        if r1.size == 0:
            raise SingularElement(f"gcd with the modulus has degree {r0.size - 1}")
    return FrobeniusElement(mod.reduce(s1 / r1[0]), mod)


def invert_solve(a: FrobeniusElement) -> FrobeniusElement:
    """Inverse from the structured system ``a(C_p) b = e_1``.

    ``b(C_p) e_1`` is the coefficient vector of ``b``, so the inverse residue
    is the solution of one linear system with the dense image of ``a``.
    """
    A = to_dense(a)
    e1 = np.zeros(a.n, dtype=np.complex128)
    e1[0] = 1.0
    try:
        b = dense_linalg.lu_solve(A, e1)
    except SingularMatrix as exc:
        raise SingularElement(str(exc)) from exc
    if not np.all(np.isfinite(b)):
        raise SingularElement("element is numerically singular")
    return FrobeniusElement(b, a.modulus)


def invert(a: FrobeniusElement, method: str = "solve") -> FrobeniusElement:
    if method == "euclid":
        return invert_euclid(a)
    return invert_solve(a)


def invert_linear(alpha: complex, beta: complex, p) -> FrobeniusElement:
    """Inverse of ``alpha x + beta`` in O(n) by synthetic division.

    With ``c = -beta/alpha`` and ``p(x) - p(c) = (x - c) q(x)`` the inverse is
    ``-q / (alpha p(c))``.
    """
    mod = _as_modulus(p)
    c = -beta / alpha
    monic = mod.monic
    n = mod.n
    q = np.empty(n, dtype=np.complex128)
    acc = 0j
    for i in range(n, 0, -1):
        acc = acc * c + monic[i]
        q[i - 1] = acc
    pc = acc * c + monic[0]
    if abs(pc) < SINGULAR_TOL * max(np.max(np.abs(monic)), 1.0):
        raise SingularElement(f"{c} is (numerically) a root of the modulus")
    return FrobeniusElement(-q / (alpha * pc), mod)


def power_squaring(a: FrobeniusElement, h: int, scaled: bool = False):
    """Square ``h`` times; returns ``(element, scale_factors)``.

    With ``scaled`` each step is ``M <- M**2 / ||M||_inf**2`` and the applied
    factors are returned so the unscaled power can be recovered.
    """
    scales = []
    m = a
    for _ in range(h):
        if scaled:
            nrm = _norm_inf(m)
            if nrm == 0.0:
                raise AlgebraOverflow("element vanished during squaring")
            s = 1.0 / nrm**2
        else:
            s = 1.0
        m = mul(m, m) * s
        scales.append(s)
        if not np.all(np.isfinite(m.residue)):
            raise AlgebraOverflow("non-finite coefficient during repeated squaring")
    return m, scales


def cayley(p, a_scale: float = 1.0, t_shift: float = 0.0) -> FrobeniusElement:
    """``P = (a(C_p + tI) + iI)(a(C_p + tI) - iI)^{-1}`` as an algebra element."""
    mod = _as_modulus(p)
    num = mod.reduce(np.array([a_scale * t_shift + 1j, a_scale]))
    inv = invert_linear(a_scale, a_scale * t_shift - 1j, mod)
    return mul(FrobeniusElement(num, mod), inv)


def eigen_images(a: FrobeniusElement, roots) -> np.ndarray:
    """Values ``residue(lambda_j)``: the eigenvalues of ``to_dense(a)`` at known roots."""
    return evaluate(Polynomial(a.residue), np.asarray(roots))
