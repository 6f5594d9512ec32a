"""Univariate polynomials stored constant-term first.

Coefficients are kept as complex128 internally; a polynomial whose imaginary
parts are all exactly zero reports ``is_real``.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from scipy.special import comb

from .errors import LargeResidual, ZeroConstantTerm

DEFLATION_TOL = 1e-6


class Polynomial:
    """Immutable coefficient vector ``p[0] + p[1] x + ... + p[n] x**n``."""

    __slots__ = ("_c",)

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=np.complex128).ravel()
        if c.size == 0:
            c = np.zeros(1, dtype=np.complex128)
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else c[:1]
        c.setflags(write=False)
        self._c = c

    @classmethod
    def from_roots(cls, roots, leading=1.0):
        c = np.array([1.0 + 0j])
        for r in roots:
            c = np.convolve(c, [-r, 1.0])
        return cls(leading * c)

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int:
        return self._c.size - 1

    @property
    def leading(self) -> complex:
        return complex(self._c[-1])

    @property
    def is_real(self) -> bool:
        return not np.any(self._c.imag)

    def real_coeffs(self) -> np.ndarray:
        return self._c.real.copy()

    def __call__(self, x):
        return evaluate(self, x)

    def __len__(self):
        return self._c.size

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._c.shape == other._c.shape and bool(np.all(self._c == other._c))

    def __hash__(self):
        return hash(self._c.tobytes())

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return Polynomial(np.convolve(self._c, other._c))
        return Polynomial(self._c * other)

    __rmul__ = __mul__

    def __sub__(self, other):
        a, b = self._c, other._c
        m = max(a.size, b.size)
        return Polynomial(np.pad(a, (0, m - a.size)) - np.pad(b, (0, m - b.size)))

    def __repr__(self):
        return f"Polynomial(degree={self.degree}, coeffs={np.array2string(self._c, precision=4)})"


def evaluate(p: Polynomial, x):
    """Horner evaluation; ``x`` may be a scalar or an array."""
    x = np.asarray(x, dtype=np.complex128)
    acc = np.zeros_like(x)
    for c in p.coeffs[::-1]:
        acc = acc * x + c
    return acc[()] if acc.ndim == 0 else acc


def reverse(p: Polynomial) -> Polynomial:
    """Return ``x**n p(1/x)``; trailing zeros of the result are trimmed."""
    return Polynomial(p.coeffs[::-1])


def taylor_shift(p: Polynomial, s: complex) -> Polynomial:
    """Return ``q`` with ``q(x) = p(x + s)``.

    Uses the binomial expansion ``q_k = sum_i p_i C(i, k) s**(i-k)`` as an
    upper-triangular Toeplitz-times-diagonal product.
    """
    n = p.degree
    i = np.arange(n + 1)
    k = i[:, None]
    expo = i[None, :] - k
    mask = expo >= 0
    powers = np.where(mask, np.power(complex(s), np.where(mask, expo, 0)), 0)
    B = comb(i[None, :], k) * powers
    return Polynomial(B @ p.coeffs)


def poly_mul(a: np.ndarray, b: np.ndarray, method: str = "fft") -> np.ndarray:
    """Coefficient product of two vectors (constant term first)."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    m = a.size + b.size - 1
    if method == "direct" or min(a.size, b.size) <= 8:
        return np.convolve(a, b)
    size = 1 << (m - 1).bit_length()
    return np.fft.ifft(np.fft.fft(a, size) * np.fft.fft(b, size))[:m]


def graeffe_step(p: Polynomial, method: str = "direct") -> Polynomial:
    """One root-squaring step: ``(-1)**n (E(x)**2 - x O(x)**2)``.

    ``E`` and ``O`` hold the even and odd coefficients. Direct convolution is
    the default because coefficient magnitudes spread geometrically with every
    step and an FFT product only bounds the error relative to the largest one.
    """
    c = p.coeffs
    n = p.degree
    even, odd = c[0::2], c[1::2]
    e2 = poly_mul(even, even, method)
    out = np.zeros(n + 1, dtype=np.complex128)
    out[: e2.size] += e2
    if odd.size:
        o2 = poly_mul(odd, odd, method)
        out[1 : o2.size + 1] -= o2
    if n % 2:
        out = -out
    if p.is_real:
        out = out.real.astype(np.complex128)
    return Polynomial(out)


def _upper_hull(c: np.ndarray):
    """Vertices ``(i, log|c_i|)`` of the upper convex hull (Newton polygon)."""
    mags = np.abs(c)
    idx = np.flatnonzero(mags > 0)
    hull = []
    for i, y in zip(idx, np.log(mags[idx])):
        while len(hull) >= 2:
            (i1, y1), (i2, y2) = hull[-2], hull[-1]
            # drop the middle point when it lies on or below the chord
            if (y2 - y1) * (i - i1) <= (y - y1) * (i2 - i1):
                hull.pop()
            else:
                break
        hull.append((int(i), float(y)))
    return hull


def _newton_polygon_radii(c: np.ndarray) -> np.ndarray:
    """Log root moduli read off the Newton polygon, in increasing order."""
    out = []
    for (i1, y1), (i2, y2) in zip(_upper_hull(c), _upper_hull(c)[1:]):
        out.extend([-(y2 - y1) / (i2 - i1)] * (i2 - i1))
    return np.array(out)


def _hull_height(hull, x: int) -> float:
    for (i1, y1), (i2, y2) in zip(hull, hull[1:]):
        if i1 <= x <= i2:
            return y1 if x == i1 else y2 if x == i2 else y1 + (y2 - y1) * (x - i1) / (i2 - i1)
    raise ValueError("abscissa outside the polygon")


def _balanced(p: Polynomial):
    """``p(sigma x)`` with equal end coefficients, scaled to max 1, and ``log sigma``.

    Keeps both ends of the coefficient vector away from underflow while
    repeated squaring spreads the magnitudes.
    """
    c = p.coeffs
    n = p.degree
    log_sigma = (np.log(np.abs(c[0])) - np.log(np.abs(c[-1]))) / n
    logs = np.log(np.abs(np.where(c == 0, 1.0, c))) + np.arange(n + 1) * log_sigma
    out = np.where(c == 0, 0.0, c / np.abs(np.where(c == 0, 1.0, c)) * np.exp(logs - logs[c != 0].max()))
    return Polynomial(out), log_sigma


def root_radii_estimate(p: Polynomial, squarings: int) -> np.ndarray:
    """Estimate ``|lambda_j|`` for all roots, largest first.

    Runs ``squarings`` Graeffe steps (rescaling the variable and the
    coefficient vector before each one), reads ``2**k``-th powers of the moduli from the Newton polygon
    of the result, and takes ``2**k``-th roots. Neighbouring estimates closer
    than the polygon's own resolution ``(2n)**(1/2**k)`` are treated as one
    cluster and share the cluster's mean modulus.
    """
    if p.coeffs[0] == 0:
        raise ZeroConstantTerm("root radii need a nonzero constant term; shift first")
    q, shift = _balanced(p)
    for _ in range(squarings):
        q, s = _balanced(graeffe_step(q))
        shift = 2.0 * shift + s
    hull = _upper_hull(q.coeffs)
    log_r = _newton_polygon_radii(q.coeffs) + shift
    resolution = np.log(2.0 * p.degree)
    out = np.empty_like(log_r)
    start = 0
    for j in range(1, log_r.size + 1):
        if j == log_r.size or log_r[j] - log_r[j - 1] >= resolution:
            # cluster start..j-1: mean slope from the polygon ends
            out[start:j] = shift - (_hull_height(hull, j) - _hull_height(hull, start)) / (j - start)
            start = j
    return np.sort(np.exp(out / 2.0**squarings))[::-1]


def scale_variable(p: Polynomial, rho: float) -> Polynomial:
    """``p(rho x) / rho**n``: roots divided by ``rho``, leading coefficient kept."""
    n = p.coeffs.size - 1
    return Polynomial(p.coeffs * np.exp((np.arange(n + 1) - n) * np.log(rho)))


def max_root_radius(p: Polynomial, squarings: int = 4) -> float:
    """Estimate of the largest root modulus (zero roots are factored out first)."""
    c = p.coeffs
    nz = np.flatnonzero(c)
    if p.degree < 1 or nz[0] == p.degree:
        return 0.0
    q = Polynomial(c[nz[0] :])
    for _ in range(squarings):
        q = graeffe_step(q)
        q = Polynomial(q.coeffs / np.max(np.abs(q.coeffs)))
    return float(np.exp(np.max(_newton_polygon_radii(q.coeffs)) / 2.0**squarings))


def random_polynomial(n: int, seed: int) -> Polynomial:
    """Real coefficients i.i.d. uniform on [-1, 1]; leading one kept >= 1e-3 in modulus."""
    if n < 1:
        raise ValueError("degree must be at least 1")
    rng = np.random.default_rng(seed)
    c = rng.uniform(-1.0, 1.0, n + 1)
    while abs(c[-1]) < 1e-3:
        c[-1] = rng.uniform(-1.0, 1.0)
    return Polynomial(c)


def deflate_root(p: Polynomial, root: complex, tol: float = DEFLATION_TOL):
    """Synthetic division by ``x - root``.

    Returns ``(quotient, remainder)``; raises LargeResidual when the remainder
    exceeds ``tol * max|p_i|``.
    """
    c = p.coeffs
    n = p.degree
    q = np.empty(n, dtype=np.complex128)
    acc = 0j
    for i in range(n, 0, -1):
        acc = acc * root + c[i]
        q[i - 1] = acc
    rem = acc * root + c[0]
    if abs(rem) > tol * np.max(np.abs(c)):
        raise LargeResidual(f"|p({root})| = {abs(rem):.3e} is not a deflatable root", rem)
    return Polynomial(q), rem


def cauchy_bound(p: Polynomial) -> float:
    c = p.coeffs
    return 1.0 + float(np.max(np.abs(c[:-1] / c[-1]))) if p.degree else 0.0


# -- text format -------------------------------------------------------------

def format_polynomial(p: Polynomial) -> str:
    lines = [f"degree {p.degree}"]
    real = p.is_real
    for c in p.coeffs:
        lines.append(repr(float(c.real)) if real else f"{float(c.real)!r} {float(c.imag)!r}")
    return "\n".join(lines) + "\n"


def parse_polynomial(text: str) -> Polynomial:
    rows = [ln.split() for ln in io.StringIO(text) if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or rows[0][0] != "degree":
        raise ValueError("polynomial file must start with 'degree n'")
    n = int(rows[0][1])
    body = rows[1:]
    if len(body) != n + 1:
        raise ValueError(f"expected {n + 1} coefficient lines, got {len(body)}")
    coeffs = [complex(float(r[0]), float(r[1]) if len(r) > 1 else 0.0) for r in body]
    return Polynomial(coeffs)


def read_polynomial(path) -> Polynomial:
    return parse_polynomial(Path(path).read_text())


def write_polynomial(p: Polynomial, path) -> None:
    Path(path).write_text(format_polynomial(p))
