"""Benchmark input matrices: prescribed-spectrum SVD assemblies and the
eight ill-conditioned test classes 1n-4s.

Construction draw orders are fixed and documented per class so tests can
replay a stream and audit intermediate quantities.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import densela, randmats
from .errors import BisectFail, MaxRetries, NoRealRoot
from .randmats import _gen

__all__ = [
    "CLASS_TAGS",
    "SpectrumSpec",
    "TestClass",
    "beta_shift",
    "class_base",
    "gen_class",
    "make_spectrum",
    "svd_spec_matrix",
    "toeplitz_dense",
]

CLASS_TAGS = ("1n", "1s", "2n", "2s", "3n", "3s", "4n", "4s")

# beta for symmetric shifted classes; also the fallback when the
# nonsymmetric bisection cannot land inside its kappa window.
SYMMETRIC_BETA = 1e-16
NONSYM_KAPPA_RANGE = (1e16, 1e18)
# Measured-condition acceptance window for delivered class matrices.
KAPPA_WINDOW = (1e15, 5e18)
_DET_RETRIES = 50
_BISECT_STEPS = 60


@dataclass(frozen=True)
class SpectrumSpec:
    """Prescribed singular spectrum: a head rule over rho values + flat tail.

    head 'reciprocal': sigma_j = 1/j.  head 'sampled': sigma_1 = 1, the
    middle rho-2 values uniform in [0.1, 1) sorted, sigma_rho = 0.1.
    """

    n: int
    rho: int
    head: str = "reciprocal"
    tail_value: float = 1e-10

    def __post_init__(self):
        if not 1 <= self.rho <= self.n:
            raise ValueError("need 1 <= rho <= n")
        if self.head not in ("reciprocal", "sampled"):
            raise ValueError(f"unknown head rule {self.head!r}")
        if self.rho < self.n and not 0 < self.tail_value:
            raise ValueError("tail_value must be positive")


@dataclass(frozen=True)
class TestClass:
    """One of the eight input classes; r is the numerical nullity for
    classes 1-3 and the preprocessing rank for class 4 (whose own nullity
    is 1 by construction)."""

    __test__ = False  # not a pytest suite despite the name

    tag: str
    n: int
    r: int

    def __post_init__(self):
        tag = self.tag[1:] if self.tag.startswith("T") else self.tag
        object.__setattr__(self, "tag", tag)
        if tag not in CLASS_TAGS:
            raise ValueError(f"unknown class tag {self.tag!r}")
        if self.n < 4 or self.r < 1:
            raise ValueError("need n >= 4 and r >= 1")
        if tag[0] in "23" and self.n < 4 * self.r:
            raise ValueError("block classes need n >= 4r")
        if tag[0] == "1" and self.r > self.n - 2:
            raise ValueError("class 1 needs r <= n - 2")

    @property
    def symmetric(self):
        return self.tag.endswith("s")


def make_spectrum(spec, rng):
    """Singular values for spec, nonincreasing; draws only for 'sampled'."""
    if spec.head == "reciprocal":
        head = 1.0 / np.arange(1, spec.rho + 1)
    elif spec.rho == 1:
        head = np.array([1.0])
    elif spec.rho == 2:
        head = np.array([1.0, 0.1])
    else:
        gen = _gen(rng)
        mid = np.sort(gen.uniform(0.1, 1.0, spec.rho - 2))[::-1]
        head = np.concatenate([[1.0], mid, [0.1]])
    tail = np.full(spec.n - spec.rho, spec.tail_value)
    return np.concatenate([head, tail])


def svd_spec_matrix(spec, symmetric, rng):
    """Assemble A = S diag(sigma) T^T from Haar factors; returns (A, truth).

    Draw order: spectrum, then S, then T (T = S when symmetric).
    """
    gen = _gen(rng)
    sigma = make_spectrum(spec, gen)
    s = randmats.random_orthogonal(spec.n, gen)
    t = s if symmetric else randmats.random_orthogonal(spec.n, gen)
    a = s @ (sigma[:, None] * t.T)
    return a, densela.SvdTriple(s, sigma, t, True)


def toeplitz_dense(diagonals, m, n):
    """m x n Toeplitz from diagonal values indexed by i - j + (n - 1)."""
    diagonals = np.asarray(diagonals, dtype=np.float64)
    if diagonals.shape != (m + n - 1,):
        raise ValueError(f"need {m + n - 1} diagonal values")
    i = np.arange(m)[:, None]
    j = np.arange(n)[None, :]
    return diagonals[i - j + (n - 1)]


def _sym_toeplitz(first_col):
    first_col = np.asarray(first_col, dtype=np.float64)
    n = first_col.size
    idx = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    return first_col[idx]


def _det_ratio(a, ref_sign, ref_log):
    # det(a) / det(ref) through slogdet differences; avoids overflow.
    sgn, logdet = np.linalg.slogdet(a)
    if sgn == 0.0:
        return 0.0
    return sgn * ref_sign * math.exp(logdet - ref_log)


def _toeplitz_corner_nonsym(gen, n):
    # Diagonals i - j < n - 1 random; the corner a_{n,1} solves det A = 0.
    # det is affine in the corner: root from a two-point evaluation, then
    # Newton-polished (evaluation noise limits the raw root's accuracy).
    vals = gen.standard_normal(2 * n - 1)
    vals[2 * n - 2] = 0.0
    a = toeplitz_dense(vals, n, n)
    s0, l0 = np.linalg.slogdet(a)
    if s0 == 0.0:
        return a  # already singular with corner 0
    a[n - 1, 0] = 1.0
    slope = _det_ratio(a, s0, l0) - 1.0  # (d1 - d0) / d0
    if abs(slope) < 1e-12:
        raise NoRealRoot("degenerate corner slope")
    x = -1.0 / slope
    for _ in range(3):
        a[n - 1, 0] = x
        x -= _det_ratio(a, s0, l0) / slope
    a[n - 1, 0] = x
    return a


def _toeplitz_corner_sym(gen, n):
    # Symmetric Toeplitz; the mirrored corner entry makes det A = 0, a
    # quadratic condition.  No real root -> NoRealRoot (caller retries).
    body = gen.standard_normal(n - 1)

    def assemble(x):
        return _sym_toeplitz(np.concatenate([body, [x]]))

    s0, l0 = np.linalg.slogdet(assemble(0.0))
    if s0 == 0.0:
        return assemble(0.0)
    r_plus = _det_ratio(assemble(1.0), s0, l0)
    r_minus = _det_ratio(assemble(-1.0), s0, l0)
    quad = (r_plus + r_minus) / 2.0 - 1.0
    lin = (r_plus - r_minus) / 2.0
    if abs(quad) < 1e-12:
        if abs(lin) < 1e-12:
            raise NoRealRoot("degenerate corner polynomial")
        x = -1.0 / lin
    else:
        disc = lin * lin - 4.0 * quad
        if disc < 0.0:
            raise NoRealRoot("corner quadratic has no real root")
        root = math.sqrt(disc)
        x = min(
            ((-lin + root) / (2.0 * quad), (-lin - root) / (2.0 * quad)),
            key=abs,
        )
    for _ in range(3):
        deriv = 2.0 * quad * x + lin
        if deriv == 0.0:
            break
        x -= (quad * x * x + lin * x + 1.0) / deriv
    return assemble(x)


def class_base(tc, rng):
    """Pre-shift class matrix (classes 2-4); class 1 matrices need no shift.

    Draw orders: 2n W then Z; 3n T diagonals then S diagonals; 4n one
    2n-1 diagonal vector per attempt; 4s one n-1 vector per attempt.
    """
    gen = _gen(rng)
    n, r = tc.n, tc.r
    tag = tc.tag
    if tag in ("1n", "1s"):
        spec = SpectrumSpec(n, n - r, head="sampled", tail_value=1e-16)
        return svd_spec_matrix(spec, tag == "1s", gen)[0]
    if tag == "2n":
        w, _ = densela.qr_thin(gen.standard_normal((n, n - r)))
        z, _ = densela.qr_thin(gen.standard_normal((n - r, r)))
        return np.hstack([w, w @ z])
    if tag == "2s":
        w, _ = densela.qr_thin(gen.standard_normal((n, n - r)))
        return w @ w.T
    if tag == "3n":
        t = toeplitz_dense(gen.standard_normal(2 * n - r - 1), n, n - r)
        s = toeplitz_dense(gen.standard_normal(n - 1), n - r, r)
        raw = np.hstack([t, t @ s])
        return raw / densela.spectral_norm(raw)
    if tag == "3s":
        t = toeplitz_dense(gen.standard_normal(2 * n - r - 1), n, n - r)
        raw = t @ t.T
        return raw / densela.spectral_norm(raw)
    builder = _toeplitz_corner_nonsym if tag == "4n" else _toeplitz_corner_sym
    for _ in range(_DET_RETRIES):
        try:
            return builder(gen, n)
        except NoRealRoot:
            continue
    raise MaxRetries(f"class {tag}: no usable corner root in "
                     f"{_DET_RETRIES} attempts")


def beta_shift(a, target_kappa_range=NONSYM_KAPPA_RANGE):
    """Shift to A/||A|| + beta I with kappa in range; returns (A', beta).

    Symmetric input takes the fixed beta = 1e-16 path.  Nonsymmetric input
    bisects on log beta against the measured condition number and raises
    BisectFail when 60 steps cannot land inside the window.
    """
    arr = densela.dense(a)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError("beta_shift needs a square matrix")
    nrm = densela.spectral_norm(arr)
    base = arr / nrm if nrm > 0 else arr
    eye = np.eye(arr.shape[0])
    if np.abs(base - base.T).max() <= 1e-12:
        return base + SYMMETRIC_BETA * eye, SYMMETRIC_BETA
    klo, khi = target_kappa_range

    def kappa_at(logb):
        return densela.cond(base + (10.0**logb) * eye)

    lo, hi = -18.0, -2.0
    k_lo = kappa_at(lo)
    if klo <= k_lo <= khi:
        return base + (10.0**lo) * eye, 10.0**lo
    if k_lo < klo:
        # Even the weakest shift is too well conditioned; the window is
        # unreachable (shifts only regularize further).
        raise BisectFail(
            f"kappa {k_lo:.3e} below [{klo:.1e}, {khi:.1e}] at beta=1e-18"
        )
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        k_mid = kappa_at(mid)
        if klo <= k_mid <= khi:
            return base + (10.0**mid) * eye, 10.0**mid
        if k_mid > khi:
            lo = mid
        else:
            hi = mid
    raise BisectFail(
        f"no beta in [1e-18, 1e-2] reached kappa in [{klo:.1e}, {khi:.1e}]"
    )


def gen_class(tc, rng):
    """Generate one matrix of the given class, shifted per its recipe.

    Classes 1n/1s are returned as assembled (no shift).  Symmetric classes
    get the fixed beta; nonsymmetric ones get the bisected beta, falling
    back to the symmetric value when the window is unreachable in float
    (near-singularity saturates at the evaluation noise floor).

    Delivered matrices must measure inside KAPPA_WINDOW; draws whose
    computed smallest singular value degenerates past the rank gate (or,
    for class 4, whose corner root polished too coarsely) are resampled
    from the same stream, up to the shared retry cap.
    """
    gen = _gen(rng)
    lo, hi = KAPPA_WINDOW
    for _ in range(_DET_RETRIES):
        base = class_base(tc, gen)
        if tc.tag in ("1n", "1s"):
            out = base
        else:
            try:
                out, _ = beta_shift(base)
            except BisectFail:
                nrm = densela.spectral_norm(base)
                scaled = base / nrm if nrm > 0 else base
                out = scaled + SYMMETRIC_BETA * np.eye(tc.n)
        if lo <= densela.cond(out) <= hi:
            return out
    raise MaxRetries(
        f"class {tc.tag}: no draw measured kappa in "
        f"[{lo:.1e}, {hi:.1e}] within {_DET_RETRIES} attempts"
    )
