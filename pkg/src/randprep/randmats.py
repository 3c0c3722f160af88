"""Seeded random matrix families used as preprocessors.

Gaussian, Haar orthogonal, SRFT sections of the unitary DFT, circulant and
subcirculant, and the sparse signed U/V/W triple.  Every generator takes an
RngStream (or a numpy Generator) and is a pure function of it: same stream,
same matrix, bit for bit.
"""

from dataclasses import dataclass

import numpy as np

from . import densela
from .errors import PatternOverflow

__all__ = [
    "PreprocessorKind",
    "RngStream",
    "circulant_multiply",
    "gaussian",
    "random_circulant",
    "random_orthogonal",
    "signed_pattern",
    "signed_sparse_uvw",
    "srft",
    "srft_from_circulant",
    "subcirculant",
]

# Tag below which child-stream offsets stay collision-free: trial indices are
# kept under 2**48 and tags under 2**16.
_CHILD_SHIFT = 48

KNOWN_KINDS = ("gaussian", "srft", "circulant", "subcirculant", "signed")


@dataclass(frozen=True)
class RngStream:
    """Counter-based stream handle: (seed, stream_id) keys a Philox generator.

    Distinct stream_ids give independent streams; child(tag) derives a
    disjoint substream deterministically.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if not 0 <= self.stream_id < 2**64:
            raise ValueError("stream_id must fit in 64 bits")

    def generator(self):
        return np.random.Generator(
            np.random.Philox(key=[self.seed, self.stream_id])
        )

    def child(self, tag):
        if not 0 <= tag < 2**16:
            raise ValueError("child tag must fit in 16 bits")
        offset = tag << _CHILD_SHIFT
        return RngStream(self.seed, (self.stream_id + offset) % 2**64)


@dataclass(frozen=True)
class PreprocessorKind:
    """A named random family with its shape and oversampling amount."""

    tag: str
    rows: int
    cols: int
    oversample: int = 0

    def __post_init__(self):
        if self.tag not in KNOWN_KINDS:
            raise ValueError(f"unknown preprocessor tag {self.tag!r}")
        if self.rows < 1 or self.cols < 1:
            raise ValueError("rows and cols must be positive")
        if self.oversample < 0:
            raise ValueError("oversample must be >= 0")
        if self.tag == "srft" and self.cols > self.rows:
            raise ValueError("srft needs cols <= rows")
        if self.tag == "subcirculant" and min(self.rows, self.cols) > max(
            self.rows, self.cols
        ):
            raise ValueError("subcirculant block exceeds its circulant parent")


def _gen(rng):
    """Accept an RngStream, a numpy Generator, or a bare seed."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return RngStream(int(rng)).generator()


def gaussian(m, n, rng):
    """m x n matrix of i.i.d. standard normal entries."""
    if m < 1 or n < 1:
        raise ValueError("dimensions must be positive")
    return _gen(rng).standard_normal((m, n))


def random_orthogonal(n, rng):
    """Haar orthogonal n x n matrix: Q-factor of a Gaussian matrix.

    The positive-diagonal R convention of qr_thin makes the factor unique,
    which is exactly the normalization Haar sampling needs.
    """
    q, _ = densela.qr_thin(gaussian(n, n, rng))
    return q


def _dft_unitary(n):
    # (1/sqrt(n)) (omega^{ij}) with omega = exp(2 pi i / n).
    i = np.arange(n)
    return np.exp((2j * np.pi / n) * np.outer(i, i)) / np.sqrt(n)


def srft(n, rho_plus, rng):
    """n x rho_plus SRFT: sqrt(n/rho_plus) * D * Omega * R.

    D is a random unit-modulus diagonal, Omega the unitary DFT, R a uniform
    without-replacement column selection.  Every singular value equals
    sqrt(n/rho_plus).
    """
    if not 1 <= rho_plus <= n:
        raise ValueError("need 1 <= rho_plus <= n")
    gen = _gen(rng)
    d = np.exp(2j * np.pi * gen.random(n))
    cols = gen.choice(n, size=rho_plus, replace=False)
    omega = _dft_unitary(n)
    return np.sqrt(n / rho_plus) * (d[:, None] * omega[:, cols])


def random_circulant(n, rng, return_column=False):
    """Dense circulant from a Gaussian first column z: Z[i, j] = z[(i-j) % n]."""
    if n < 1:
        raise ValueError("n must be positive")
    z = _gen(rng).standard_normal(n)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    dense = z[idx]
    return (dense, z) if return_column else dense


def subcirculant(n, k, rng):
    """Leftmost n x k block of a random n x n circulant (same draw order)."""
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    return random_circulant(n, rng)[:, :k]


def circulant_multiply(first_col, x):
    """Z @ x for the circulant with given first column, in O(n log n) by FFT."""
    z = np.asarray(first_col, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    n = z.size
    matrix_input = x.ndim == 2
    if not matrix_input:
        x = x[:, None]
    if x.shape[0] != n:
        raise ValueError(f"length mismatch: {n} vs {x.shape[0]}")
    out = np.fft.ifft(
        np.fft.fft(z)[:, None] * np.fft.fft(x, axis=0), axis=0
    ).real
    return out if matrix_input else out[:, 0]


def srft_from_circulant(n, rho_plus, rng, diag=None, select=None):
    """SRFT built as sqrt(n/rho_plus) * Omega * Z * R from a circulant Z.

    Z is the circulant whose DFT spectrum is a random unit-modulus diagonal
    (Omega Z = D Omega), so the product reproduces the srft construction.
    diag and select override the random spectrum and column choice, mainly so
    structural identities can be pinned in tests.
    """
    if not 1 <= rho_plus <= n:
        raise ValueError("need 1 <= rho_plus <= n")
    gen = _gen(rng)
    if diag is None:
        diag = np.exp(2j * np.pi * gen.random(n))
    else:
        diag = np.asarray(diag, dtype=np.complex128)
    if select is None:
        select = gen.choice(n, size=rho_plus, replace=False)
    select = np.asarray(select)
    # First column of Z from its spectrum: z_k = (1/n) sum_i omega^{-ik} d_i.
    z = np.fft.fft(diag) / n
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    zmat = z[idx]
    omega = _dft_unitary(n)
    return np.sqrt(n / rho_plus) * (omega @ zmat)[:, select]


def signed_pattern(n, r, signs):
    """The sparse block pattern: sign_i * I_r at row offset 2*i*r, zeros between.

    signs has one entry per sign block; block count is (n - r) // (2r) + 1.
    """
    if 2 * r > n:
        raise PatternOverflow(f"pattern needs 2r <= n, got r={r}, n={n}")
    blocks = (n - r) // (2 * r) + 1
    signs = np.asarray(signs, dtype=np.float64)
    if signs.shape != (blocks,):
        raise ValueError(f"expected {blocks} signs, got shape {signs.shape}")
    ubar = np.zeros((n, r))
    for i in range(blocks):
        base = 2 * i * r
        ubar[base : base + r, :] = signs[i] * np.eye(r)
    return ubar


def signed_sparse_uvw(n, r, rng):
    """Sparse signed preprocessor triple (U n x r, V n x r, W r x r).

    U is the normalized alternating sign-block pattern; V subtracts U from
    the same pattern with fixed weight 2 and is normalized; W is a normalized
    circulant with random unit first column.  Block signs and circulant
    entries are independent fair signs.
    """
    if 2 * r > n:
        raise PatternOverflow(f"pattern needs 2r <= n, got r={r}, n={n}")
    gen = _gen(rng)
    blocks = (n - r) // (2 * r) + 1
    signs = 2.0 * gen.integers(0, 2, size=blocks) - 1.0
    ubar = signed_pattern(n, r, signs)
    # Columns of ubar are disjointly supported with norm sqrt(blocks) each.
    u = ubar / np.sqrt(blocks)
    vbar = signed_pattern(n, r, np.full(blocks, 2.0)) - u
    v = vbar / densela.spectral_norm(vbar)
    wcol = 2.0 * gen.integers(0, 2, size=r) - 1.0
    idx = (np.arange(r)[:, None] - np.arange(r)[None, :]) % r
    wbar = wcol[idx].astype(np.float64)
    w = wbar / densela.spectral_norm(wbar)
    return u, v, w
