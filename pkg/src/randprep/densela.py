"""Deterministic dense linear algebra: QR, SVD, pseudoinverse, norms, rank.

Matrices are plain float64 numpy arrays (row-major).  Factorizations run on
the active kernel lane; see ``randprep._kernels``.
"""

from typing import NamedTuple

import numpy as np

from . import _kernels
from ._kernels.signals import SmallColumn
from .errors import RankDeficient, ZeroMatrix

__all__ = [
    "SvdTriple",
    "chebyshev_norm",
    "complex_singular_values",
    "cond",
    "dense",
    "frobenius_norm",
    "least_squares",
    "left_inverse",
    "pinv",
    "qr_thin",
    "singular_values",
    "spectral_norm",
    "numrank",
    "svd",
]

# Rank gates: qr_thin refuses pivot columns under QR_RANK_TOL * spectral norm;
# cond counts the spectrum above COND_RANK_TOL * sigma_1.  The cond gate sits
# below eps so represented-but-tiny values (1e-16 against sigma_1 = 1) still
# count; it only drops exact zeros and sub-representable junk.
QR_RANK_TOL = 1e-13
COND_RANK_TOL = 1e-17
PINV_TRUNC_DEFAULT = 1e-12


class SvdTriple(NamedTuple):
    """SVD factors with A = S @ diag(sigma) @ T.T, sigma nonincreasing."""

    S: np.ndarray
    sigma: np.ndarray
    T: np.ndarray
    compact: bool


def dense(a):
    """Validate and normalize input to a finite float64 2-D array."""
    arr = np.ascontiguousarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array, got ndim={arr.ndim}")
    if not np.isfinite(arr).all():
        raise ValueError("matrix has non-finite entries")
    return arr


def svd(m, sweep_cap=None):
    """Compact SVD of m as an SvdTriple (S m x k, T n x k, k = min(m, n)).

    Column sign pairs are canonicalized: the dominant entry of each S column
    is made positive (its T column flips with it), so repeated runs and both
    kernel lanes agree on the factors, not just the values.
    """
    arr = dense(m)
    s_mat, sig, t_mat = _kernels.svd_factored(arr, sweep_cap)
    for j in range(sig.size):
        if s_mat[np.argmax(np.abs(s_mat[:, j])), j] < 0.0:
            s_mat[:, j] = -s_mat[:, j]
            t_mat[:, j] = -t_mat[:, j]
    return SvdTriple(s_mat, sig, t_mat, True)


def singular_values(m, sweep_cap=None):
    """All min(m, n) singular values of m, nonincreasing."""
    return _kernels.svd_values(dense(m), sweep_cap)


def qr_thin(m):
    """Thin QR of m (m x n, m >= n) with a strictly positive R diagonal.

    Raises RankDeficient when a pivot column's remaining norm falls below
    QR_RANK_TOL times the spectral norm.  The kernel aborts against a cheap
    Frobenius over-estimate first; the exact spectral gate is only computed
    to adjudicate an abort.
    """
    arr = dense(m)
    mm, nn = arr.shape
    if mm < nn:
        raise ValueError(f"qr_thin needs m >= n, got {mm} x {nn}")
    fro = float(np.linalg.norm(arr))
    try:
        return _kernels.qr_thin_raw(arr, QR_RANK_TOL * fro)
    except SmallColumn as first:
        spec = spectral_norm(arr)
        if first.norm <= QR_RANK_TOL * spec:
            raise RankDeficient(
                f"pivot column {first.col} has norm {first.norm:.3e} below "
                f"{QR_RANK_TOL:.0e} * ||M|| = {QR_RANK_TOL * spec:.3e}"
            ) from None
        try:
            return _kernels.qr_thin_raw(arr, QR_RANK_TOL * spec)
        except SmallColumn as second:
            raise RankDeficient(
                f"pivot column {second.col} has norm {second.norm:.3e} below "
                f"{QR_RANK_TOL:.0e} * ||M|| = {QR_RANK_TOL * spec:.3e}"
            ) from None


def qr_full(m):
    """QR of m (m x n, m >= n) with an m x m Q; same rank gate as qr_thin."""
    arr = dense(m)
    mm, nn = arr.shape
    if mm < nn:
        raise ValueError(f"qr_full needs m >= n, got {mm} x {nn}")
    fro = float(np.linalg.norm(arr))
    try:
        return _kernels.qr_thin_raw(arr, QR_RANK_TOL * fro, full_q=True)
    except SmallColumn as first:
        spec = spectral_norm(arr)
        if first.norm <= QR_RANK_TOL * spec:
            raise RankDeficient(
                f"pivot column {first.col} has norm {first.norm:.3e} below "
                f"{QR_RANK_TOL:.0e} * ||M|| = {QR_RANK_TOL * spec:.3e}"
            ) from None
        return _kernels.qr_thin_raw(arr, QR_RANK_TOL * spec, full_q=True)


def pinv(m, trunc_tol=PINV_TRUNC_DEFAULT):
    """Moore-Penrose pseudoinverse with relative spectrum truncation.

    Singular values below trunc_tol * sigma_1 are treated as zero.  A fully
    truncated (or zero) matrix yields the zero matrix of transposed shape.
    """
    if trunc_tol < 0:
        raise ValueError("trunc_tol must be >= 0")
    arr = dense(m)
    s_mat, sig, t_mat = _kernels.svd_factored(arr)
    if sig.size == 0 or sig[0] == 0.0:
        return np.zeros((arr.shape[1], arr.shape[0]))
    keep = sig >= trunc_tol * sig[0]
    if not keep.any():
        return np.zeros((arr.shape[1], arr.shape[0]))
    rho = int(keep.sum())
    return (t_mat[:, :rho] / sig[:rho]) @ s_mat[:, :rho].T


def left_inverse(m):
    """R^-1 Q^T for the thin QR of m; satisfies left_inverse(m) @ m = I."""
    q, r = qr_thin(m)
    n = r.shape[0]
    # Back-substitution on R against Q^T, column block at a time.
    x = q.T.copy()
    for i in range(n - 1, -1, -1):
        x[i, :] -= r[i, i + 1 :] @ x[i + 1 :, :]
        x[i, :] /= r[i, i]
    return x


def spectral_norm(m):
    arr = dense(m)
    sig = _kernels.svd_values(arr)
    return float(sig[0]) if sig.size else 0.0


def frobenius_norm(m):
    return float(np.linalg.norm(dense(m)))


def chebyshev_norm(m):
    arr = dense(m)
    return float(np.abs(arr).max()) if arr.size else 0.0


def cond(m):
    """sigma_1 / sigma_rho with rho the rank at COND_RANK_TOL * sigma_1."""
    sig = _kernels.svd_values(dense(m))
    if sig.size == 0 or sig[0] == 0.0:
        raise ZeroMatrix("condition number of the zero matrix")
    rho = int((sig > COND_RANK_TOL * sig[0]).sum())
    return float(sig[0] / sig[rho - 1])


def numrank(m, eta):
    """Count of singular values >= eta (the rank of the best eta-approximant)."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    sig = _kernels.svd_values(dense(m))
    return int((sig >= eta).sum())


def least_squares(b, t):
    """Minimum-norm Y with ||b @ Y - t||_F minimal (Y = pinv(b) @ t)."""
    b_arr = dense(b)
    t_arr = dense(t)
    if b_arr.shape[0] != t_arr.shape[0]:
        raise ValueError(
            f"row mismatch: {b_arr.shape[0]} vs {t_arr.shape[0]}"
        )
    s_mat, sig, t_mat = _kernels.svd_factored(b_arr)
    if sig.size == 0 or sig[0] == 0.0:
        return np.zeros((b_arr.shape[1], t_arr.shape[1]))
    keep = sig >= PINV_TRUNC_DEFAULT * sig[0]
    rho = int(keep.sum())
    return (t_mat[:, :rho] / sig[:rho]) @ (s_mat[:, :rho].T @ t_arr)


def complex_singular_values(m):
    """Singular values of a complex matrix via its 2m x 2n real embedding.

    The embedding [[Re, -Im], [Im, Re]] carries each singular value of m
    exactly twice; every other value of its spectrum is returned.
    """
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array, got ndim={arr.ndim}")
    re, im = arr.real, arr.imag
    emb = np.block([[re, -im], [im, re]])
    sig = _kernels.svd_values(emb)
    return sig[0::2].copy()
