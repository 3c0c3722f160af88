"""Kernel lane selection.

Two interchangeable implementations of the dense factorization kernels live
here: ``_core`` (Cython, built at install time) and ``_pyref`` (pure numpy
array arithmetic).  The compiled lane is used when importable; set
``RANDPREP_KERNELS=python`` or ``RANDPREP_KERNELS=compiled`` to force a lane.
All callers go through the orientation-normalizing wrappers below, so both
lanes only ever see C-contiguous float64 input with m >= n.
"""

import os

import numpy as np

from ..errors import ConfigError
from . import _pyref
from .signals import SmallColumn

__all__ = [
    "SmallColumn",
    "genp_raw",
    "lane",
    "qr_thin_raw",
    "svd_factored",
    "svd_values",
]

_FORCED = os.environ.get("RANDPREP_KERNELS", "").strip().lower()
if _FORCED not in ("", "compiled", "python"):
    raise ConfigError(
        f"RANDPREP_KERNELS={_FORCED!r}: expected 'compiled' or 'python'"
    )

_impl = None
if _FORCED != "python":
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = None
if _impl is None:
    if _FORCED == "compiled":
        raise ConfigError(
            "RANDPREP_KERNELS=compiled but the compiled extension is not "
            "importable; reinstall with the build step or unset the variable"
        )
    _impl = _pyref

_LANE = "python" if _impl is _pyref else "compiled"


def lane():
    """Name of the active kernel lane: 'compiled' or 'python'."""
    return _LANE


def _as_matrix(a):
    arr = np.ascontiguousarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array, got ndim={arr.ndim}")
    return arr


def _default_cap(m, n):
    return 75 * max(min(m, n), 1)


def svd_factored(a, sweep_cap=None):
    """Thin SVD (U, s, V) with a = U diag(s) V^T, any orientation.

    U is m x k, V is n x k with k = min(m, n); s descending and non-negative.
    """
    arr = _as_matrix(a)
    m, n = arr.shape
    k = min(m, n)
    if k == 0:
        return np.zeros((m, 0)), np.zeros(0), np.zeros((n, 0))
    cap = _default_cap(m, n) if sweep_cap is None else int(sweep_cap)
    if m >= n:
        return _impl.svd_factored(arr, cap)
    u, s, v = _impl.svd_factored(_as_matrix(arr.T), cap)
    return v, s, u


def svd_values(a, sweep_cap=None):
    """Singular values of a, descending, any orientation."""
    arr = _as_matrix(a)
    m, n = arr.shape
    if min(m, n) == 0:
        return np.zeros(0)
    cap = _default_cap(m, n) if sweep_cap is None else int(sweep_cap)
    if m < n:
        arr = _as_matrix(arr.T)
    return _impl.svd_values(arr, cap)


def qr_thin_raw(a, thr_abs, full_q=False):
    """Householder QR with m >= n; raises SmallColumn below thr_abs.

    Returns (Q, R): Q m x n (or m x m when full_q), R n x n upper triangular
    with non-negative diagonal.
    """
    arr = _as_matrix(a)
    m, n = arr.shape
    if m < n:
        raise ValueError(f"qr needs m >= n, got {m} x {n}")
    if n == 0:
        q = np.eye(m) if full_q else np.zeros((m, 0))
        return q, np.zeros((0, 0))
    return _impl.house_qr(arr, float(thr_abs), bool(full_q))


def genp_raw(a, thr_abs):
    """No-pivoting LU of square a: (L, U, min_pivot, fail_step)."""
    arr = _as_matrix(a)
    m, n = arr.shape
    if m != n:
        raise ValueError(f"genp needs a square matrix, got {m} x {n}")
    if n == 0:
        return np.zeros((0, 0)), np.zeros((0, 0)), np.inf, -1
    return _impl.genp_lu(arr, float(thr_abs))
