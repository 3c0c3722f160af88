"""Pure-Python kernel lane.

Implements the dense factorization kernels with numpy array arithmetic but no
calls into numpy.linalg: Householder bidiagonalization followed by
implicit-shift QR sweeps for the SVD, Householder QR with a positive-diagonal
convention, and Gaussian elimination with no pivoting.  The compiled lane in
``_core`` runs the same algorithms with explicit C loops; the two must agree
to rounding.

All entry points expect float64 C-contiguous matrices with m >= n where an
orientation is stated; the lane-neutral wrappers in ``__init__`` handle
transposition and validation.
"""

import numpy as np

from ..errors import NoConvergence
from .signals import SmallColumn

_EPS = float(np.finfo(np.float64).eps)

# Diagonal entries at or below this magnitude are treated as exact zeros by
# the bidiagonal QR iteration's splitting logic.  Keeps the rotation formulas
# away from subnormal quotients.
_UNDERFLOW_FLOOR = 1e-300


# ----------------------------------------------------------------------------
# Householder reflectors


def _householder(x):
    """Reflector (v, beta, alpha) with (I - beta v v^T) x = alpha e_1.

    Sign of alpha is chosen opposite to x[0] so v = x - alpha e_1 is computed
    without cancellation.  beta == 0.0 encodes the identity (x was zero).
    """
    norm_x = np.sqrt(np.dot(x, x))
    if norm_x == 0.0:
        return x, 0.0, 0.0
    alpha = -norm_x if x[0] >= 0.0 else norm_x
    v = x.copy()
    v[0] -= alpha
    beta = 2.0 / np.dot(v, v)
    return v, beta, alpha


def _apply_left(block, v, beta):
    # block <- (I - beta v v^T) block
    if beta == 0.0:
        return
    w = v @ block
    block -= np.outer(beta * v, w)


def _apply_right(block, v, beta):
    # block <- block (I - beta v v^T)
    if beta == 0.0:
        return
    w = block @ v
    block -= np.outer(w, beta * v)


# ----------------------------------------------------------------------------
# Bidiagonalization  A = U_b B V_b^T  (m >= n, B upper bidiagonal n x n)


def _bidiagonalize(a, want_uv):
    a = a.copy()
    m, n = a.shape
    d = np.zeros(n)
    e = np.zeros(n - 1) if n > 1 else np.zeros(0)
    lefts = []
    rights = []
    for k in range(n):
        v, beta, alpha = _householder(a[k:, k].copy())
        _apply_left(a[k:, k:], v, beta)
        a[k, k] = alpha
        a[k + 1 :, k] = 0.0
        d[k] = alpha
        if want_uv:
            lefts.append((k, v, beta))
        if k <= n - 3:
            v2, beta2, alpha2 = _householder(a[k, k + 1 :].copy())
            _apply_right(a[k:, k + 1 :], v2, beta2)
            a[k, k + 1] = alpha2
            a[k, k + 2 :] = 0.0
            e[k] = alpha2
            if want_uv:
                rights.append((k, v2, beta2))
        elif k == n - 2:
            e[k] = a[k, k + 1]
    if not want_uv:
        return d, e, None, None
    u = np.zeros((m, n))
    np.fill_diagonal(u, 1.0)
    for k, v, beta in reversed(lefts):
        _apply_left(u[k:, :], v, beta)
    vt_acc = np.eye(n)
    for k, v2, beta2 in reversed(rights):
        _apply_left(vt_acc[k + 1 :, :], v2, beta2)
    return d, e, u, vt_acc


# ----------------------------------------------------------------------------
# Implicit-shift QR iteration on the bidiagonal


def _givens(a, b):
    r = np.hypot(a, b)
    if r == 0.0:
        return 1.0, 0.0, 0.0
    return a / r, b / r, r


def _rot_cols(mat, i, j, c, s):
    # cols (i, j) <- (c*col_i + s*col_j, -s*col_i + c*col_j)
    ti = c * mat[:, i] + s * mat[:, j]
    mat[:, j] = -s * mat[:, i] + c * mat[:, j]
    mat[:, i] = ti


def _gk_sweep(d, e, lo, hi, u, v):
    # Wilkinson shift from the trailing 2x2 of B^T B restricted to [lo, hi].
    dm = d[hi - 1]
    dn = d[hi]
    em = e[hi - 1]
    el = e[hi - 2] if hi - 1 > lo else 0.0
    t11 = dm * dm + el * el
    t12 = dm * em
    t22 = dn * dn + em * em
    delta = 0.5 * (t11 - t22)
    root = np.hypot(delta, t12)
    denom = delta + (root if delta >= 0.0 else -root)
    mu = t22 - (t12 * t12) / denom if denom != 0.0 else t22

    y = d[lo] * d[lo] - mu
    z = d[lo] * e[lo]
    for k in range(lo, hi):
        c, s, r = _givens(y, z)
        if k > lo:
            e[k - 1] = r
        f = c * d[k] + s * e[k]
        e[k] = c * e[k] - s * d[k]
        d[k] = f
        g = s * d[k + 1]
        d[k + 1] = c * d[k + 1]
        if v is not None:
            _rot_cols(v, k, k + 1, c, s)
        c, s, r = _givens(d[k], g)
        d[k] = r
        f = c * e[k] + s * d[k + 1]
        d[k + 1] = c * d[k + 1] - s * e[k]
        e[k] = f
        if u is not None:
            _rot_cols(u, k, k + 1, c, s)
        if k < hi - 1:
            y = e[k]
            z = s * e[k + 1]
            e[k + 1] = c * e[k + 1]


def _chase_row_zero(d, e, i, hi, u):
    # d[i] == 0 with e[i] != 0: rotate row i against rows below to push the
    # off-diagonal mass out of row i entirely.
    f = e[i]
    e[i] = 0.0
    for j in range(i + 1, hi + 1):
        c, s, r = _givens(d[j], f)
        d[j] = r
        if j < hi:
            f = -s * e[j]
            e[j] = c * e[j]
        if u is not None:
            _rot_cols(u, j, i, c, s)


def _chase_col_zero(d, e, lo, hi, v):
    # d[hi] == 0 with e[hi-1] != 0: rotate column hi against earlier columns.
    f = e[hi - 1]
    e[hi - 1] = 0.0
    for i in range(hi - 1, lo - 1, -1):
        c, s, r = _givens(d[i], f)
        d[i] = r
        if i > lo:
            f = -s * e[i - 1]
            e[i - 1] = c * e[i - 1]
        if v is not None:
            _rot_cols(v, i, hi, c, s)


def _bidiag_qr(d, e, u, v, sweep_cap):
    n = d.size
    if n <= 1:
        return
    sweeps = 0
    hi = n - 1
    while hi > 0:
        for i in range(hi):
            if abs(e[i]) <= _EPS * (abs(d[i]) + abs(d[i + 1])):
                e[i] = 0.0
        while hi > 0 and e[hi - 1] == 0.0:
            hi -= 1
        if hi == 0:
            break
        lo = hi - 1
        while lo > 0 and e[lo - 1] != 0.0:
            lo -= 1
        handled = False
        for i in range(lo, hi):
            if abs(d[i]) <= _UNDERFLOW_FLOOR:
                d[i] = 0.0
                _chase_row_zero(d, e, i, hi, u)
                handled = True
                break
        if not handled and abs(d[hi]) <= _UNDERFLOW_FLOOR:
            d[hi] = 0.0
            _chase_col_zero(d, e, lo, hi, v)
            handled = True
        if not handled:
            _gk_sweep(d, e, lo, hi, u, v)
        sweeps += 1
        if sweeps > sweep_cap:
            raise NoConvergence(
                f"bidiagonal QR exceeded {sweep_cap} sweeps on block "
                f"[{lo}, {hi}]"
            )


def _finalize(d, u, v):
    for j in range(d.size):
        if d[j] < 0.0:
            d[j] = -d[j]
            if v is not None:
                v[:, j] = -v[:, j]
    order = np.argsort(-d, kind="stable")
    d2 = d[order]
    u2 = u[:, order] if u is not None else None
    v2 = v[:, order] if v is not None else None
    return d2, u2, v2


# ----------------------------------------------------------------------------
# Public lane entry points (m >= n assumed where noted)


def svd_factored(a, sweep_cap):
    """Full thin SVD of a with m >= n: returns (U, s, V), a = U diag(s) V^T."""
    d, e, u, v = _bidiagonalize(a, want_uv=True)
    _bidiag_qr(d, e, u, v, sweep_cap)
    s, u, v = _finalize(d, u, v)
    return u, s, v


def svd_values(a, sweep_cap):
    """Singular values only of a with m >= n, descending."""
    d, e, _, _ = _bidiagonalize(a, want_uv=False)
    _bidiag_qr(d, e, None, None, sweep_cap)
    s, _, _ = _finalize(d, None, None)
    return s


def house_qr(a, thr_abs, full_q):
    """Householder QR of a with m >= n, R diagonal made non-negative.

    Raises SmallColumn as soon as a pivot column's remaining norm is at or
    below thr_abs.  full_q selects an m x m Q; otherwise Q is m x n.
    """
    a = a.copy()
    m, n = a.shape
    refl = []
    for k in range(n):
        x = a[k:, k].copy()
        norm_x = np.sqrt(np.dot(x, x))
        if norm_x <= thr_abs:
            raise SmallColumn(k, norm_x)
        v, beta, alpha = _householder(x)
        _apply_left(a[k:, k:], v, beta)
        a[k, k] = alpha
        a[k + 1 :, k] = 0.0
        refl.append((k, v, beta))
    r = np.triu(a[:n, :n]).copy() if n else np.zeros((0, 0))
    q = np.zeros((m, m if full_q else n))
    np.fill_diagonal(q, 1.0)
    for k, v, beta in reversed(refl):
        _apply_left(q[k:, :], v, beta)
    for j in range(n):
        if r[j, j] < 0.0:
            r[j, j:] = -r[j, j:]
            q[:, j] = -q[:, j]
    return q, r


def genp_lu(a, thr_abs):
    """Gaussian elimination of square a with no pivoting.

    Returns (L, U, min_pivot, fail_step) with fail_step the 0-based step whose
    pivot magnitude fell at or below thr_abs, or -1 on full completion.  L and
    U hold the partial factorization up to the failing step.
    """
    u = a.copy()
    n = u.shape[0]
    low = np.eye(n)
    min_pivot = np.inf
    for k in range(n):
        p = u[k, k]
        if abs(p) < min_pivot:
            min_pivot = abs(p)
        if abs(p) <= thr_abs:
            return low, u, min_pivot, k
        if k < n - 1:
            low[k + 1 :, k] = u[k + 1 :, k] / p
            u[k + 1 :, k:] -= np.outer(low[k + 1 :, k], u[k, k:])
            u[k + 1 :, k] = 0.0
    return low, u, min_pivot, -1
