# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: initializedcheck=False, language_level=3
"""Compiled kernel lane.

Same algorithms as ``_pyref`` with the hot loops in C: Householder
bidiagonalization with in-place reflector storage, implicit-shift QR sweeps
on the bidiagonal, Householder QR, and no-pivoting Gaussian elimination.
Reflector vectors are stored normalized (implicit leading 1) in the factored
matrix, LAPACK style, with per-step scalars in side arrays.
"""

import numpy as np

from libc.math cimport fabs, hypot, sqrt

from randprep.errors import NoConvergence
from randprep._kernels.signals import SmallColumn

cdef double EPS = 2.220446049250313e-16
cdef double UNDERFLOW_FLOOR = 1e-300


# ----------------------------------------------------------------------------
# Householder helpers


cdef void _build_col_reflector(double[:, ::1] a, Py_ssize_t k, Py_ssize_t m,
                               double* alpha_out, double* beta_out) noexcept nogil:
    # Reflector from a[k:m, k]; normalized tail overwrites a[k+1:m, k].
    cdef Py_ssize_t i
    cdef double x0 = a[k, k]
    cdef double tail2 = 0.0, nx, alpha, v0
    for i in range(k + 1, m):
        tail2 += a[i, k] * a[i, k]
    nx = sqrt(x0 * x0 + tail2)
    if nx == 0.0:
        alpha_out[0] = 0.0
        beta_out[0] = 0.0
        return
    alpha = -nx if x0 >= 0.0 else nx
    v0 = x0 - alpha
    for i in range(k + 1, m):
        a[i, k] /= v0
    alpha_out[0] = alpha
    beta_out[0] = 2.0 * v0 * v0 / (v0 * v0 + tail2)


cdef void _build_row_reflector(double[:, ::1] a, Py_ssize_t k, Py_ssize_t n,
                               double* alpha_out, double* beta_out) noexcept nogil:
    # Reflector from a[k, k+1:n]; normalized tail overwrites a[k, k+2:n].
    cdef Py_ssize_t j
    cdef double x0 = a[k, k + 1]
    cdef double tail2 = 0.0, nx, alpha, v0
    for j in range(k + 2, n):
        tail2 += a[k, j] * a[k, j]
    nx = sqrt(x0 * x0 + tail2)
    if nx == 0.0:
        alpha_out[0] = 0.0
        beta_out[0] = 0.0
        return
    alpha = -nx if x0 >= 0.0 else nx
    v0 = x0 - alpha
    for j in range(k + 2, n):
        a[k, j] /= v0
    alpha_out[0] = alpha
    beta_out[0] = 2.0 * v0 * v0 / (v0 * v0 + tail2)


cdef void _apply_col_reflector(double[:, ::1] vmat, Py_ssize_t vcol,
                               Py_ssize_t k, Py_ssize_t m, double beta,
                               double[:, ::1] tgt, Py_ssize_t j0, Py_ssize_t n,
                               double[::1] w) noexcept nogil:
    # tgt[k:m, j0:n] <- (I - beta v v^T) tgt[k:m, j0:n],
    # v = (1 at k, vmat[i, vcol] for i > k).
    cdef Py_ssize_t i, j
    cdef double vi, coef
    if beta == 0.0 or j0 >= n:
        return
    for j in range(j0, n):
        w[j] = tgt[k, j]
    for i in range(k + 1, m):
        vi = vmat[i, vcol]
        for j in range(j0, n):
            w[j] += vi * tgt[i, j]
    for j in range(j0, n):
        tgt[k, j] -= beta * w[j]
    for i in range(k + 1, m):
        coef = beta * vmat[i, vcol]
        for j in range(j0, n):
            tgt[i, j] -= coef * w[j]


cdef void _apply_row_reflector_right(double[:, ::1] vmat, Py_ssize_t vrow,
                                     Py_ssize_t k1, Py_ssize_t n, double beta,
                                     double[:, ::1] tgt, Py_ssize_t i0,
                                     Py_ssize_t m) noexcept nogil:
    # tgt[i0:m, k1:n] <- tgt[i0:m, k1:n] (I - beta v v^T),
    # v = (1 at k1, vmat[vrow, j] for j > k1).
    cdef Py_ssize_t i, j
    cdef double acc, coef
    if beta == 0.0:
        return
    for i in range(i0, m):
        acc = tgt[i, k1]
        for j in range(k1 + 1, n):
            acc += tgt[i, j] * vmat[vrow, j]
        coef = beta * acc
        tgt[i, k1] -= coef
        for j in range(k1 + 1, n):
            tgt[i, j] -= coef * vmat[vrow, j]


cdef void _apply_row_reflector_left(double[:, ::1] vmat, Py_ssize_t vrow,
                                    Py_ssize_t k1, Py_ssize_t nv, double beta,
                                    double[:, ::1] tgt, Py_ssize_t ncols,
                                    double[::1] w) noexcept nogil:
    # tgt[k1:nv, :ncols] <- (I - beta v v^T) tgt[k1:nv, :ncols],
    # v indexed by columns of vmat row vrow: v[k1] = 1, v[i] = vmat[vrow, i].
    cdef Py_ssize_t i, j
    cdef double vi, coef
    if beta == 0.0:
        return
    for j in range(ncols):
        w[j] = tgt[k1, j]
    for i in range(k1 + 1, nv):
        vi = vmat[vrow, i]
        for j in range(ncols):
            w[j] += vi * tgt[i, j]
    for j in range(ncols):
        tgt[k1, j] -= beta * w[j]
    for i in range(k1 + 1, nv):
        coef = beta * vmat[vrow, i]
        for j in range(ncols):
            tgt[i, j] -= coef * w[j]


# ----------------------------------------------------------------------------
# Bidiagonalization


cdef void _bidiagonalize_c(double[:, ::1] a, double[::1] d, double[::1] e,
                           double[::1] beta_l, double[::1] beta_r,
                           double[::1] w) noexcept nogil:
    cdef Py_ssize_t m = a.shape[0], n = a.shape[1], k
    cdef double alpha, beta
    for k in range(n):
        _build_col_reflector(a, k, m, &alpha, &beta)
        beta_l[k] = beta
        d[k] = alpha
        if beta != 0.0:
            _apply_col_reflector(a, k, k, m, beta, a, k + 1, n, w)
        if k <= n - 3:
            _build_row_reflector(a, k, n, &alpha, &beta)
            beta_r[k] = beta
            e[k] = alpha
            if beta != 0.0:
                _apply_row_reflector_right(a, k, k + 1, n, beta, a, k + 1, m)
        elif k == n - 2:
            e[k] = a[k, k + 1]


# ----------------------------------------------------------------------------
# Implicit-shift QR iteration


cdef inline void _givens(double a, double b, double* c, double* s,
                         double* r) noexcept nogil:
    cdef double rr = hypot(a, b)
    if rr == 0.0:
        c[0] = 1.0
        s[0] = 0.0
        r[0] = 0.0
    else:
        c[0] = a / rr
        s[0] = b / rr
        r[0] = rr


cdef void _rot_cols(double[:, ::1] mat, Py_ssize_t rows, Py_ssize_t i,
                    Py_ssize_t j, double c, double s) noexcept nogil:
    cdef Py_ssize_t r
    cdef double t
    for r in range(rows):
        t = c * mat[r, i] + s * mat[r, j]
        mat[r, j] = -s * mat[r, i] + c * mat[r, j]
        mat[r, i] = t


cdef void _gk_sweep(double[::1] d, double[::1] e, Py_ssize_t lo, Py_ssize_t hi,
                    double[:, ::1] u, Py_ssize_t urows,
                    double[:, ::1] v, Py_ssize_t vrows) noexcept nogil:
    cdef double dm = d[hi - 1], dn = d[hi], em = e[hi - 1]
    cdef double el = e[hi - 2] if hi - 1 > lo else 0.0
    cdef double t11 = dm * dm + el * el
    cdef double t12 = dm * em
    cdef double t22 = dn * dn + em * em
    cdef double delta = 0.5 * (t11 - t22)
    cdef double root = hypot(delta, t12)
    cdef double denom = delta + (root if delta >= 0.0 else -root)
    cdef double mu = t22 - (t12 * t12) / denom if denom != 0.0 else t22
    cdef double y = d[lo] * d[lo] - mu
    cdef double z = d[lo] * e[lo]
    cdef double c, s, r, f, g
    cdef Py_ssize_t k
    for k in range(lo, hi):
        _givens(y, z, &c, &s, &r)
        if k > lo:
            e[k - 1] = r
        f = c * d[k] + s * e[k]
        e[k] = c * e[k] - s * d[k]
        d[k] = f
        g = s * d[k + 1]
        d[k + 1] = c * d[k + 1]
        _rot_cols(v, vrows, k, k + 1, c, s)
        _givens(d[k], g, &c, &s, &r)
        d[k] = r
        f = c * e[k] + s * d[k + 1]
        d[k + 1] = c * d[k + 1] - s * e[k]
        e[k] = f
        _rot_cols(u, urows, k, k + 1, c, s)
        if k < hi - 1:
            y = e[k]
            z = s * e[k + 1]
            e[k + 1] = c * e[k + 1]


cdef void _chase_row_zero(double[::1] d, double[::1] e, Py_ssize_t i,
                          Py_ssize_t hi, double[:, ::1] u,
                          Py_ssize_t urows) noexcept nogil:
    cdef double f = e[i], c, s, r
    cdef Py_ssize_t j
    e[i] = 0.0
    for j in range(i + 1, hi + 1):
        _givens(d[j], f, &c, &s, &r)
        d[j] = r
        if j < hi:
            f = -s * e[j]
            e[j] = c * e[j]
        _rot_cols(u, urows, j, i, c, s)


cdef void _chase_col_zero(double[::1] d, double[::1] e, Py_ssize_t lo,
                          Py_ssize_t hi, double[:, ::1] v,
                          Py_ssize_t vrows) noexcept nogil:
    cdef double f = e[hi - 1], c, s, r
    cdef Py_ssize_t i
    e[hi - 1] = 0.0
    for i in range(hi - 1, lo - 1, -1):
        _givens(d[i], f, &c, &s, &r)
        d[i] = r
        if i > lo:
            f = -s * e[i - 1]
            e[i - 1] = c * e[i - 1]
        _rot_cols(v, vrows, i, hi, c, s)


cdef int _bidiag_qr(double[::1] d, double[::1] e, double[:, ::1] u,
                    Py_ssize_t urows, double[:, ::1] v, Py_ssize_t vrows,
                    long sweep_cap) noexcept nogil:
    cdef Py_ssize_t n = d.shape[0], hi, lo, i
    cdef long sweeps = 0
    cdef bint handled
    if n <= 1:
        return 0
    hi = n - 1
    while hi > 0:
        for i in range(hi):
            if fabs(e[i]) <= EPS * (fabs(d[i]) + fabs(d[i + 1])):
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
            if fabs(d[i]) <= UNDERFLOW_FLOOR:
                d[i] = 0.0
                _chase_row_zero(d, e, i, hi, u, urows)
                handled = True
                break
        if not handled and fabs(d[hi]) <= UNDERFLOW_FLOOR:
            d[hi] = 0.0
            _chase_col_zero(d, e, lo, hi, v, vrows)
            handled = True
        if not handled:
            _gk_sweep(d, e, lo, hi, u, urows, v, vrows)
        sweeps += 1
        if sweeps > sweep_cap:
            return 1
    return 0


# ----------------------------------------------------------------------------
# Lane entry points


cdef _finalize(double[::1] d, u, v):
    cdef Py_ssize_t j, n = d.shape[0]
    dd = np.asarray(d)
    for j in range(n):
        if dd[j] < 0.0:
            dd[j] = -dd[j]
            if v is not None:
                v[:, j] = -v[:, j]
    order = np.argsort(-dd, kind="stable")
    return (dd[order],
            None if u is None else np.ascontiguousarray(u[:, order]),
            None if v is None else np.ascontiguousarray(v[:, order]))


def svd_factored(a, long sweep_cap):
    """Thin SVD of a with m >= n: (U, s, V) with a = U diag(s) V^T."""
    cdef Py_ssize_t m = a.shape[0], n = a.shape[1], k
    work = np.array(a, dtype=np.float64, order="C", copy=True)
    d = np.zeros(n)
    e = np.zeros(n - 1 if n > 1 else 0)
    beta_l = np.zeros(n)
    beta_r = np.zeros(n)
    w = np.zeros(max(m, n))
    cdef double[:, ::1] av = work
    cdef double[::1] dv = d, ev = e, blv = beta_l, brv = beta_r, wv = w
    with nogil:
        _bidiagonalize_c(av, dv, ev, blv, brv, wv)
    u = np.zeros((m, n))
    np.fill_diagonal(u, 1.0)
    v = np.eye(n)
    cdef double[:, ::1] uv = u, vv = v
    with nogil:
        for k in range(n - 1, -1, -1):
            _apply_col_reflector(av, k, k, m, blv[k], uv, 0, n, wv)
        for k in range(n - 3, -1, -1):
            _apply_row_reflector_left(av, k, k + 1, n, brv[k], vv, n, wv)
    cdef int status
    with nogil:
        status = _bidiag_qr(dv, ev, uv, m, vv, n, sweep_cap)
    if status != 0:
        raise NoConvergence(f"bidiagonal QR exceeded {sweep_cap} sweeps")
    s, u, v = _finalize(dv, u, v)
    return u, s, v


def svd_values(a, long sweep_cap):
    """Singular values of a with m >= n, descending."""
    cdef Py_ssize_t m = a.shape[0], n = a.shape[1]
    work = np.array(a, dtype=np.float64, order="C", copy=True)
    d = np.zeros(n)
    e = np.zeros(n - 1 if n > 1 else 0)
    beta_l = np.zeros(n)
    beta_r = np.zeros(n)
    w = np.zeros(max(m, n))
    dummy = np.zeros((1, 2))
    cdef double[:, ::1] av = work, dum = dummy
    cdef double[::1] dv = d, ev = e, blv = beta_l, brv = beta_r, wv = w
    cdef int status
    with nogil:
        _bidiagonalize_c(av, dv, ev, blv, brv, wv)
        status = _bidiag_qr(dv, ev, dum, 0, dum, 0, sweep_cap)
    if status != 0:
        raise NoConvergence(f"bidiagonal QR exceeded {sweep_cap} sweeps")
    s, _, _ = _finalize(dv, None, None)
    return s


def house_qr(a, double thr_abs, bint full_q):
    """Householder QR with m >= n and a non-negative R diagonal."""
    cdef Py_ssize_t m = a.shape[0], n = a.shape[1], k, i, j, qcols
    work = np.array(a, dtype=np.float64, order="C", copy=True)
    beta_l = np.zeros(n)
    w = np.zeros(max(m, n))
    cdef double[:, ::1] av = work
    cdef double[::1] blv = beta_l, wv = w
    cdef double alpha, beta, tail2, nx
    cdef Py_ssize_t fail_col = -1
    cdef double fail_norm = 0.0
    d = np.zeros(n)
    cdef double[::1] dv = d
    with nogil:
        for k in range(n):
            tail2 = 0.0
            for i in range(k + 1, m):
                tail2 += av[i, k] * av[i, k]
            nx = sqrt(av[k, k] * av[k, k] + tail2)
            if nx <= thr_abs:
                fail_col = k
                fail_norm = nx
                break
            _build_col_reflector(av, k, m, &alpha, &beta)
            blv[k] = beta
            dv[k] = alpha
            _apply_col_reflector(av, k, k, m, beta, av, k + 1, n, wv)
    if fail_col >= 0:
        raise SmallColumn(fail_col, fail_norm)
    r = np.triu(work[:n, :n]).copy() if n else np.zeros((0, 0))
    np.fill_diagonal(r, d)
    qcols = m if full_q else n
    q = np.zeros((m, qcols))
    np.fill_diagonal(q, 1.0)
    cdef double[:, ::1] qv = q
    with nogil:
        for k in range(n - 1, -1, -1):
            _apply_col_reflector(av, k, k, m, blv[k], qv, 0, qcols, wv)
    for j in range(n):
        if r[j, j] < 0.0:
            r[j, j:] = -r[j, j:]
            q[:, j] = -q[:, j]
    return q, r


def genp_lu(a, double thr_abs):
    """No-pivoting LU of square a: (L, U, min_pivot, fail_step)."""
    cdef Py_ssize_t n = a.shape[0], k, i, j
    u = np.array(a, dtype=np.float64, order="C", copy=True)
    low = np.eye(n)
    cdef double[:, ::1] uv = u, lv = low
    cdef double p, min_pivot = np.inf, coef
    cdef Py_ssize_t fail = -1
    with nogil:
        for k in range(n):
            p = uv[k, k]
            if fabs(p) < min_pivot:
                min_pivot = fabs(p)
            if fabs(p) <= thr_abs:
                fail = k
                break
            for i in range(k + 1, n):
                coef = uv[i, k] / p
                lv[i, k] = coef
                uv[i, k] = 0.0
                for j in range(k + 1, n):
                    uv[i, j] -= coef * uv[k, j]
    return low, u, min_pivot, fail
