"""Independent oracle implementations used to freeze test expectations.

Nothing here shares code with the package kernels: the SVD oracle is
one-sided Jacobi, QR is modified Gram-Schmidt, least squares goes through
numpy, maxvol is exhaustive search.  Oracles favor clarity over speed.
"""

import itertools

import numpy as np


def jacobi_svd(a, tol=1e-14, max_sweeps=100):
    """One-sided Jacobi SVD: returns (U, sigma, V) with a = U diag(sigma) V^T."""
    a = np.array(a, dtype=np.float64)
    m, n = a.shape
    if m < n:
        v, sig, u = jacobi_svd(a.T, tol, max_sweeps)
        return u, sig, v
    u = a.copy()
    v = np.eye(n)
    for _ in range(max_sweeps):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha = u[:, i] @ u[:, i]
                beta = u[:, j] @ u[:, j]
                gamma = u[:, i] @ u[:, j]
                if abs(gamma) <= tol * np.sqrt(alpha * beta) or gamma == 0.0:
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                sign = 1.0 if zeta >= 0.0 else -1.0
                t = sign / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                for mat in (u, v):
                    ti = c * mat[:, i] - s * mat[:, j]
                    mat[:, j] = s * mat[:, i] + c * mat[:, j]
                    mat[:, i] = ti
        if not rotated:
            break
    sig = np.sqrt(np.sum(u * u, axis=0))
    order = np.argsort(-sig, kind="stable")
    sig = sig[order]
    u = u[:, order]
    v = v[:, order]
    nz = sig > 0
    u[:, nz] = u[:, nz] / sig[nz]
    return u, sig, v


def jacobi_singular_values(a, tol=1e-14, max_sweeps=100):
    return jacobi_svd(a, tol, max_sweeps)[1]


def mgs_qr(a):
    """Modified Gram-Schmidt QR with reorthogonalization, positive diagonal."""
    a = np.array(a, dtype=np.float64)
    m, n = a.shape
    q = np.zeros((m, n))
    r = np.zeros((n, n))
    for j in range(n):
        v = a[:, j].copy()
        for _ in range(2):
            for i in range(j):
                c = q[:, i] @ v
                r[i, j] += c
                v -= c * q[:, i]
        nrm = np.linalg.norm(v)
        r[j, j] = nrm
        q[:, j] = v / nrm
    return q, r


def lstsq(b, t):
    """Least-squares oracle through numpy."""
    return np.linalg.lstsq(np.asarray(b, float), np.asarray(t, float),
                           rcond=None)[0]


def pinv_normal_eq(m):
    """(M^T M)^-1 M^T for full-column-rank M."""
    m = np.asarray(m, float)
    return np.linalg.solve(m.T @ m, m.T)


def principal_angle_sines(x, y):
    """Sines of principal angles between ranges of x and y (orthonormal cols)."""
    qx, _ = np.linalg.qr(np.asarray(x, float))
    qy, _ = np.linalg.qr(np.asarray(y, float))
    c = np.linalg.svd(qx.T @ qy, compute_uv=False)
    c = np.clip(c, 0.0, 1.0)
    return np.sqrt(1.0 - c * c)


def subspace_distance(x, y):
    """Spectral distance between the orthogonal projectors onto the ranges."""
    qx, _ = np.linalg.qr(np.asarray(x, float))
    qy, _ = np.linalg.qr(np.asarray(y, float))
    px = qx @ qx.T
    py = qy @ qy.T
    return np.linalg.norm(px - py, 2)


def maxvol_exhaustive(a, r):
    """Globally maximal |det| r x r submatrix by brute force.

    Returns (rows, cols, absdet); ties broken by lexicographic index order.
    """
    a = np.asarray(a, float)
    m, n = a.shape
    best = (None, None, -1.0)
    for rows in itertools.combinations(range(m), r):
        sub = a[list(rows), :]
        for cols in itertools.combinations(range(n), r):
            d = abs(np.linalg.det(sub[:, list(cols)]))
            if d > best[2]:
                best = (rows, cols, d)
    return best


def circulant_dense(z):
    """Dense circulant with first column z: Z[i, j] = z[(i - j) mod n]."""
    z = np.asarray(z)
    n = z.size
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return z[idx]


def dft_unitary(n):
    """Unitary DFT matrix (1/sqrt(n)) (omega^{ij}) with omega = exp(2 pi i/n)."""
    i = np.arange(n)
    omega = np.exp(2j * np.pi / n)
    return (omega ** (np.outer(i, i))) / np.sqrt(n)


def srft_assemble(n, rho_plus, diag, cols):
    """Explicit sqrt(n/rho_plus) D Omega R assembly from given parts."""
    d = np.asarray(diag, complex)
    omega = dft_unitary(n)
    h = np.sqrt(n / rho_plus) * (d[:, None] * omega[:, list(cols)])
    return h


def lu_solve_pivoted(a, b):
    """Partial-pivoting LU solve, independent of the package GENP path."""
    a = np.array(a, dtype=np.float64)
    b = np.array(b, dtype=np.float64)
    n = a.shape[0]
    piv = np.arange(n)
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if p != k:
            a[[k, p]] = a[[p, k]]
            piv[[k, p]] = piv[[p, k]]
        a[k + 1 :, k] /= a[k, k]
        a[k + 1 :, k + 1 :] -= np.outer(a[k + 1 :, k], a[k, k + 1 :])
    x = b[piv].astype(float)
    for k in range(1, n):
        x[k] -= a[k, :k] @ x[:k]
    for k in range(n - 1, -1, -1):
        x[k] -= a[k, k + 1 :] @ x[k + 1 :]
        x[k] /= a[k, k]
    return x


def det_pivoted(a):
    """Determinant via partial-pivoting LU."""
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    sign = 1.0
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if a[p, k] == 0.0:
            return 0.0
        if p != k:
            a[[k, p]] = a[[p, k]]
            sign = -sign
        a[k + 1 :, k] /= a[k, k]
        a[k + 1 :, k + 1 :] -= np.outer(a[k + 1 :, k], a[k, k + 1 :])
    return sign * float(np.prod(np.diag(a)))
