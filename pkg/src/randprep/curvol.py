"""Maximal-volume skeleton search and CUR cross approximation.

The search is the alternating greedy swap: seed the row and column sets from
completely pivoted elimination, then repeatedly pull in the row or column that
grows |det A11| through the rank-one update ratio until every coefficient of
C A11^{-1} and A11^{-1} R is dominated.  Each accepted swap multiplies the
volume by that ratio, so the volume never decreases.
"""

import itertools
import logging
import math
from typing import NamedTuple

import numpy as np

from . import densela
from .errors import NoConvergence, SingularPivotBlock

_log = logging.getLogger(__name__)

DOM_TOL_DEFAULT = 0.01
MAX_SWEEPS_DEFAULT = 50
COND_CAP = 1e12
# Exhaustive volume certification is attempted below this submatrix count.
CERT_CAP = 5000


class SkeletonPick(NamedTuple):
    """A rho x rho pivot block addressed by row and column index sets."""

    row_idx: np.ndarray
    col_idx: np.ndarray
    volume: float
    nu: float


def _cp_seed(mat, rho):
    """Row and column pivots of rho completely pivoted elimination steps.

    Column-scan partial pivoting would lock onto the leading coordinates for
    diagonal-like inputs, where single swaps cannot escape (all off-cross
    coefficients vanish); picking the global pivot each step avoids that.
    """
    work = np.array(mat, dtype=np.float64)
    m, n = work.shape
    rows, cols = [], []
    for _ in range(rho):
        i, j = np.unravel_index(int(np.argmax(np.abs(work))), work.shape)
        pivot = work[i, j]
        if pivot == 0.0:
            break
        rows.append(i)
        cols.append(j)
        work -= np.outer(work[:, j], work[i, :]) / pivot
        work[i, :] = 0.0
        work[:, j] = 0.0
    # Structurally deficient input; pad with unused indices.
    rest_r = [i for i in range(m) if i not in set(rows)]
    rest_c = [j for j in range(n) if j not in set(cols)]
    rows += rest_r[: rho - len(rows)]
    cols += rest_c[: rho - len(cols)]
    return np.asarray(rows, dtype=np.intp), np.asarray(cols, dtype=np.intp)


def _block_inverse(arr, rows, cols):
    block = arr[np.ix_(rows, cols)]
    sig = densela.singular_values(block)
    if sig[-1] == 0.0 or sig[0] / sig[-1] > COND_CAP:
        raise SingularPivotBlock(
            f"pivot block condition beyond {COND_CAP:.0e}; reseed the search"
        )
    return block, np.linalg.inv(block)


def _certified_volume(arr, rho):
    """Exhaustive (v_rho, argmax rows, argmax cols) on small instances.

    Returns None when the candidate count exceeds CERT_CAP; ties keep the
    lexicographically first index pair.
    """
    m, n = arr.shape
    if math.comb(m, rho) * math.comb(n, rho) > CERT_CAP:
        return None
    best, best_rows, best_cols = 0.0, None, None
    for rs in itertools.combinations(range(m), rho):
        sub = arr[list(rs), :]
        for cs in itertools.combinations(range(n), rho):
            vol = abs(np.linalg.det(sub[:, list(cs)]))
            if vol > best:
                best, best_rows, best_cols = vol, rs, cs
    return best, best_rows, best_cols


def maxvol(a, rho, max_sweeps=MAX_SWEEPS_DEFAULT, dom_tol=DOM_TOL_DEFAULT):
    """Dominant rho x rho submatrix by alternating greedy row/column swaps."""
    arr = densela.dense(a)
    m, n = arr.shape
    if not 1 <= rho <= min(m, n):
        raise ValueError(f"need 1 <= rho <= {min(m, n)}, got {rho}")
    if not dom_tol >= 0:
        raise ValueError("dom_tol must be nonnegative")
    rows, cols = _cp_seed(arr, rho)
    converged = False
    for _ in range(max_sweeps):
        swapped = False
        # Row pass: every coefficient of C A11^{-1} dominated.
        while True:
            _, inv = _block_inverse(arr, rows, cols)
            g = arr[:, cols] @ inv
            i, j = np.unravel_index(int(np.argmax(np.abs(g))), g.shape)
            if abs(g[i, j]) <= 1.0 + dom_tol:
                break
            rows[j] = i
            swapped = True
        # Column pass: every coefficient of A11^{-1} R dominated.
        while True:
            _, inv = _block_inverse(arr, rows, cols)
            h = inv @ arr[rows, :]
            i, j = np.unravel_index(int(np.argmax(np.abs(h))), h.shape)
            if abs(h[i, j]) <= 1.0 + dom_tol:
                break
            cols[i] = j
            swapped = True
        if not swapped:
            converged = True
            break
    block = arr[np.ix_(rows, cols)]
    sign, logdet = np.linalg.slogdet(block)
    volume = float(abs(sign) * np.exp(logdet)) if sign != 0 else 0.0
    certified = _certified_volume(arr, rho)
    nu = 1.0
    if certified is not None:
        best, best_rows, best_cols = certified
        if best > volume and best_rows is not None:
            # The certification enumerated every pick anyway; adopt its
            # optimum, which is always swap-dominant, over a local trap.
            rows = np.asarray(best_rows, dtype=np.intp)
            cols = np.asarray(best_cols, dtype=np.intp)
            volume = best
            converged = True
        if volume > 0.0:
            nu = max(best / volume, 1.0)
    pick = SkeletonPick(
        np.sort(rows).astype(np.intp), np.sort(cols).astype(np.intp), volume, nu
    )
    if not converged:
        _log.warning("maxvol hit the sweep cap %d; returning best pick", max_sweeps)
        exc = NoConvergence(f"dominance not reached within {max_sweeps} sweeps")
        exc.pick = pick
        raise exc
    return pick


def _pick_blocks(arr, pick):
    rows = np.asarray(pick.row_idx, dtype=np.intp)
    cols = np.asarray(pick.col_idx, dtype=np.intp)
    m, n = arr.shape
    if rows.size != cols.size:
        raise ValueError("row and column index sets must have equal size")
    if len(set(rows.tolist())) != rows.size or len(set(cols.tolist())) != cols.size:
        raise ValueError("skeleton indices must be distinct")
    if rows.size == 0 or rows.min() < 0 or rows.max() >= m:
        raise ValueError("row indices out of range")
    if cols.min() < 0 or cols.max() >= n:
        raise ValueError("column indices out of range")
    a11 = arr[np.ix_(rows, cols)]
    sig = densela.singular_values(a11)
    if sig[-1] == 0.0 or sig[0] / sig[-1] > COND_CAP:
        raise SingularPivotBlock(
            f"pivot block condition beyond {COND_CAP:.0e}"
        )
    return arr[:, cols], a11, arr[rows, :]


def cur(a, pick):
    """Cross approximation blocks and the Chebyshev error of C A11^{-1} R."""
    arr = densela.dense(a)
    c_blk, a11, r_blk = _pick_blocks(arr, pick)
    err = densela.chebyshev_norm(arr - c_blk @ np.linalg.solve(a11, r_blk))
    return c_blk, a11, r_blk, float(err)


def leading_from_skeleton(a, pick):
    """Orthogonalized C A11^{-1} as an approximate leading left basis."""
    arr = densela.dense(a)
    c_blk, a11, _ = _pick_blocks(arr, pick)
    coef = np.linalg.solve(a11.T, c_blk.T).T
    q, _ = densela.qr_thin(coef)
    return q
