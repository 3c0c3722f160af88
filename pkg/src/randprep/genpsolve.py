"""Elimination without row exchanges made dependable by randomized
preprocessing.

Plain elimination fails on inputs whose leading square blocks are singular.
Bordering the input with a random block pair, or shifting it by a random
low-rank term, removes that obstruction with probability 1; the width h of
the random blocks is guessed by doubling on failure.  The solution of the
original system is then recovered through the low-rank-update inversion
identity, with Newton iteration and iterative refinement as accuracy
fallbacks.
"""

import numpy as np

from typing import NamedTuple

from . import densela, randmats
from .errors import (
    CapacitanceSingular,
    Exhausted,
    NoConvergence,
    NotContractive,
    ShapeMismatch,
    SmallPivot,
    Stagnated,
)
from .randmats import _gen

__all__ = [
    "GenpFactorization",
    "GenpReport",
    "NewtonResult",
    "SolvePolicy",
    "genp",
    "genp_supported_solve",
    "iterative_refinement",
    "newton_inverse",
    "schur_after_h",
    "smw_inverse",
    "smw_solve",
]

PIVOT_TOL_DEFAULT = 1e-12
CAP_COND_CAP = 1e14
ROUTES = ("additive", "augment")
SOLVE_KINDS = ("gaussian", "signed")


class GenpFactorization(NamedTuple):
    """Unit-lower times upper factorization produced without row exchanges."""

    L: np.ndarray
    U: np.ndarray
    pivot_min: float
    ok: bool

    def solve(self, rhs):
        """Forward then back substitution; rhs may be a vector or a matrix."""
        y = np.asarray(rhs, dtype=np.float64).copy()
        n = self.L.shape[0]
        if y.shape[0] != n:
            raise ShapeMismatch(f"rhs must have {n} rows, got {y.shape[0]}")
        for i in range(1, n):
            y[i] -= self.L[i, :i] @ y[:i]
        for i in reversed(range(n)):
            y[i] = (y[i] - self.U[i, i + 1 :] @ y[i + 1 :]) / self.U[i, i]
        return y


class SolvePolicy(NamedTuple):
    """Knobs for the supported solve.

    route picks bordering ("augment") or the low-rank shift ("additive");
    kind picks the random family; scale multiplies the left factor, so
    scale 0 turns the preprocessing off; h0 is the starting block width.
    """

    route: str = "additive"
    kind: str = "gaussian"
    scale: float = 1.0
    h0: int = 1
    pivot_tol: float = PIVOT_TOL_DEFAULT
    refine_tol: float = 1e-10
    max_refine: int = 40


class GenpReport(NamedTuple):
    route: str
    kind: str
    h: int
    residual: float
    refine_iters: int


class NewtonResult(NamedTuple):
    """residuals[i] is ||I - X_i A||; the last entry belongs to inverse."""

    inverse: np.ndarray
    residuals: tuple

    @property
    def iters(self):
        return len(self.residuals) - 1


def _square(a, name="A"):
    arr = densela.dense(a)
    if arr.shape[0] != arr.shape[1]:
        raise ShapeMismatch(f"{name} must be square, got {arr.shape}")
    return arr


def genp(a, pivot_tol=PIVOT_TOL_DEFAULT):
    """Eliminate with no row exchanges, failing fast on a small pivot.

    The raised SmallPivot carries the partial factorization on its
    ``factorization`` attribute with ok False.
    """
    arr = _square(a)
    n = arr.shape[0]
    thresh = pivot_tol * densela.spectral_norm(arr)
    lower = np.eye(n)
    upper = arr.copy()
    pivot_min = np.inf
    for k in range(n):
        piv = upper[k, k]
        pivot_min = min(pivot_min, abs(piv))
        if abs(piv) <= thresh:
            exc = SmallPivot(k + 1, piv)
            exc.factorization = GenpFactorization(lower, upper, pivot_min, False)
            raise exc
        lower[k + 1 :, k] = upper[k + 1 :, k] / piv
        upper[k + 1 :, k:] -= np.outer(lower[k + 1 :, k], upper[k, k:])
        upper[k + 1 :, k] = 0.0
    return GenpFactorization(lower, upper, pivot_min, True)


def schur_after_h(k_mat, h, pivot_tol=PIVOT_TOL_DEFAULT):
    """Trailing block left by h elimination steps on a bordered matrix."""
    arr = _square(k_mat, "K")
    n = arr.shape[0]
    if not 1 <= h < n:
        raise ValueError(f"h must lie in [1, {n - 1}], got {h}")
    thresh = pivot_tol * densela.spectral_norm(arr)
    work = arr.copy()
    for k in range(h):
        piv = work[k, k]
        if abs(piv) <= thresh:
            raise SmallPivot(k + 1, piv)
        work[k + 1 :, k:] -= np.outer(work[k + 1 :, k] / piv, work[k, k:])
        work[k + 1 :, k] = 0.0
    return work[h:, h:].copy()


def _capacitance_inverse_apply(csolve, u, v, rhs_solved):
    """Apply the update correction: rhs_solved - C^-1 U G^-1 V^T rhs_solved."""
    cu = csolve(u)
    gram = np.eye(u.shape[1]) + v.T @ cu
    if np.linalg.cond(gram) > CAP_COND_CAP:
        raise CapacitanceSingular(
            f"capacitance condition exceeds {CAP_COND_CAP:.0e}"
        )
    return rhs_solved - cu @ np.linalg.solve(gram, v.T @ rhs_solved)


def smw_solve(c_factor, u, v, b):
    """Solve (C + U V^T) x = b through solves against C alone.

    c_factor is a GenpFactorization of C or any callable applying C^-1.
    """
    csolve = c_factor.solve if isinstance(c_factor, GenpFactorization) else c_factor
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ShapeMismatch("U and V must agree in shape")
    return _capacitance_inverse_apply(csolve, u, v, csolve(b))


def smw_inverse(cinv, u, v):
    """(C + U V^T)^-1 from an explicit C^-1."""
    cinv = np.asarray(cinv, dtype=np.float64)
    return smw_solve(lambda rhs: cinv @ rhs, u, v, np.eye(cinv.shape[0]))


def _draw_pair(n, h, kind, scale, gen):
    if kind == "gaussian":
        u = randmats.gaussian(n, h, gen)
        v = randmats.gaussian(n, h, gen)
        u /= densela.spectral_norm(u)
        v /= densela.spectral_norm(v)
    elif kind == "signed":
        u, v, _ = randmats.signed_sparse_uvw(n, h, gen)
    else:
        raise ValueError(f"unknown preprocessor kind {kind!r}")
    return scale * u, v


def genp_supported_solve(a, b, policy=SolvePolicy(), rng=0):
    """Solve A x = b by eliminating a preprocessed copy without exchanges.

    Doubles the block width h on each small-pivot failure.  On success the
    preprocessed solves are lifted to A through the low-rank-update
    identity (the bordered route reads C^-1 off trailing coordinates of
    bordered solves), then polished by iterative refinement.
    """
    arr = _square(a)
    n = arr.shape[0]
    bvec = np.asarray(b, dtype=np.float64)
    if bvec.shape != (n,):
        raise ShapeMismatch(f"b must have shape ({n},), got {bvec.shape}")
    if policy.route not in ROUTES:
        raise ValueError(f"unknown route {policy.route!r}")
    gen = _gen(rng)

    h = policy.h0
    while h <= n // 2:
        u, v = _draw_pair(n, h, policy.kind, policy.scale, gen)
        try:
            if policy.route == "additive":
                fac = genp(arr - u @ v.T, policy.pivot_tol)
                csolve = fac.solve
            else:
                bordered = np.block([[np.eye(h), v.T], [u, arr]])
                fac = genp(bordered, policy.pivot_tol)

                def csolve(rhs, fac=fac, h=h):
                    pad = np.zeros((h,) + rhs.shape[1:])
                    return fac.solve(np.concatenate([pad, rhs]))[h:]

            # A = C + UV^T for either route, so one lift serves both.
            solver = lambda rhs: smw_solve(csolve, u, v, rhs)
            solver(bvec)
        except (SmallPivot, CapacitanceSingular):
            h *= 2
            continue
        break
    else:
        raise Exhausted(f"no width up to {n // 2} made elimination viable")

    try:
        x, iters = _refine_tracked(
            arr, solver, bvec, policy.max_refine, policy.refine_tol
        )
    except Stagnated as exc:
        x, iters = exc.x, exc.iters
    residual = float(
        np.linalg.norm(arr @ x - bvec) / max(np.linalg.norm(bvec), 1e-300)
    )
    return x, GenpReport(policy.route, policy.kind, h, residual, iters)


def newton_inverse(a, x0, max_iters=60, tol=1e-12):
    """Quadratically contracting inversion X <- 2X - XAX."""
    arr = _square(a)
    x = densela.dense(x0).copy()
    eye = np.eye(arr.shape[0])
    theta = densela.spectral_norm(eye - x @ arr)
    if theta >= 1.0:
        raise NotContractive(f"||I - X0 A|| = {theta:.3e} >= 1")
    residuals = [theta]
    for _ in range(max_iters):
        if theta <= tol:
            return NewtonResult(x, tuple(residuals))
        x = 2.0 * x - x @ arr @ x
        theta = densela.spectral_norm(eye - x @ arr)
        residuals.append(theta)
    if theta <= tol:
        return NewtonResult(x, tuple(residuals))
    raise NoConvergence(f"residual {theta:.3e} after {max_iters} iterations")


def _refine_tracked(arr, approx_solver, bvec, max_iters, tol):
    bnorm = np.linalg.norm(bvec)
    n = arr.shape[0]
    if bnorm == 0.0:
        return np.zeros(n), 0
    x = np.zeros(n)
    rnorm = bnorm
    resid = bvec
    slow = 0
    for i in range(max_iters):
        x = x + approx_solver(resid)
        resid = bvec - arr @ x
        new_norm = np.linalg.norm(resid)
        if new_norm / bnorm <= tol:
            return x, i + 1
        # Three consecutive near-flat contractions mean the corrector
        # cannot reach tol; surface the best iterate with the failure.
        slow = slow + 1 if new_norm > 0.9 * rnorm else 0
        if slow >= 3:
            exc = Stagnated(f"residual ratio above 0.9 at iteration {i + 1}")
            exc.x = x
            exc.iters = i + 1
            raise exc
        rnorm = new_norm
    return x, max_iters


def iterative_refinement(a, approx_solver, b, max_iters=50, tol=1e-12):
    """Stationary refinement of an approximate solver for A x = b."""
    arr = _square(a)
    bvec = np.asarray(b, dtype=np.float64)
    if bvec.shape != (arr.shape[0],):
        raise ShapeMismatch("b must be a vector matching A")
    x, _ = _refine_tracked(arr, approx_solver, bvec, max_iters, tol)
    return x
