"""Randomized singular-space approximation.

Leading-space sketching with dense or structured multipliers (optional
power passes), compression and rank search on top of the sketch monitor,
four trailing-space routes (northern, northwestern, and additive
preprocessing, plus the leading-complement detour), approximate SVD
recovery from a right basis, and the residual metrics the experiment
tables report.
"""

import logging
from typing import NamedTuple

import numpy as np

from . import densela, precond, randmats
from .errors import (
    Failure,
    NoGap,
    RankCollapse,
    RankDeficient,
    ZeroMatrix,
)
from .randmats import _gen

__all__ = [
    "SketchResult",
    "SquareProblem",
    "TrailingResult",
    "compress_to_rank",
    "leading_error_link",
    "leading_sketch",
    "nmb",
    "numrank_search",
    "phi_diagnostics",
    "power_transform",
    "rect_reduce",
    "recursive_refine",
    "subspace_residual",
    "svd_from_right_basis",
    "trailing_via_additive",
    "trailing_via_leading",
    "trailing_via_north",
    "trailing_via_nw",
]

_log = logging.getLogger(__name__)

# Relative acceptance monitor ||A B|| <= TAU_DEFAULT * ||A||; far above the
# trailing singular values it certifies, far below the leading ones.
TAU_DEFAULT = 1e-6
# numrank_search accepts a sketch size once rel_err <= tol * MONITOR_FACTOR.
MONITOR_FACTOR = 10.0
# Extra sketch columns for complex structured multipliers; dense multipliers
# need none.
SRFT_OVERSAMPLE = 20

TRAILING_METHODS = ("Via41_1", "Via41_2", "Via41_3", "Via31t")
REDUCE_ROUTES = ("identity", "gram", "premul", "pad_right", "pad_bottom")

# Child-stream tag backing the single automatic resample after a monitor miss.
_RETRY_TAG = 101


class SketchResult(NamedTuple):
    """Right-space sketch: raw X, orthonormal Q, and the projector error."""

    X: np.ndarray
    Q: np.ndarray
    rel_err: float
    multiplier: randmats.PreprocessorKind
    power: int


class TrailingResult(NamedTuple):
    """Orthonormal trailing basis B with its relative residual ||AB||/||A||."""

    B: np.ndarray
    residual: float
    method: str


def power_transform(a, h):
    """B_h = (A A^T)^h A; singular spaces kept, sigma_j raised to 2h+1."""
    arr = densela.dense(a)
    if not (isinstance(h, (int, np.integer)) and h >= 0):
        raise ValueError("power h must be a nonnegative integer")
    out = arr
    for _ in range(int(h)):
        out = arr @ (arr.T @ out)
    return out


def _block(tag, rows, cols, gen):
    """One real multiplier block of the named family."""
    if tag == "gaussian":
        return randmats.gaussian(rows, cols, gen)
    if tag in ("circulant", "subcirculant"):
        # A leftmost circulant block; at cols == rows it is the full circulant.
        return randmats.subcirculant(rows, cols, gen)
    if tag == "signed":
        return randmats.signed_sparse_uvw(rows, cols, gen)[0]
    raise ValueError(f"no real multiplier block for kind {tag!r}")


def _kind_tag(kind):
    tag = kind.tag if isinstance(kind, randmats.PreprocessorKind) else str(kind)
    if tag not in randmats.KNOWN_KINDS:
        raise ValueError(f"unknown preprocessor kind {tag!r}")
    return tag


def leading_sketch(a, rho_plus, kind, h, rng):
    """Sketch the leading right singular space: X = B_h^T H, Q = orth(X).

    H has one column per requested basis vector and rows matching A.  The
    complex structured multiplier is folded back to a real orthonormal X by
    taking the leading left singular vectors of (Re X | Im X).
    """
    arr = densela.dense(a)
    m, n = arr.shape
    if not 1 <= rho_plus <= n:
        raise ValueError(f"need 1 <= rho_plus <= {n}, got {rho_plus}")
    tag = _kind_tag(kind)
    sig_a = densela.singular_values(arr)
    if sig_a[0] == 0.0:
        raise ZeroMatrix("cannot sketch the zero matrix")
    b_h = power_transform(arr, h)
    # The powered spectrum is the input spectrum raised entrywise, so the
    # sketched matrix's rank gate comes for free.
    sig_h = sig_a ** (2 * int(h) + 1)
    rank_h = int((sig_h >= densela.QR_RANK_TOL * sig_h[0]).sum())
    gen = _gen(rng)
    if tag == "srft":
        xc = b_h.T @ randmats.srft(m, rho_plus, gen)
        emb = np.hstack([xc.real, xc.imag])
        # Keep the embedding's singular values as column weights so the real
        # sketch carries the sampled spectrum, as a real multiplier would.
        trip_emb = densela.svd(emb)
        x = trip_emb.S[:, :rho_plus] * trip_emb.sigma[:rho_plus]
    else:
        x = b_h.T @ _block(tag, m, rho_plus, gen)
    trip = densela.svd(x)
    rank_x = 0
    if trip.sigma.size and trip.sigma[0] > 0.0:
        rank_x = int(
            (trip.sigma >= densela.QR_RANK_TOL * trip.sigma[0]).sum()
        )
    if rank_x < min(rho_plus, rank_h):
        raise RankCollapse(
            f"sketch rank {rank_x} below min(rho_plus, rank) = "
            f"{min(rho_plus, rank_h)}; resample with a fresh stream"
        )
    q = trip.S
    rel = densela.spectral_norm(arr @ q @ q.T - arr) / sig_a[0]
    meta = randmats.PreprocessorKind(tag, rows=m, cols=rho_plus)
    return SketchResult(x, q, float(rel), meta, int(h))


def compress_to_rank(x, rho):
    """The rho leading left singular vectors of a sketch, as an n x rho basis."""
    arr = densela.dense(x)
    if not 1 <= rho <= arr.shape[1]:
        raise ValueError(f"need 1 <= rho <= {arr.shape[1]}, got {rho}")
    return densela.svd(arr).S[:, :rho].copy()


def numrank_search(a, tol, kind, rng, c_monitor=MONITOR_FACTOR):
    """Smallest sketch width whose projector error passes tol * c_monitor.

    Bisection over [0, n]: an empty sketch always fails, a square one always
    passes, and the winner is re-checked on fresh draws.  An unstable recheck
    means the spectrum has no usable gap at this tolerance.
    """
    arr = densela.dense(a)
    n = arr.shape[1]
    if not tol > 0:
        raise ValueError("tol must be positive")
    if densela.spectral_norm(arr) == 0.0:
        return 0
    gen = _gen(rng)
    threshold = tol * c_monitor

    def passes(width):
        try:
            return leading_sketch(arr, width, kind, 0, gen).rel_err <= threshold
        except RankCollapse:
            # One fresh draw; a repeat collapse fails the probe honestly.
            return leading_sketch(arr, width, kind, 0, gen).rel_err <= threshold

    lo, hi = 0, n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if passes(mid):
            hi = mid
        else:
            lo = mid
    if hi == n:
        # A square Q reproduces A exactly; nothing to confirm.
        return n
    if not passes(hi):
        raise NoGap(
            f"monitor unstable at width {hi}: rel_err exceeded "
            f"{threshold:.1e} on the confirmation draw"
        )
    return hi


def svd_from_right_basis(a, q_t):
    """Recover (S, sigma, T) approximations from a right-space basis Q_T."""
    arr = densela.dense(a)
    qt = densela.dense(q_t)
    if qt.shape[0] != arr.shape[1]:
        raise ValueError(
            f"basis rows {qt.shape[0]} do not match columns {arr.shape[1]}"
        )
    rho = qt.shape[1]
    aq = arr @ qt
    sig = densela.singular_values(aq)
    if sig[0] == 0.0 or (sig >= densela.QR_RANK_TOL * sig[0]).sum() < rho:
        raise RankCollapse("A Q_T lost column rank; the basis misses range(A^T)")
    q_s = densela.svd(aq).S
    core = densela.svd(q_s.T @ arr @ qt)
    return q_s @ core.S, core.sigma.copy(), qt @ core.T


def leading_error_link(a, q, truth_t):
    """Both sides of the projector-error bound for an aligned basis error.

    Delta = Q - truth_t V with V the best orthonormal-row alignment; returns
    (||AQQ^T - A|| / ||A||, (2 + ||Delta||) ||Delta|| + sigma_{rho+1}/sigma_1).
    """
    arr = densela.dense(a)
    qm = densela.dense(q)
    tt = densela.dense(truth_t)
    n = arr.shape[1]
    if qm.shape[0] != n or tt.shape[0] != n:
        raise ValueError("basis rows must match the column count of A")
    rho = tt.shape[1]
    if qm.shape[1] < rho:
        raise ValueError("Q must carry at least as many columns as the truth")
    sig = densela.singular_values(arr)
    if sig[0] == 0.0:
        raise ZeroMatrix("the zero matrix has no leading singular space")
    # Procrustes alignment: V = U W^T from the SVD of truth^T Q.
    cross = densela.svd(tt.T @ qm)
    v = cross.S @ cross.T.T
    delta = densela.spectral_norm(qm - tt @ v)
    lhs = densela.spectral_norm(arr @ qm @ qm.T - arr) / sig[0]
    tail = float(sig[rho] / sig[0]) if rho < sig.size else 0.0
    rhs = (2.0 + delta) * delta + tail
    return float(lhs), float(rhs)


def phi_diagnostics(a, h, rho):
    """Frobenius-error diagnostics (phi, phi_plus) of a realized sketch.

    phi uses the realized ||(A_rho^T H)^+||; phi_plus replaces it with the
    head-block bound ||B^+||/sigma_rho for B = S_rho^T H.  The bound relation
    between the two pseudoinverse norms is logged, not raised.
    """
    arr = densela.dense(a)
    hm = densela.dense(h)
    m, n = arr.shape
    if hm.shape[0] != m:
        raise ValueError(f"multiplier rows {hm.shape[0]} do not match m={m}")
    if not 1 <= rho <= min(m, n):
        raise ValueError(f"need 1 <= rho <= {min(m, n)}, got {rho}")
    trip = densela.svd(arr)
    s_mat, sig, t_mat = trip.S, trip.sigma, trip.T
    sigma_rho = float(sig[rho - 1])
    sigma_next = float(sig[rho]) if rho < sig.size else 0.0
    if sigma_rho == 0.0:
        raise RankDeficient(f"sigma_{rho} vanishes; no rank-{rho} head")
    head = s_mat[:, :rho].T @ hm
    sketch_head = t_mat[:, :rho] @ (sig[:rho, None] * head)
    sig_sk = densela.singular_values(sketch_head)
    pinv_norm = float("inf") if sig_sk[rho - 1] == 0.0 else 1.0 / sig_sk[rho - 1]
    sig_b = densela.singular_values(head)
    nu_plus = float("inf") if sig_b[rho - 1] == 0.0 else 1.0 / sig_b[rho - 1]
    bound = nu_plus / sigma_rho
    level = logging.DEBUG if pinv_norm <= bound * (1.0 + 1e-9) else logging.WARNING
    _log.log(
        level,
        "head-sketch pinv norm %.6e vs bound %.6e (rho=%d)",
        pinv_norm,
        bound,
        rho,
    )
    spread = np.sqrt(n - rho) * densela.frobenius_norm(hm)
    phi = spread * sigma_next * pinv_norm
    phi_plus = spread * nu_plus * sigma_next / sigma_rho
    return float(phi), float(phi_plus)


def _attempt_gens(rng):
    """One generator per attempt; a child stream backs the single resample."""
    if isinstance(rng, np.random.Generator):
        return [rng, rng]
    if not isinstance(rng, randmats.RngStream):
        rng = randmats.RngStream(int(rng))
    return [rng.generator(), rng.child(_RETRY_TAG).generator()]


def _orthonormal_tail(arr, y, r):
    """Orthonormalize y; oversampled bases keep the r directions A moves least."""
    q, _ = densela.qr_thin(y)
    if q.shape[1] > r:
        trip = densela.svd(arr @ q)
        q = q @ trip.T[:, trip.T.shape[1] - r :]
    return q


def _run_monitored(arr, r, tau, rng, method, build):
    """Shared accept/resample loop around one trailing-basis construction."""
    norm_a = densela.spectral_norm(arr)
    if norm_a == 0.0:
        raise ZeroMatrix("every direction trails the zero matrix")
    last = float("inf")
    for gen in _attempt_gens(rng):
        try:
            b = _orthonormal_tail(arr, build(gen), r)
        except RankDeficient:
            # Rank-deficient preprocessing is one of the probability-zero
            # misses the resample is for.
            continue
        resid = float(densela.spectral_norm(arr @ b) / norm_a)
        if resid <= tau:
            return TrailingResult(b, resid, method)
        last = resid
    raise Failure(
        f"{method} residual {last:.3e} above tau={tau:.1e} after a resample"
    )


def _trailing_shape(a, r):
    arr = densela.dense(a)
    m, n = arr.shape
    if m < n:
        raise ValueError("needs m >= n; square a wide input via rect_reduce")
    if not 1 <= r <= n:
        raise ValueError(f"need 1 <= r <= {n}, got {r}")
    return arr, m, n


def trailing_via_north(a, r, kind, rng, tau=TAU_DEFAULT, s=None):
    """Trailing basis from northern augmentation: first s columns of a left
    inverse of (V^T over A), compressed to width r when s > r."""
    arr, m, n = _trailing_shape(a, r)
    tag = _kind_tag(kind)
    s = r if s is None else int(s)
    if s < r:
        raise ValueError(f"augmentation width s={s} cannot be below r={r}")

    def build(gen):
        v = _block(tag, n, s, gen)
        return densela.left_inverse(precond.augment_north(arr, v))[:, :s]

    return _run_monitored(arr, r, tau, rng, "Via41_1", build)


def trailing_via_nw(a, r, kind, rng, tau=TAU_DEFAULT):
    """Trailing basis from northwestern augmentation with q = s = r.

    Dense and circulant borders get a Gaussian corner W; the signed family
    supplies its own coupled (U, V, W) triple.
    """
    arr, m, n = _trailing_shape(a, r)
    tag = _kind_tag(kind)

    def build(gen):
        if tag == "signed":
            if m != n:
                raise ValueError("signed borders need a square input")
            u, v, w = randmats.signed_sparse_uvw(n, r, gen)
        else:
            u = _block(tag, m, r, gen)
            v = _block(tag, n, r, gen)
            w = precond.make_w(r, r, "GaussianW", gen)
        k = precond.augment_northwest(arr, u, v, w)
        li = densela.left_inverse(k)
        # (O | I_n) K^(I) (O over U): bottom n rows, then the U block only.
        return li[r:, r:] @ u

    return _run_monitored(arr, r, tau, rng, "Via41_2", build)


def trailing_via_additive(a, r, kind, rng, tau=TAU_DEFAULT):
    """Trailing basis through the additive route: Y = C^(I) U for C = A + UV^T."""
    arr, m, n = _trailing_shape(a, r)
    tag = _kind_tag(kind)

    def build(gen):
        if tag == "signed":
            if m != n:
                raise ValueError("signed borders need a square input")
            u, v, _ = randmats.signed_sparse_uvw(n, r, gen)
        else:
            u = _block(tag, m, r, gen)
            v = _block(tag, n, r, gen)
        c = precond.additive(arr, u, v, "Plus")
        return densela.left_inverse(c) @ u

    return _run_monitored(arr, r, tau, rng, "Via41_3", build)


def nmb(b, randomized=False, rng=None, tau=TAU_DEFAULT):
    """Orthonormal basis of the orthogonal complement of range(B).

    The direct route reads it off a full QR.  The randomized variant runs
    the northern trailing construction on B^T squared by zero rows, for
    faithfulness experiments only.
    """
    arr = densela.dense(b)
    n, rho = arr.shape
    if not 1 <= rho < n:
        raise ValueError(f"need 1 <= columns < rows, got {arr.shape}")
    sig = densela.singular_values(arr)
    if sig[rho - 1] == 0.0 or sig[0] > 1e12 * sig[rho - 1]:
        raise RankDeficient(
            f"complement undefined: cond(B) beyond 1e12 "
            f"(sigma_1={sig[0]:.3e}, sigma_rho={sig[rho - 1]:.3e})"
        )
    if not randomized:
        q, _ = densela.qr_full(arr)
        return q[:, rho:].copy()
    if rng is None:
        raise ValueError("the randomized complement needs an rng")
    padded = np.vstack([arr.T, np.zeros((n - rho, n))]) / sig[0]
    return trailing_via_north(padded, n - rho, "gaussian", rng, tau).B


def trailing_via_leading(a, rho, kind, rng):
    """Trailing basis as the complement of a sketched leading basis.

    Dense multipliers sketch at width rho exactly; the complex structured
    multiplier oversamples by SRFT_OVERSAMPLE and compresses back.
    """
    arr = densela.dense(a)
    n = arr.shape[1]
    if not 1 <= rho < n:
        raise ValueError(f"need 1 <= rho < {n}, got {rho}")
    tag = _kind_tag(kind)
    rho_plus = min(n, rho + SRFT_OVERSAMPLE) if tag == "srft" else rho
    sketch = leading_sketch(arr, rho_plus, tag, 0, rng)
    basis = sketch.Q if rho_plus == rho else compress_to_rank(sketch.X, rho)
    b = nmb(basis)
    resid = densela.spectral_norm(arr @ b) / densela.spectral_norm(arr)
    return TrailingResult(b, float(resid), "Via31t")


class SquareProblem(NamedTuple):
    """A square stand-in whose null space maps back onto the original's."""

    route: str
    matrix: np.ndarray
    cols: int

    def pull_back(self, basis):
        """Restrict square-problem null vectors to original coordinates."""
        arr = densela.dense(basis)
        if arr.shape[0] != self.matrix.shape[1]:
            raise ValueError(
                f"expected {self.matrix.shape[1]} rows, got {arr.shape[0]}"
            )
        if self.route == "pad_right":
            return arr[: self.cols, :].copy()
        return arr


def rect_reduce(a, route=None, rng=None):
    """Square reformulations sharing the input's null space.

    Routes: identity (square input), gram (A^T A), premul (B^T A for a full
    row rank Gaussian B, wide inputs), pad_right (zero columns, tall inputs),
    pad_bottom (zero rows, wide inputs).  pad_right acquires m - n spurious
    null directions in the padding coordinates; pull_back drops them.
    """
    arr = densela.dense(a)
    m, n = arr.shape
    if route is None:
        route = "identity" if m == n else "gram"
    if route not in REDUCE_ROUTES:
        raise ValueError(f"unknown route {route!r}")
    if route == "identity":
        if m != n:
            raise ValueError("identity route needs a square input")
        return SquareProblem(route, arr.copy(), n)
    if route == "gram":
        return SquareProblem(route, arr.T @ arr, n)
    if route == "premul":
        if m > n:
            raise ValueError("premul route needs m <= n")
        if rng is None:
            raise ValueError("premul route needs an rng")
        return SquareProblem(route, randmats.gaussian(m, n, _gen(rng)).T @ arr, n)
    if route == "pad_right":
        if m <= n:
            raise ValueError("pad_right route needs m > n")
        return SquareProblem(route, np.hstack([arr, np.zeros((m, m - n))]), n)
    if m >= n:
        raise ValueError("pad_bottom route needs m < n")
    return SquareProblem(route, np.vstack([arr, np.zeros((n - m, n))]), n)


_REFINE_BUILDERS = {
    "Via41_1": trailing_via_north,
    "Via41_2": trailing_via_nw,
    "Via41_3": trailing_via_additive,
}


def recursive_refine(a, y_coarse, eta_prime, kind, rng, method="Via41_3"):
    """Sharpen a coarse trailing basis by re-running on A Y_coarse.

    The inner problem keeps Y_coarse's column count, so the cost scales with
    the coarse width, not with n.  Works at native precision.
    """
    arr = densela.dense(a)
    y = densela.dense(y_coarse)
    if y.shape[0] != arr.shape[1]:
        raise ValueError("coarse basis rows must match the column count of A")
    if method not in _REFINE_BUILDERS:
        raise ValueError(f"unknown trailing method {method!r}")
    if not eta_prime > 0:
        raise ValueError("eta_prime must be positive")
    inner = arr @ y
    scale = densela.spectral_norm(inner)
    if scale == 0.0:
        raise ZeroMatrix("A Y is zero; the coarse basis is already exact")
    r_in = y.shape[1] - densela.numrank(inner, eta_prime)
    if r_in < 1:
        raise NoGap(
            f"no inner singular values below eta_prime={eta_prime:.1e}"
        )
    res = _REFINE_BUILDERS[method](
        inner / scale, r_in, kind, rng, tau=eta_prime / scale
    )
    q, _ = densela.qr_thin(y @ res.B)
    resid = densela.spectral_norm(arr @ q) / densela.spectral_norm(arr)
    return TrailingResult(q, float(resid), res.method)


def subspace_residual(b, truth_t):
    """Spectral least-squares distance from the truth basis to range(B)."""
    b_arr = densela.dense(b)
    t_arr = densela.dense(truth_t)
    fit = densela.least_squares(b_arr, t_arr)
    return float(densela.spectral_norm(b_arr @ fit - t_arr))
