"""Closed-form evaluators for the norm and conditioning bounds behind
randomized preprocessing, paired with Monte-Carlo reports.

Symbols follow one convention throughout: nu(m, n) is the spectral norm of
an m x n standard Gaussian matrix, nu_plus its pseudoinverse norm, and the
single-index variant the inverse norm of a fixed matrix plus a Gaussian.
Evaluators that substitute expectation surrogates for random symbols say
so; square-Gaussian pseudoinverse norms have no expectation, so their
surrogate is the tail median.  Reports always carry the raw empirical
quantile next to the surrogate, never a manufactured tightness.
"""

import math

from typing import NamedTuple

import numpy as np

from . import densela, randmats
from .errors import NoExpectation
from .randmats import _gen

__all__ = [
    "BoundReport",
    "additive_inverse_bound",
    "additive_norm_bound",
    "additive_pinv_bound",
    "coapaug_bound",
    "cocca1_bound",
    "cocca_bound",
    "dual_nw_bound",
    "dual_nw_norm_bound",
    "dual_west_bound",
    "dual_west_norm_bound",
    "dual_west_pinv_witness",
    "expect_gauss_norm",
    "expect_gauss_pinv",
    "expect_gauss_pinv_frob_sq",
    "gauss_norm_check",
    "gauss_norm_tail_check",
    "gauss_pinv_check",
    "gauss_pinv_square_tail_check",
    "mc_report",
    "nbar",
    "nw_bound",
    "nw_norm_bound",
    "perturbed_inverse_tail",
    "phi_plus_expectation",
    "square_pinv_surrogate",
    "srft_sample_size",
    "srft_support_check",
    "tail_gauss_norm",
    "tail_gauss_pinv",
    "chain_gamma",
    "weak_nw_bound",
    "weak_nw_norm_bound",
    "west_bound",
    "west_norm_bound",
    "west_pinv_witness",
]

E = math.e
N_BATCHES = 20
SRFT_LOW = 0.40
SRFT_HIGH = 1.48
SRFT_ENVELOPE_COEF = 10.0


class BoundReport(NamedTuple):
    bound_name: str
    theoretical: float
    empirical_mean: float
    empirical_p95: float
    trials: int
    violated: bool


def _batch_slack(arr, n_batches=N_BATCHES):
    # Standard error of the mean from batch means; the 3x multiple of
    # this is the slack every comparison rule uses.
    size = max(1, len(arr) // n_batches)
    means = [
        arr[i * size : (i + 1) * size].mean()
        for i in range(min(n_batches, len(arr) // size))
    ]
    if len(means) < 2:
        return 0.0
    return float(np.std(means, ddof=1) / math.sqrt(len(means)))


def mc_report(name, theoretical, samples):
    """Compare a sample mean (or frequency) against a theoretical value.

    violated means the mean exceeds the value by more than three batch
    standard errors, beyond a rounding floor that keeps an exactly
    attained bound from tripping on float noise.  Frequencies are means
    of 0/1 indicators.
    """
    arr = np.asarray(samples, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("no samples")
    mean = float(arr.mean())
    p95 = float(np.percentile(arr, 95))
    slack = 3.0 * _batch_slack(arr) + 1e-12 * max(1.0, abs(theoretical))
    violated = bool(mean > theoretical + slack)
    return BoundReport(name, float(theoretical), mean, p95, int(arr.size), violated)


# ------------------------------------------------- plain Gaussian norms


def _positive(*dims):
    for d in dims:
        if d < 1:
            raise ValueError(f"dimensions must be positive, got {dims}")


def expect_gauss_norm(m, n):
    """Mean spectral norm cap for an m x n Gaussian matrix."""
    _positive(m, n)
    return 1.0 + math.sqrt(m) + math.sqrt(n)


def tail_gauss_norm(m, n, t):
    """Probability cap for the norm exceeding t + sqrt(m) + sqrt(n)."""
    _positive(m, n)
    if t < 0:
        raise ValueError("t must be nonnegative")
    return math.exp(-t * t / 2.0)


def expect_gauss_pinv(m, n):
    """Mean pseudoinverse norm cap, e sqrt(l) / |m - n|; square has none."""
    _positive(m, n)
    if m == n:
        raise NoExpectation("square Gaussian pseudoinverse norm")
    return E * math.sqrt(min(m, n)) / abs(m - n)


def expect_gauss_pinv_frob_sq(m, n):
    """Exact mean of the squared Frobenius pseudoinverse norm."""
    _positive(m, n)
    m, n = max(m, n), min(m, n)
    if n <= 1 or m - n <= 1:
        raise NoExpectation("needs n > 1 and m - n > 1")
    return m / abs(m - n - 1)


def tail_gauss_pinv(m, n, x):
    """Probability cap for the pseudoinverse norm reaching x."""
    _positive(m, n)
    if x <= 0:
        raise ValueError("x must be positive")
    m, n = max(m, n), min(m, n)
    if m == n:
        if n < 2:
            raise ValueError("square tail needs n >= 2")
        return 2.35 * math.sqrt(n) / x
    if n == 1:
        return (m / 2.0) ** ((m - 2) / 2.0) / (math.gamma(m / 2.0) * x**m)
    return (m / x) ** ((m - n + 1) / 2.0) / math.gamma(m - n + 2)


def square_pinv_surrogate(r):
    """Tail median stand-in for the square pseudoinverse norm.

    The 2.35 sqrt(r) / x tail crosses one half at x = 4.7 sqrt(r); used
    wherever a bound mixes in a symbol that has no expectation.
    """
    _positive(r)
    return 4.7 * math.sqrt(r)


def phi_plus_expectation(n, rho, rho_plus, sigma_ratio):
    """Mean cap on the oversampled sketch's Frobenius error coefficient."""
    if not 0 < rho <= rho_plus <= n:
        raise ValueError("need 0 < rho <= rho_plus <= n")
    if rho_plus == rho:
        raise NoExpectation("oversampling zero leaves no expectation")
    lead = E * (1.0 + math.sqrt(n) + math.sqrt(rho_plus)) * math.sqrt(n - rho)
    return lead * sigma_ratio * math.sqrt(n * rho_plus * rho) / (rho_plus - rho)


# --------------------------------------------- bordered (augmented) maps


def west_norm_bound(m, q):
    """Mean norm cap of a matrix with q Gaussian columns appended."""
    _positive(m, q)
    return 2.0 + math.sqrt(m) + math.sqrt(q)


def _pinv_expect_core(l, q, rho, sigma_rho):
    if rho > l:
        raise ValueError(f"rho must not exceed {l}, got {rho}")
    if sigma_rho <= 0:
        raise ValueError("sigma_rho must be positive")
    if q + rho <= l:
        raise NoExpectation(f"needs q + rho > {l}, got q={q}, rho={rho}")
    head = (2.0 + math.sqrt(rho) + math.sqrt(l - rho)) / sigma_rho
    return head * max(1.0, E * math.sqrt(l - rho) / (q + rho - l))


def west_bound(m, n, q, rho, sigma_rho):
    """Mean pseudoinverse norm cap after appending q Gaussian columns."""
    _positive(m, n, q, rho)
    return _pinv_expect_core(min(m, n), q, rho, sigma_rho)


def west_pinv_witness(nu_plus, nu, sigma_rho):
    """Realized pseudoinverse cap from drawn norms: one draw per symbol."""
    return max(1.0, nu_plus) * (1.0 + nu) / sigma_rho


def nw_norm_bound(m, n, q, s):
    """Mean norm cap of the corner-bordered map with a Gaussian corner."""
    _positive(m, n, q, s)
    wide = math.sqrt(m) + math.sqrt(n + q)
    tall = math.sqrt(n) + math.sqrt(m + s)
    return 3.0 + math.sqrt(q) + math.sqrt(s) + min(wide, tall)


def nw_bound(m, n, q, s, rho, sigma_rho):
    """Mean pseudoinverse norm cap for the corner-bordered map."""
    _positive(m, n, q, s, rho)
    if q + rho > m:
        return _pinv_expect_core(m, q, rho, sigma_rho)
    if s + rho > n:
        return _pinv_expect_core(n, s, rho, sigma_rho)
    raise NoExpectation("needs q + rho > m or s + rho > n")


def nbar(nu_ror, nu_plus_rr, sigma_rho):
    """Inverse-norm kernel of the identity-corner bordered map."""
    lead = (1.0 + nu_ror) * (1.0 + nu_ror / sigma_rho)
    return lead * max(1.0, nu_plus_rr / sigma_rho) * max(1.0, nu_plus_rr)


def weak_nw_norm_bound(n, rho):
    """Surrogate mean norm cap, identity corner and shared width n - rho."""
    _positive(n, rho)
    r = n - rho
    _positive(r)
    return 2.0 + 2.0 * expect_gauss_norm(r, n)


def weak_nw_bound(n, rho, sigma_rho):
    """Surrogate inverse-norm cap 1.5 nbar for the identity-corner map.

    The square pseudoinverse symbol inside nbar takes its tail median;
    that square factor appears twice, which is what makes this bound
    weaker than the Gaussian-corner ones for larger n - rho.
    """
    _positive(n, rho)
    r = n - rho
    _positive(r)
    return 1.5 * nbar(
        expect_gauss_norm(rho, r), square_pinv_surrogate(r), sigma_rho
    )


# ------------------------------------------------- additive (shift) maps


def additive_norm_bound(m, n, r):
    """Surrogate norm cap 1 + E||U|| E||V|| for the rank-r shift."""
    _positive(m, n, r)
    return 1.0 + expect_gauss_norm(m, r) * expect_gauss_norm(n, r)


def coapaug_bound(nu_nr, nbar_val):
    """Shift-map inverse cap through the bordered-map link."""
    return 1.5 * (1.0 + nu_nr) ** 2 * nbar_val


def cocca_bound(u_norm, v_norm, ur_inv_norm, vr_inv_norm, sigma_rho):
    """Direct shift-map pseudoinverse cap from realized block norms.

    The trailing singular value in the denominator is sigma_rho: the
    source statement indexes it by n, but rank n - r makes that zero.
    """
    lead = (1.0 + u_norm) * (1.0 + v_norm)
    return lead * max(1.0, ur_inv_norm) * max(1.0, vr_inv_norm / sigma_rho)


def cocca1_bound(nu_nr, nu_plus_nr, nu_plus_rr, sigma_rho):
    """Gaussian-shift inverse cap, one square pseudoinverse factor only."""
    lead = 1.5 * (1.0 + nu_nr * nu_nr) * max(1.0, nu_plus_nr)
    return lead * max(1.0, nu_plus_rr / sigma_rho)


def chain_gamma(nu_plus_k, nu_plus_kk, c_norm):
    """Capacitance-inverse cap for the wide-shift chain.

    Index k is r - (n - rho); r + rho - n names the same quantity.
    """
    return nu_plus_k * nu_plus_kk * c_norm


def _pinv_surrogate(m, n):
    if m == n:
        return square_pinv_surrogate(n)
    return expect_gauss_pinv(m, n)


def additive_inverse_bound(n, r, rho, sigma_rho):
    """Surrogate inverse cap for C = A + U V^T across the width regimes.

    r = n - rho evaluates the direct Gaussian-shift cap; widths up to
    2n - rho chain it through the update identity; wider shifts reduce
    to a product of two square-type tail medians.
    """
    _positive(n, r, rho)
    r_minus = n - rho
    if r < r_minus:
        raise ValueError(f"rank defect: need r >= {r_minus}, got {r}")
    if r >= 2 * n - rho:
        return square_pinv_surrogate(n) * square_pinv_surrogate(n)
    base = cocca1_bound(
        expect_gauss_norm(n, r_minus),
        _pinv_surrogate(n, r_minus),
        square_pinv_surrogate(r_minus),
        sigma_rho,
    )
    if r == r_minus:
        return base
    k = r - r_minus
    gamma = chain_gamma(
        square_pinv_surrogate(k),
        square_pinv_surrogate(k),
        1.0 + expect_gauss_norm(n, r) ** 2,
    )
    return (1.0 + gamma * expect_gauss_norm(n, k) ** 2 * base) * base


def additive_pinv_bound(m, n, r, rho, sigma_rho):
    """Rectangular shift: the square caps apply to the short side."""
    _positive(m, n, r, rho)
    return additive_inverse_bound(min(m, n), r, rho, sigma_rho)


# ------------------------------------- dual maps (factor-Gaussian input)


def dual_west_norm_bound(m, n, rho):
    """Mean norm cap when the input is a rank-rho factor-Gaussian."""
    _positive(m, n, rho)
    return 1.0 + expect_gauss_norm(m, rho) * expect_gauss_norm(n, rho)


def dual_west_bound(m, n, q, rho, u_pinv=1.0):
    """Mean pseudoinverse cap for q fixed columns against a dual input."""
    _positive(m, n, q, rho)
    if q >= m:
        return u_pinv
    if q + rho <= m or rho >= n:
        raise NoExpectation("needs m - rho < q < m and rho < n")
    lead = 1.0 + expect_gauss_norm(rho, q) * expect_gauss_norm(n, q)
    ratio = (m - q) * rho * E * E / ((rho + q - m) * (n - rho))
    return lead * max(1.0, ratio)


def dual_west_pinv_witness(u_pinv, nu_plus_mq_rho, nu_plus_rho_n, nu_q_rho, nu_q_n):
    """Realized dual pseudoinverse cap from drawn norms."""
    mid = max(1.0, nu_plus_mq_rho * nu_plus_rho_n)
    return u_pinv * mid * (1.0 + nu_q_rho * nu_q_n)


def dual_nw_norm_bound(m, n, rho):
    _positive(m, n, rho)
    return 2.0 + expect_gauss_norm(m, rho) * expect_gauss_norm(n, rho)


def dual_nw_bound(m, n, q, s, rho, u_pinv=1.0, v_pinv=1.0):
    """Mean pseudoinverse cap for the zero-corner dual bordered map."""
    _positive(m, n, q, s, rho)
    if q >= m or s >= n:
        return u_pinv * v_pinv * (1.0 + expect_gauss_norm(rho, m) * expect_gauss_norm(rho, n))
    if (q + rho <= m and s + rho <= n) or (q + rho - m) * (s + rho - n) == 0:
        raise NoExpectation("needs q + rho > m or s + rho > n, both offsets nonzero")
    ef = math.sqrt((m - q) * rho) / (abs(q + rho - m) * abs(s + rho - n))
    l = min(m - q, n - s)
    e_q = expect_gauss_norm(rho, q)
    e_s = expect_gauss_norm(rho, s)
    e_l = expect_gauss_norm(rho, l)
    ebark = 1.0 + e_l * max(e_q, e_s * ef) + e_q * e_s * (1.0 + e_l * e_l) * ef
    return u_pinv * max(v_pinv, ef) * ebark


# ----------------------------------------------------- Monte-Carlo hooks


def gauss_norm_check(m, n, trials, rng):
    gen = _gen(rng)
    samples = [
        densela.spectral_norm(randmats.gaussian(m, n, gen)) for _ in range(trials)
    ]
    return mc_report(f"gauss-norm-{m}x{n}", expect_gauss_norm(m, n), samples)


def gauss_norm_tail_check(m, n, t, trials, rng):
    gen = _gen(rng)
    cut = t + math.sqrt(m) + math.sqrt(n)
    hits = [
        1.0 if densela.spectral_norm(randmats.gaussian(m, n, gen)) > cut else 0.0
        for _ in range(trials)
    ]
    return mc_report(f"gauss-norm-tail-{m}x{n}", tail_gauss_norm(m, n, t), hits)


def gauss_pinv_check(m, n, trials, rng):
    gen = _gen(rng)
    samples = [
        1.0 / densela.singular_values(randmats.gaussian(m, n, gen))[-1]
        for _ in range(trials)
    ]
    return mc_report(f"gauss-pinv-{m}x{n}", expect_gauss_pinv(m, n), samples)


def gauss_pinv_square_tail_check(n, x, trials, rng):
    gen = _gen(rng)
    hits = [
        1.0
        if 1.0 / densela.singular_values(randmats.gaussian(n, n, gen))[-1] >= x
        else 0.0
        for _ in range(trials)
    ]
    return mc_report(
        f"gauss-pinv-square-tail-{n}", tail_gauss_pinv(n, n, x), hits
    )


def perturbed_inverse_tail(n, trials, x, rng, a=None):
    """Frequency of ||(A + G)^-1|| >= x against the 2.35 sqrt(n)/x cap."""
    _positive(n)
    if x <= 0:
        raise ValueError("x must be positive")
    arr = np.zeros((n, n)) if a is None else densela.dense(a)
    if arr.shape != (n, n):
        raise ValueError(f"A must be {n} x {n}")
    gen = _gen(rng)
    hits = [
        1.0
        if 1.0 / densela.singular_values(arr + randmats.gaussian(n, n, gen))[-1] >= x
        else 0.0
        for _ in range(trials)
    ]
    bound = 2.35 * math.sqrt(n) / x
    name = f"perturbed-inverse-tail-{n}"
    if bound >= 1.0:
        name += "-vacuous"
    return mc_report(name, bound, hits)


def srft_sample_size(rho, n):
    """Minimal oversampled width for subspace preservation.

    Two logarithm-base conventions for this threshold are in circulation;
    both readings are returned, natural-log first.
    """
    _positive(rho, n)
    if rho == 1:
        return 0.0, 0.0
    ln_val = 4.0 * (math.sqrt(rho) + math.sqrt(8.0 * math.log(rho * n))) ** 2
    ln_val *= math.log(rho)
    l2_val = 4.0 * (math.sqrt(rho) + math.sqrt(8.0 * math.log2(rho * n))) ** 2
    l2_val *= math.log2(rho)
    return ln_val, l2_val


def srft_support_check(rho, n, trials, rng, rho_plus=None):
    """Frequency of a subsampled-Fourier section distorting a fixed
    rho-dimensional subspace outside [0.40, 1.48], against 10/rho."""
    _positive(rho, n)
    if rho_plus is None:
        rho_plus = min(n, rho + 20)
    if not rho <= rho_plus <= n:
        raise ValueError("need rho <= rho_plus <= n")
    gen = _gen(rng)
    hits = []
    for _ in range(trials):
        u = randmats.random_orthogonal(n, gen)[:rho]
        sv = densela.complex_singular_values(u @ randmats.srft(n, rho_plus, gen))
        bad = sv[rho - 1] < SRFT_LOW or sv[0] > SRFT_HIGH
        hits.append(1.0 if bad else 0.0)
    envelope = min(1.0, SRFT_ENVELOPE_COEF / rho)
    return mc_report(f"srft-support-rho{rho}-n{n}", envelope, hits)
