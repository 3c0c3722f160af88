"""Seeded experiment harness: the four table sweeps, the bound and
support suites, GENP and cross-approximation statistics, and the
preprocessor policy comparison, all emitted as fixed-schema CSV rows.

Every trial draws from a stream keyed by (seed, trial index), so results
are independent of execution order and identical across reruns; the CSV
bytes are a pure function of the experiment spec.
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import boundscalc, curvol, densela, genpsolve, matgen, precond, randmats, subspace
from .errors import (
    ConfigError,
    Exhausted,
    Failure,
    NoConvergence,
    RankCollapse,
    SingularPivotBlock,
    SmallPivot,
    Stagnated,
)
from .matgen import CLASS_TAGS, SpectrumSpec, TestClass
from .randmats import RngStream

__all__ = [
    "CSV_COLUMNS",
    "EXPERIMENTS",
    "ExperimentSpec",
    "Row",
    "TrialStats",
    "check_rows",
    "default_spec",
    "policy_sweep",
    "render_csv",
    "render_table",
    "run",
]

_log = logging.getLogger(__name__)

EXPERIMENTS = (
    "table1",
    "table2",
    "table3",
    "table4",
    "bounds",
    "srft",
    "genp",
    "cur",
    "scaling",
    "policy",
)
CSV_COLUMNS = (
    "experiment",
    "class",
    "n",
    "r_or_rho",
    "kind",
    "metric",
    "mean",
    "std",
    "min",
    "max",
    "failures",
    "trials",
    "seed",
)
SEED_DEFAULT = 41
SCALING_POWERS = (-10, -5, 5, 10)
DEFAULT_POLICIES = (("gaussian",), ("signed", "gaussian"))

# Default grids; sizes are (n, r_or_rho) pairs.
_GRIDS = {
    "table1": tuple((n, r) for n in (64, 128, 256) for r in (2, 4, 8)),
    "table2": tuple((n, rho) for n in (64, 128, 256) for rho in (8, 32)),
    "table3": tuple((n, r) for n in (64, 128, 256) for r in (1, 2, 4)),
    "table4": tuple((128, r) for r in (1, 2, 4, 8)),
    "bounds": ((64, 32),),
    "srft": ((256, 8),),
    "genp": ((32, 1),),
    "cur": ((64, 8),),
    "scaling": ((32, 2),),
    "policy": ((64, 2),),
}
_KINDS = {
    "table1": ("gaussian", "subcirculant"),
    "table2": ("gaussian", "subcirculant"),
    "table3": ("gaussian",),
    "table4": ("gaussian", "signed"),
    "bounds": ("gaussian",),
    "srft": ("srft",),
    "genp": ("gaussian",),
    "cur": ("gaussian",),
    "scaling": ("gaussian",),
    "policy": ("gaussian",),
}
_TRIALS = {
    "bounds": 1000,
    "srft": 500,
    "genp": 200,
    "scaling": 20,
    "policy": 100,
}
# Experiments whose kind tags parametrize a multiplier or draw family and
# must be constructible at every listed size.
_KIND_CHECKED = ("table1", "table2", "table3", "table4", "genp", "cur", "policy")

# Reference mean residuals for the two resampled trailing routes at each
# grid cell; check windows are one order of magnitude around these.  The
# accurate route is gated by the flat cap below instead.
TABLE1_CELLS = {
    (64, 2, "gaussian"): 7.91e-07,
    (64, 2, "subcirculant"): 1.35e-07,
    (64, 4, "gaussian"): 2.46e-07,
    (64, 4, "subcirculant"): 3.26e-07,
    (64, 8, "gaussian"): 2.70e-07,
    (64, 8, "subcirculant"): 4.90e-07,
    (128, 2, "gaussian"): 4.64e-07,
    (128, 2, "subcirculant"): 8.41e-07,
    (128, 4, "gaussian"): 5.33e-07,
    (128, 4, "subcirculant"): 1.01e-06,
    (128, 8, "gaussian"): 2.88e-06,
    (128, 8, "subcirculant"): 8.82e-07,
    (256, 2, "gaussian"): 2.16e-06,
    (256, 2, "subcirculant"): 1.34e-06,
    (256, 4, "gaussian"): 2.07e-06,
    (256, 4, "subcirculant"): 3.38e-06,
    (256, 8, "gaussian"): 3.66e-06,
    (256, 8, "subcirculant"): 3.80e-06,
}
TABLE1_ACCURATE_CAP = 1e-11
TABLE2_CAP = 1e-5
TABLE3_CAP = 1e-4
TABLE4_KAPPA_WINDOW = (1e2, 1e8)
TABLE4_INPUT_KAPPA_MIN = 1e14
CUR_REL_CAP = 1e-4
GENP_SUCCESS_MIN = 0.99
POLICY_SUCCESS_MIN = 0.99
PINV_MEAN_SLACK = 1.5


class TrialStats(NamedTuple):
    """Order-independent summary of one metric across trials."""

    mean: float
    std: float
    min: float
    max: float
    failures: int
    trials: int

    @classmethod
    def from_values(cls, vals, failures, trials):
        if failures > trials:
            raise ValueError("failures exceed trials")
        if not vals:
            return cls(0.0, 0.0, 0.0, 0.0, failures, trials)
        arr = np.asarray(vals, dtype=np.float64)
        return cls(
            float(arr.mean()),
            float(arr.std()),
            float(arr.min()),
            float(arr.max()),
            failures,
            trials,
        )

    @classmethod
    def constant(cls, value, trials):
        return cls(float(value), 0.0, float(value), float(value), 0, trials)


class Row(NamedTuple):
    experiment: str
    cls: str
    n: int
    r_or_rho: int
    kind: str
    metric: str
    stats: TrialStats
    seed: int


@dataclass(frozen=True)
class ExperimentSpec:
    """One harness invocation: what to run, at which sizes, how often."""

    experiment: str
    sizes: tuple
    trials: int
    seed: int = SEED_DEFAULT
    kinds: tuple = ("gaussian",)
    tau: float = subspace.TAU_DEFAULT
    tol: float = 1e-8
    power: int = 0
    output_path: str = ""
    policies: tuple = DEFAULT_POLICIES

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}"
            )
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not self.sizes:
            raise ConfigError("sizes must be nonempty")
        for pair in self.sizes:
            if len(pair) != 2 or pair[0] < 1 or pair[1] < 1:
                raise ConfigError(f"sizes entries must be positive pairs, got {pair}")
        if not self.kinds:
            raise ConfigError("kinds must be nonempty")
        for tag in self.kinds:
            if tag not in randmats.KNOWN_KINDS:
                raise ConfigError(
                    f"kind must be one of {randmats.KNOWN_KINDS}, got {tag!r}"
                )
        if not 0 < self.tau < 1:
            raise ConfigError(f"tau must be in (0, 1), got {self.tau}")
        if self.power < 0:
            raise ConfigError(f"power must be >= 0, got {self.power}")
        if self.experiment in _KIND_CHECKED:
            self._check_kinds_constructible()
        if self.experiment == "policy":
            _validate_policies(self.policies)

    def _check_kinds_constructible(self):
        for n, r in self.sizes:
            for tag in self.kinds:
                cols = r if self.experiment != "table2" else min(n, r)
                try:
                    randmats.PreprocessorKind(tag, rows=n, cols=cols)
                    if tag == "signed" and 2 * r > n:
                        raise ValueError(f"signed pattern needs 2r <= n")
                except ValueError as exc:
                    raise ConfigError(
                        f"kind {tag!r} not constructible at n={n}, r={r}: {exc}"
                    ) from None


def _validate_policies(policies):
    if not policies:
        raise ConfigError("policies must be nonempty")
    for policy in policies:
        if not policy:
            raise ConfigError("each policy needs at least one kind")
        for tag in policy:
            if tag not in randmats.KNOWN_KINDS:
                raise ConfigError(
                    f"policy kind must be one of {randmats.KNOWN_KINDS}, got {tag!r}"
                )


def default_spec(experiment, **overrides):
    """Spec with the experiment's default grid, kinds, and trial count."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"experiment must be one of {EXPERIMENTS}, got {experiment!r}"
        )
    fields = {
        "experiment": experiment,
        "sizes": _GRIDS[experiment],
        "kinds": _KINDS[experiment],
        "trials": _TRIALS.get(experiment, 100),
    }
    fields.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentSpec(**fields)


# ------------------------------------------------------------- rendering


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.6e}"
    return str(value)


def render_csv(rows):
    lines = [",".join(CSV_COLUMNS)]
    for r in rows:
        s = r.stats
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    r.experiment,
                    r.cls,
                    r.n,
                    r.r_or_rho,
                    r.kind,
                    r.metric,
                    s.mean,
                    s.std,
                    s.min,
                    s.max,
                    s.failures,
                    s.trials,
                    r.seed,
                )
            )
        )
    return "\n".join(lines) + "\n"


def render_table(rows):
    """Aligned human-readable summary of the same rows."""
    header = f"{'cell':<28} {'kind':<14} {'metric':<24} {'mean':>12} {'std':>12} {'fail':>5}"
    lines = [header, "-" * len(header)]
    for r in rows:
        cell = f"{r.experiment} {r.cls} n={r.n} r={r.r_or_rho}"
        lines.append(
            f"{cell:<28} {r.kind:<14} {r.metric:<24} "
            f"{r.stats.mean:>12.3e} {r.stats.std:>12.3e} {r.stats.failures:>5d}"
        )
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------ experiments


def _trial_range(spec, trial_order):
    return list(range(spec.trials)) if trial_order is None else list(trial_order)


_T1_ROUTES = (
    ("rn_41_1", subspace.trailing_via_north),
    ("rn_41_2", subspace.trailing_via_nw),
    ("rn_41_3", subspace.trailing_via_additive),
)


def _table1(spec, trial_order=None):
    rows = []
    idx = _trial_range(spec, trial_order)
    for n, r in spec.sizes:
        for tag in spec.kinds:
            start = time.perf_counter()
            vals = {m: [] for m, _ in _T1_ROUTES}
            fails = {m: 0 for m, _ in _T1_ROUTES}
            for t in idx:
                base = RngStream(spec.seed, t)
                a, truth = matgen.svd_spec_matrix(
                    SpectrumSpec(n, n - r), False, base.child(1)
                )
                tt = truth.T[:, n - r :]
                for i, (metric, route) in enumerate(_T1_ROUTES):
                    try:
                        res = route(a, r, tag, base.child(2 + i), tau=spec.tau)
                    except (Failure, RankCollapse):
                        fails[metric] += 1
                        continue
                    vals[metric].append(subspace.subspace_residual(res.B, tt))
            for metric, _ in _T1_ROUTES:
                rows.append(
                    Row(
                        "table1",
                        "-",
                        n,
                        r,
                        tag,
                        metric,
                        TrialStats.from_values(vals[metric], fails[metric], len(idx)),
                        spec.seed,
                    )
                )
            _log.info(
                "table1 n=%d r=%d %s: %d trials in %.1fs",
                n,
                r,
                tag,
                len(idx),
                time.perf_counter() - start,
            )
    return rows


def _table2(spec, trial_order=None):
    rows = []
    idx = _trial_range(spec, trial_order)
    for n, rho in spec.sizes:
        for tag in spec.kinds:
            start = time.perf_counter()
            rn1, rn2, fails = [], [], 0
            for t in idx:
                base = RngStream(spec.seed, t)
                a, truth = matgen.svd_spec_matrix(
                    SpectrumSpec(n, rho), False, base.child(1)
                )
                try:
                    sk = subspace.leading_sketch(
                        a, rho, tag, spec.power, base.child(2)
                    )
                except RankCollapse:
                    fails += 1
                    continue
                rn1.append(subspace.subspace_residual(sk.Q, truth.T[:, :rho]))
                rn2.append(sk.rel_err)
            for metric, vals in (("rn1", rn1), ("rn2", rn2)):
                rows.append(
                    Row(
                        "table2",
                        "-",
                        n,
                        rho,
                        tag,
                        metric,
                        TrialStats.from_values(vals, fails, len(idx)),
                        spec.seed,
                    )
                )
            _log.info(
                "table2 n=%d rho=%d %s: %d trials in %.1fs",
                n,
                rho,
                tag,
                len(idx),
                time.perf_counter() - start,
            )
    return rows


def _table3(spec, trial_order=None):
    rows = []
    idx = _trial_range(spec, trial_order)
    for n, r in spec.sizes:
        for tag in spec.kinds:
            start = time.perf_counter()
            vals, fails = [], 0
            for t in idx:
                base = RngStream(spec.seed, t)
                a, truth = matgen.svd_spec_matrix(
                    SpectrumSpec(n, n - r), False, base.child(1)
                )
                try:
                    res = subspace.trailing_via_leading(a, n - r, tag, base.child(2))
                except (Failure, RankCollapse):
                    fails += 1
                    continue
                vals.append(subspace.subspace_residual(res.B, truth.T[:, n - r :]))
            rows.append(
                Row(
                    "table3",
                    "-",
                    n,
                    r,
                    tag,
                    "rn",
                    TrialStats.from_values(vals, fails, len(idx)),
                    spec.seed,
                )
            )
            _log.info(
                "table3 n=%d r=%d %s: %d trials in %.1fs",
                n,
                r,
                tag,
                len(idx),
                time.perf_counter() - start,
            )
    return rows


def _table4_draws(tag, n, r, base):
    if tag == "signed":
        u, v, _ = randmats.signed_sparse_uvw(n, r, base.child(2))
        u2, v2, w = randmats.signed_sparse_uvw(n, r, base.child(3))
    else:
        u, v = precond.draw_uv(n, n, r, base.child(2))
        u2, v2 = precond.draw_uv(n, n, r, base.child(3))
        w = precond.make_w(r, r, "GaussianW", base.child(4))
    return u, v, u2, v2, w


def _table4(spec, trial_order=None):
    rows = []
    idx = _trial_range(spec, trial_order)
    for n, r in spec.sizes:
        for cls in CLASS_TAGS:
            tc = TestClass(cls, n, r)
            for tag in spec.kinds:
                start = time.perf_counter()
                k_in, k_c, k_k = [], [], []
                for t in idx:
                    base = RngStream(spec.seed, t)
                    a = matgen.gen_class(tc, base.child(1))
                    u, v, u2, v2, w = _table4_draws(tag, n, r, base)
                    k_in.append(densela.cond(a))
                    k_c.append(densela.cond(precond.additive(a, u, v)))
                    k_k.append(
                        densela.cond(precond.augment_northwest(a, u2, v2, w))
                    )
                for metric, vals in (
                    ("kappa_in", k_in),
                    ("kappa_c", k_c),
                    ("kappa_k", k_k),
                ):
                    rows.append(
                        Row(
                            "table4",
                            cls,
                            n,
                            r,
                            tag,
                            metric,
                            TrialStats.from_values(vals, 0, len(idx)),
                            spec.seed,
                        )
                    )
                _log.info(
                    "table4 %s n=%d r=%d %s: %d trials in %.1fs",
                    cls,
                    n,
                    r,
                    tag,
                    len(idx),
                    time.perf_counter() - start,
                )
    return rows


def _scaling(spec, trial_order=None):
    rows = []
    idx = _trial_range(spec, trial_order)
    for n, r in spec.sizes:
        tc = TestClass("1n", n, r)
        start = time.perf_counter()
        ratios = {p: [] for p in SCALING_POWERS}
        for t in idx:
            base = RngStream(spec.seed, t)
            a = matgen.gen_class(tc, base.child(1))
            u, v = precond.draw_uv(n, n, r, base.child(2))
            kappa_base = densela.cond(precond.additive(a, u, v))
            for p in SCALING_POWERS:
                kappa_p = densela.cond(precond.additive(a, (10.0**p) * u, v))
                ratios[p].append(kappa_p / kappa_base)
        for p in SCALING_POWERS:
            rows.append(
                Row(
                    "scaling",
                    "1n",
                    n,
                    r,
                    "gaussian",
                    f"kappa_ratio_p{p:+d}",
                    TrialStats.from_values(ratios[p], 0, len(idx)),
                    spec.seed,
                )
            )
        _log.info(
            "scaling n=%d r=%d: %d trials in %.1fs",
            n,
            r,
            len(idx),
            time.perf_counter() - start,
        )
    return rows


def _bound_pair(name, n, r, theoretical, samples, trials, seed):
    """Empirical row plus a degenerate row carrying the closed form."""
    return [
        Row(
            "bounds",
            "-",
            n,
            r,
            "gaussian",
            name,
            TrialStats.from_values(samples, 0, trials),
            seed,
        ),
        Row(
            "bounds",
            "-",
            n,
            r,
            "gaussian",
            name + "_bound",
            TrialStats.constant(theoretical, trials),
            seed,
        ),
    ]


def _bounds(spec, trial_order=None):
    idx = _trial_range(spec, trial_order)
    trials = len(idx)
    seed = spec.seed
    rows = []
    start = time.perf_counter()
    x = 100.0

    def draw(t, k, m, n):
        return randmats.gaussian(m, n, RngStream(seed, t).child(10 + k))

    for k, (m, n) in enumerate(((32, 32), (64, 16))):
        samples = [densela.spectral_norm(draw(t, k, m, n)) for t in idx]
        rows += _bound_pair(
            f"norm_{m}x{n}", m, n, boundscalc.expect_gauss_norm(m, n),
            samples, trials, seed,
        )

    samples = [
        1.0 / densela.singular_values(draw(t, 2, 64, 32))[-1] for t in idx
    ]
    rows += _bound_pair(
        "pinv_64x32", 64, 32, boundscalc.expect_gauss_pinv(64, 32),
        samples, trials, seed,
    )

    hits = [
        float(1.0 / densela.singular_values(draw(t, 3, 16, 16))[-1] >= x)
        for t in idx
    ]
    rows += _bound_pair(
        "pinv_square_tail_16", 16, 16, boundscalc.tail_gauss_pinv(16, 16, x),
        hits, trials, seed,
    )

    eye = np.eye(16)
    hits = [
        float(1.0 / densela.singular_values(eye + draw(t, 4, 16, 16))[-1] >= x)
        for t in idx
    ]
    rows += _bound_pair(
        "perturbed_tail_16", 16, 16, 2.35 * math.sqrt(16) / x,
        hits, trials, seed,
    )

    _log.info("bounds: %d trials per check in %.1fs", trials, time.perf_counter() - start)
    return rows


def _srft(spec, trial_order=None):
    rows = []
    idx = _trial_range(spec, trial_order)
    for n, rho in spec.sizes:
        start = time.perf_counter()
        rho_plus = min(n, rho + subspace.SRFT_OVERSAMPLE)
        hits = []
        for t in idx:
            gen = randmats._gen(RngStream(spec.seed, t))
            u = randmats.random_orthogonal(n, gen)[:rho]
            sv = densela.complex_singular_values(u @ randmats.srft(n, rho_plus, gen))
            bad = sv[rho - 1] < boundscalc.SRFT_LOW or sv[0] > boundscalc.SRFT_HIGH
            hits.append(float(bad))
        envelope = min(1.0, boundscalc.SRFT_ENVELOPE_COEF / rho)
        rows.append(
            Row(
                "srft",
                "-",
                n,
                rho,
                "srft",
                "violation_freq",
                TrialStats.from_values(hits, 0, len(idx)),
                spec.seed,
            )
        )
        rows.append(
            Row(
                "srft",
                "-",
                n,
                rho,
                "srft",
                "violation_freq_bound",
                TrialStats.constant(envelope, len(idx)),
                spec.seed,
            )
        )
        _log.info(
            "srft n=%d rho=%d: %d trials in %.1fs",
            n,
            rho,
            len(idx),
            time.perf_counter() - start,
        )
    return rows


def _genp_instance(n, base):
    gen = randmats._gen(base.child(1))
    a = randmats.gaussian(n, n, gen)
    a = a / densela.spectral_norm(a)
    a[0, 0] = 0.0
    b = randmats._gen(base.child(2)).standard_normal(n)
    return a, b


def _genp(spec, trial_order=None):
    rows = []
    idx = _trial_range(spec, trial_order)
    for n, r in spec.sizes:
        for tag in spec.kinds:
            kind = "signed" if tag == "signed" else "gaussian"
            for route in genpsolve.ROUTES:
                start = time.perf_counter()
                unaided, resid, hsteps, success, fails = [], [], [], [], 0
                policy = genpsolve.SolvePolicy(route=route, kind=kind)
                for t in idx:
                    base = RngStream(spec.seed, t)
                    a, b = _genp_instance(n, base)
                    try:
                        genpsolve.genp(a)
                        unaided.append(0.0)
                    except SmallPivot:
                        unaided.append(1.0)
                    try:
                        _, rep = genpsolve.genp_supported_solve(
                            a, b, policy, base.child(3)
                        )
                    except (Exhausted, Stagnated):
                        fails += 1
                        success.append(0.0)
                        continue
                    resid.append(rep.residual)
                    hsteps.append(float(rep.h))
                    success.append(float(rep.residual <= spec.tol))
                for metric, vals in (
                    ("unaided_fail", unaided),
                    ("residual", resid),
                    ("h_steps", hsteps),
                    ("success", success),
                ):
                    rows.append(
                        Row(
                            "genp",
                            "-",
                            n,
                            r,
                            f"{kind}/{route}",
                            metric,
                            TrialStats.from_values(vals, fails, len(idx)),
                            spec.seed,
                        )
                    )
                _log.info(
                    "genp n=%d %s %s: %d trials in %.1fs",
                    n,
                    kind,
                    route,
                    len(idx),
                    time.perf_counter() - start,
                )
    return rows


def _cur(spec, trial_order=None):
    rows = []
    idx = _trial_range(spec, trial_order)
    for n, rho in spec.sizes:
        start = time.perf_counter()
        rel, nu_vals, fails = [], [], 0
        for t in idx:
            base = RngStream(spec.seed, t)
            a, _ = matgen.svd_spec_matrix(SpectrumSpec(n, rho), False, base.child(1))
            try:
                pick = curvol.maxvol(a, rho)
                _, _, _, err = curvol.cur(a, pick)
            except (NoConvergence, SingularPivotBlock):
                fails += 1
                continue
            rel.append(err / densela.chebyshev_norm(a))
            nu_vals.append(pick.nu)
        for metric, vals in (("err_cheb_rel", rel), ("nu", nu_vals)):
            rows.append(
                Row(
                    "cur",
                    "-",
                    n,
                    rho,
                    "gaussian",
                    metric,
                    TrialStats.from_values(vals, fails, len(idx)),
                    spec.seed,
                )
            )
        _log.info(
            "cur n=%d rho=%d: %d trials in %.1fs",
            n,
            rho,
            len(idx),
            time.perf_counter() - start,
        )
    return rows


def run(spec, trial_order=None):
    """Execute one experiment and return its CSV text.

    Writes the CSV to spec.output_path when set.  trial_order overrides
    the trial index sequence (statistics are order-independent because
    streams are keyed by index).
    """
    dispatch = {
        "table1": _table1,
        "table2": _table2,
        "table3": _table3,
        "table4": _table4,
        "bounds": _bounds,
        "srft": _srft,
        "genp": _genp,
        "cur": _cur,
        "scaling": _scaling,
    }
    start = time.perf_counter()
    if spec.experiment == "policy":
        rows = policy_rows(spec, trial_order)
    else:
        rows = dispatch[spec.experiment](spec, trial_order)
    _log.info(
        "%s: %d rows in %.1fs total",
        spec.experiment,
        len(rows),
        time.perf_counter() - start,
    )
    text = render_csv(rows)
    if spec.output_path:
        with open(spec.output_path, "w") as fh:
            fh.write(text)
    return text


def collect_rows(spec, trial_order=None):
    """Same as run but returning Row objects instead of CSV text."""
    if spec.experiment == "policy":
        return policy_rows(spec, trial_order)
    return {
        "table1": _table1,
        "table2": _table2,
        "table3": _table3,
        "table4": _table4,
        "bounds": _bounds,
        "srft": _srft,
        "genp": _genp,
        "cur": _cur,
        "scaling": _scaling,
    }[spec.experiment](spec, trial_order)


# ----------------------------------------------------------------- policy


def policy_rows(spec, trial_order=None):
    """Sequential-fallback comparison: each policy tries its kinds in
    order until the trailing-route monitor accepts."""
    _validate_policies(spec.policies)
    rows = []
    idx = _trial_range(spec, trial_order)
    for n, r in spec.sizes:
        for policy in spec.policies:
            name = "+".join(policy)
            start = time.perf_counter()
            success, attempts = [], []
            hist = {k: 0 for k in range(1, len(policy) + 1)}
            for t in idx:
                base = RngStream(spec.seed, t)
                a, _ = matgen.svd_spec_matrix(
                    SpectrumSpec(n, n - r), False, base.child(1)
                )
                won = 0
                for j, tag in enumerate(policy):
                    try:
                        subspace.trailing_via_nw(
                            a, r, tag, base.child(2 + j), tau=spec.tau
                        )
                        won = j + 1
                        break
                    except (Failure, RankCollapse):
                        continue
                success.append(float(won > 0))
                attempts.append(float(won if won else len(policy)))
                if won:
                    hist[won] += 1
            rows.append(
                Row(
                    "policy",
                    "-",
                    n,
                    r,
                    name,
                    "success_rate",
                    TrialStats.from_values(success, 0, len(idx)),
                    spec.seed,
                )
            )
            rows.append(
                Row(
                    "policy",
                    "-",
                    n,
                    r,
                    name,
                    "attempts",
                    TrialStats.from_values(attempts, 0, len(idx)),
                    spec.seed,
                )
            )
            for k in range(1, len(policy) + 1):
                rows.append(
                    Row(
                        "policy",
                        "-",
                        n,
                        r,
                        name,
                        f"attempts_hist_{k}",
                        TrialStats.from_values(
                            [hist[k] / len(idx)], 0, len(idx)
                        ),
                        spec.seed,
                    )
                )
            _log.info(
                "policy %s n=%d r=%d: %d trials in %.1fs",
                name,
                n,
                r,
                len(idx),
                time.perf_counter() - start,
            )
    return rows


def policy_sweep(spec, policies):
    """Run the policy comparison for an explicit policy list; returns CSV."""
    _validate_policies(policies)
    sub = ExperimentSpec(
        experiment="policy",
        sizes=spec.sizes,
        trials=spec.trials,
        seed=spec.seed,
        kinds=spec.kinds,
        tau=spec.tau,
        tol=spec.tol,
        power=spec.power,
        output_path=spec.output_path,
        policies=tuple(tuple(p) for p in policies),
    )
    return run(sub)


# ------------------------------------------------------------------ checks


def _by_metric(rows):
    out = {}
    for r in rows:
        out[(r.n, r.r_or_rho, r.cls, r.kind, r.metric)] = r
    return out


def _binom_slack(mean, trials):
    if trials <= 0:
        return 0.0
    return 3.0 * math.sqrt(max(mean * (1.0 - mean), 0.0) / trials) + 1e-12


def check_rows(experiment, rows):
    """Acceptance-style gates over finished rows; returns violations."""
    bad = []
    if experiment == "table1":
        for r in rows:
            if r.metric == "rn_41_1":
                if r.stats.mean > TABLE1_ACCURATE_CAP:
                    bad.append(
                        f"table1 n={r.n} r={r.r_or_rho} {r.kind} {r.metric}: "
                        f"mean {r.stats.mean:.3e} above {TABLE1_ACCURATE_CAP:.0e}"
                    )
            else:
                cell = TABLE1_CELLS.get((r.n, r.r_or_rho, r.kind))
                if cell is None:
                    continue
                if not cell / 10 <= r.stats.mean <= cell * 10:
                    bad.append(
                        f"table1 n={r.n} r={r.r_or_rho} {r.kind} {r.metric}: "
                        f"mean {r.stats.mean:.3e} outside one order of {cell:.2e}"
                    )
    elif experiment == "table2":
        for r in rows:
            if r.stats.mean > TABLE2_CAP:
                bad.append(
                    f"table2 n={r.n} rho={r.r_or_rho} {r.kind} {r.metric}: "
                    f"mean {r.stats.mean:.3e} above {TABLE2_CAP:.0e}"
                )
    elif experiment == "table3":
        for r in rows:
            if r.stats.mean > TABLE3_CAP:
                bad.append(
                    f"table3 n={r.n} r={r.r_or_rho}: mean {r.stats.mean:.3e} "
                    f"above {TABLE3_CAP:.0e}"
                )
    elif experiment == "table4":
        lo, hi = TABLE4_KAPPA_WINDOW
        for r in rows:
            if r.metric == "kappa_in":
                if r.stats.mean < TABLE4_INPUT_KAPPA_MIN:
                    bad.append(
                        f"table4 {r.cls} r={r.r_or_rho} {r.kind}: input kappa "
                        f"{r.stats.mean:.3e} below {TABLE4_INPUT_KAPPA_MIN:.0e}"
                    )
            elif not lo <= r.stats.mean <= hi:
                bad.append(
                    f"table4 {r.cls} r={r.r_or_rho} {r.kind} {r.metric}: "
                    f"mean {r.stats.mean:.3e} outside [{lo:.0e}, {hi:.0e}]"
                )
    elif experiment == "scaling":
        for r in rows:
            p = int(r.metric.rsplit("p", 1)[1])
            cap = 10.0 ** (abs(p) + 1)
            if r.stats.max > cap:
                bad.append(
                    f"scaling n={r.n} r={r.r_or_rho} p={p:+d}: max ratio "
                    f"{r.stats.max:.3e} above {cap:.0e}"
                )
    elif experiment == "bounds":
        by_name = {r.metric: r for r in rows}
        for name, row in by_name.items():
            if name.endswith("_bound"):
                continue
            bound = by_name[name + "_bound"].stats.mean
            s = row.stats
            if name.startswith("norm_"):
                ok = s.mean < bound
            elif name.startswith("pinv_square") or name.startswith("perturbed"):
                ok = s.mean <= bound + _binom_slack(s.mean, s.trials)
            elif name.startswith("pinv_"):
                ok = s.mean <= PINV_MEAN_SLACK * bound
            else:
                ok = s.mean <= bound
            if not ok:
                bad.append(
                    f"bounds {name}: mean {s.mean:.3e} against bound {bound:.3e}"
                )
    elif experiment == "srft":
        by_name = _by_metric(rows)
        for r in rows:
            if r.metric != "violation_freq":
                continue
            s = r.stats
            if r.r_or_rho == 8 and r.n == 256:
                if s.mean > 0.05:
                    bad.append(
                        f"srft rho=8 n=256: frequency {s.mean:.3f} above 0.05"
                    )
            else:
                bound = by_name[
                    (r.n, r.r_or_rho, r.cls, r.kind, "violation_freq_bound")
                ].stats.mean
                if s.mean > bound + _binom_slack(s.mean, s.trials):
                    bad.append(
                        f"srft rho={r.r_or_rho} n={r.n}: frequency {s.mean:.3f} "
                        f"above bound {bound:.3f}"
                    )
    elif experiment == "genp":
        for r in rows:
            if r.metric == "success" and r.stats.mean < GENP_SUCCESS_MIN:
                bad.append(
                    f"genp {r.kind}: success rate {r.stats.mean:.3f} below "
                    f"{GENP_SUCCESS_MIN}"
                )
            if r.metric == "unaided_fail" and r.stats.mean < 1.0:
                bad.append(
                    f"genp {r.kind}: unaided elimination survived "
                    f"{1 - r.stats.mean:.3f} of trials"
                )
    elif experiment == "cur":
        for r in rows:
            if r.metric == "err_cheb_rel" and r.stats.mean > CUR_REL_CAP:
                bad.append(
                    f"cur n={r.n} rho={r.r_or_rho}: mean relative error "
                    f"{r.stats.mean:.3e} above {CUR_REL_CAP:.0e}"
                )
    elif experiment == "policy":
        for r in rows:
            if r.metric == "success_rate" and r.stats.mean < POLICY_SUCCESS_MIN:
                bad.append(
                    f"policy {r.kind}: success rate {r.stats.mean:.3f} below "
                    f"{POLICY_SUCCESS_MIN}"
                )
    else:
        raise ConfigError(f"no checks defined for experiment {experiment!r}")
    return bad
