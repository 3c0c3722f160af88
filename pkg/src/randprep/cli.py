"""Command-line front end for the experiment harness.

One subcommand per experiment; grid axes default per experiment and can
be overridden by flags or a JSON config file (flags win).  Exit status:
0 on success, 2 when --check finds a violated gate, 1 on any error.
"""

import argparse
import json
import logging
import sys

from . import bench
from .errors import ConfigError, RandprepError
from .randmats import KNOWN_KINDS


def _int_list(text):
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints, got {text!r}")


def _policy(text):
    tags = tuple(tok.strip() for tok in text.split(","))
    if not all(tags):
        raise argparse.ArgumentTypeError(f"empty kind in policy {text!r}")
    return tags


def build_parser():
    parser = argparse.ArgumentParser(
        prog="randprep",
        description="Randomized preprocessing experiments; emits CSV.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in bench.EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--n", type=_int_list, help="comma-separated sizes")
        p.add_argument("--r", type=_int_list, help="comma-separated ranks")
        p.add_argument(
            "--rho", type=_int_list, help="comma-separated target ranks"
        )
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument(
            "--kind", action="append", choices=KNOWN_KINDS, dest="kinds"
        )
        p.add_argument("--tau", type=float)
        p.add_argument("--tol", type=float)
        p.add_argument("--power", type=int)
        p.add_argument("--out", help="write CSV here; stdout shows a summary")
        p.add_argument("--config", help="JSON file with the same keys as flags")
        p.add_argument(
            "--check",
            action="store_true",
            help="exit 2 if any acceptance-style gate fails",
        )
        p.add_argument("--quiet", action="store_true", help="suppress progress logs")
        if name == "policy":
            p.add_argument(
                "--policy",
                action="append",
                type=_policy,
                dest="policies",
                help="comma-separated kinds tried in order; repeatable",
            )
    return parser


_CONFIG_KEYS = (
    "n", "r", "rho", "trials", "seed", "kinds", "tau", "tol",
    "power", "out", "policies",
)


def _load_config(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    for key in raw:
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"config: unknown key {key!r}")
    return raw


def _merged(args):
    """File values first, then flags on top; returns plain dict."""
    merged = {}
    if args.config:
        merged.update(_load_config(args.config))
    for key in _CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    return merged


def _sizes_from(experiment, merged):
    grid = bench._GRIDS[experiment]
    ns = merged.get("n")
    seconds = merged.get("rho", merged.get("r"))
    if ns is None and seconds is None:
        return None
    if ns is None:
        ns = tuple(sorted({p[0] for p in grid}))
    if seconds is None:
        seconds = tuple(sorted({p[1] for p in grid}))
    return tuple((int(n), int(s)) for n in ns for s in seconds)


def _spec_from(experiment, merged):
    kinds = merged.get("kinds")
    policies = merged.get("policies")
    if policies is not None:
        policies = tuple(tuple(p) for p in policies)
    return bench.default_spec(
        experiment,
        sizes=_sizes_from(experiment, merged),
        trials=merged.get("trials"),
        seed=merged.get("seed"),
        kinds=tuple(kinds) if kinds else None,
        tau=merged.get("tau"),
        tol=merged.get("tol"),
        power=merged.get("power"),
        output_path=merged.get("out"),
        policies=policies,
    )


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage; 2 is reserved for gate failures.
        return 0 if exc.code == 0 else 1

    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        stream=sys.stderr,
        format="%(message)s",
    )
    try:
        spec = _spec_from(args.experiment, _merged(args))
        rows = bench.collect_rows(spec)
        text = bench.render_csv(rows)
        if spec.output_path:
            with open(spec.output_path, "w") as fh:
                fh.write(text)
            sys.stdout.write(bench.render_table(rows))
        else:
            sys.stdout.write(text)
        if args.check:
            violations = bench.check_rows(spec.experiment, rows)
            for line in violations:
                print(f"CHECK FAIL: {line}", file=sys.stderr)
            if violations:
                return 2
            print(f"CHECK OK: {spec.experiment}", file=sys.stderr)
    except (ConfigError, RandprepError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
