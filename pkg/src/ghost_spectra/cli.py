"""Command-line entry point ``ghost-spectra``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .calibration import BlockKernel, SphericalKernel, calibrate, john_asymptotics
from .harness.config import FULL_REPS, ConfigError, ExperimentConfig, default_config
from .harness.experiments import phase_summary, run
from .harness.plots import write_charts
from .harness.validation import run_validate
from .models import preset
from .mp import DiscreteLaw
from .sphericity import TAILS, john_test


class UsageError(Exception):
    pass


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return value


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(",") if v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from None


def _common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", type=Path, help="JSON experiment configuration")
    sub.add_argument("--out", type=Path, help="CSV output path (stdout if omitted)")
    sub.add_argument("--seed", type=_u64, help="master seed (unsigned 64-bit)")
    sub.add_argument("--threads", type=_positive_int,
                     help="worker threads (default: $GHOST_SPECTRA_THREADS, then CPU count)")
    sub.add_argument("--level", type=float, help="nominal level")
    sub.add_argument("--reps", type=_positive_int, help="Monte Carlo replicates")
    sub.add_argument("--full", action="store_true", help=f"use {FULL_REPS} replicates")
    sub.add_argument("--models", help="comma-separated preset names, e.g. M1,M2")
    sub.add_argument("--p-grid", type=_int_list, help="comma-separated dimensions")
    sub.add_argument("--tail", choices=TAILS, help="rejection region for size")
    sub.add_argument("--plots", action="store_true", help="write SVG charts next to --out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghost-spectra",
        description="Spectral statistics of sample covariance matrices and corrected sphericity tests.")
    subs = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (("size", "empirical size of John's test under the null"),
                            ("power", "size-adjusted power along a diagonal alternative"),
                            ("phase", "variance scaling of L(x^2) across the phase boundary")):
        _common(subs.add_parser(name, help=help_text))

    cal = subs.add_parser("calibrate", help="mean and covariance approximants of L(f)")
    cal.add_argument("--f", default="x2", help="test function: 1, x, x2, x3, x4")
    cal.add_argument("--g", help="second test function for the covariance (default --f)")
    cal.add_argument("--c", type=float, help="aspect ratio p/n (spherical mode)")
    cal.add_argument("--gamma", type=float, help="scalar correction gamma (spherical mode)")
    cal.add_argument("--n", type=_positive_int, help="sample size")
    cal.add_argument("--model", help="preset name M1-M6 (block mode)")
    cal.add_argument("--p", type=_positive_int, help="dimension (block mode)")
    cal.add_argument("--reverse-orientation", action="store_true",
                     help="report the correction mean with the opposite orientation")

    tst = subs.add_parser("test", help="John's test with three calibrations on a CSV data file")
    tst.add_argument("--data", type=Path, required=True, help="CSV, rows = observations")
    tst.add_argument("--level", type=float, default=0.05)
    tst.add_argument("--no-header", action="store_true", help="first line holds data")
    tst.add_argument("--transpose", action="store_true", help="rows are variables instead")
    tst.add_argument("--tail", choices=TAILS, default="two-sided")
    tst.add_argument("--raw-gamma", action="store_true", help="do not studentize energies")

    val = subs.add_parser("validate", help="run the oracle suites")
    val.add_argument("--seed", type=_u64)
    val.add_argument("--threads", type=_positive_int)
    val.add_argument("--quick", action="store_true", help="smaller Monte Carlo checks")
    val.add_argument("--json", action="store_true", help="machine-readable report")
    return parser


def _experiment_config(args) -> ExperimentConfig:
    overrides = dict(seed=args.seed, threads=args.threads, level=args.level, tail=args.tail,
                     reps=FULL_REPS if args.full else args.reps, p_grid=args.p_grid)
    if args.models:
        overrides["models"] = tuple(m.strip() for m in args.models.split(",") if m.strip())
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text())
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.config}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise UsageError(f"{args.config}: top level must be an object")
        kind = data.setdefault("kind", args.command)
        if kind != args.command:
            raise UsageError(f"config kind {kind!r} does not match subcommand {args.command!r}")
        data.update(overrides)
        if "p_grid" in overrides:
            data["p_grid"] = list(overrides["p_grid"])
        return ExperimentConfig.from_dict(data)
    return default_config(args.command, **overrides)


def _cmd_experiment(args) -> int:
    if args.plots and args.out is None:
        raise UsageError("--plots needs --out")
    cfg = _experiment_config(args)
    table = run(cfg)
    text = table.to_csv(args.out)
    if args.out is None:
        sys.stdout.write(text)
    if args.plots:
        for path in write_charts(cfg.kind, table, args.out):
            print(f"wrote {path}", file=sys.stderr)
    if cfg.kind == "phase":
        for s in phase_summary(table):
            print(f"phi={s.phi:g}: log-log slope {s.slope_raw:.3f}, raw max/min {s.raw_ratio:.3f}, "
                  f"rescaled max/min {s.rescaled_ratio:.3f}", file=sys.stderr)
    return 0


def _cmd_calibrate(args) -> int:
    H = DiscreteLaw.point()
    if args.model is not None:
        if args.p is None:
            raise UsageError("--model needs --p")
        n = args.n or 2 * args.p
        try:
            model = preset(args.model, args.p, n)
        except KeyError as exc:
            raise UsageError(str(exc)) from exc
        p, c = args.p, args.p / n
        kernel = BlockKernel(model.gamma_params())
        source = {"model": model.name, "p": p, "n": n}
    else:
        if args.c is None or args.n is None:
            raise UsageError("give --c, --gamma and --n, or --model and --p")
        if args.c <= 0:
            raise UsageError("--c must be positive")
        n, c = args.n, args.c
        p = max(1, int(round(c * n)))
        kernel = SphericalKernel(0.0 if args.gamma is None else args.gamma)
        source = {"c": c, "n": n, "p": p}
    res = calibrate(args.f, args.g, c_n=c, H=H, kernel=kernel, n=n, reverse_orientation=args.reverse_orientation)
    mean_nU, var_nU, mean_Q, var_Q = john_asymptotics(p, n, res.gamma_used)
    out = dict(source, f=args.f, g=args.g or args.f, gamma=res.gamma_used,
               M0=res.M0, M1=res.M1, V0=res.V0, V1=res.V1, mean=res.mean, variance=res.variance,
               john={"mean_nU": mean_nU, "var_nU": var_nU, "mean_Q": mean_Q, "var_Q": var_Q})
    print(json.dumps(out, indent=2))
    return 0


def read_data(path: Path, header: bool = True, transpose: bool = False) -> np.ndarray:
    """Load a CSV with observations in rows and return the ``p x n`` matrix."""
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2)
    except OSError as exc:
        raise UsageError(f"cannot read data: {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"{path}: not a numeric CSV ({exc})") from exc
    return data if transpose else data.T


def _cmd_test(args) -> int:
    if not 0 < args.level < 1:
        raise UsageError("--level must lie in (0, 1)")
    X = read_data(args.data, header=not args.no_header, transpose=args.transpose)
    if min(X.shape) < 2:
        raise UsageError("need at least two variables and two observations")
    try:
        report = john_test(X, tail=args.tail, studentize=not args.raw_gamma)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = report.to_dict()
    out["level"] = args.level
    out["reject"] = report.rejects(args.level)
    print(json.dumps(out, indent=2))
    return 0


def _cmd_validate(args) -> int:
    kw = {"quick": args.quick, "threads": args.threads}
    if args.seed is not None:
        kw["seed"] = args.seed
    results = run_validate(**kw)
    if args.json:
        print(json.dumps([{"name": r.name, "passed": r.passed, "detail": r.detail}
                          for r in results], indent=2))
    else:
        for r in results:
            print(r.line())
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {"size": _cmd_experiment, "power": _cmd_experiment, "phase": _cmd_experiment,
            "calibrate": _cmd_calibrate, "test": _cmd_test, "validate": _cmd_validate}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        parser.exit(2, f"ghost-spectra: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
