"""Command line interface.

    topocontrol run     --n-start 50 --n-stop 1000 --rmax 100,200,300 --out sweep.csv
    topocontrol trace   --trace-file taxis.csv --n-start 50 --n-stop 500 --out trace.csv
    topocontrol fit     sweep.csv --algo lrr --rmax 200
    topocontrol compare sweep.csv
    topocontrol oracle
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ConfigError, TopologyError
from .harness import ExperimentConfig, compare_topologies, fit_log, format_comparison, read_csv, run_experiment, write_csv
from .mobility import Region
from .verify import run_oracle_suite


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in str(text).split(",") if t.strip()]


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in _csv_list(text))


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    return str(text).strip().lower() in ("1", "true", "yes", "on")


# option name -> converter; shared by flags and config files
SWEEP_OPTIONS = {
    "n-start": int,
    "n-stop": int,
    "n-step": int,
    "rmax": _floats,
    "trials": int,
    "seed": int,
    "model": str,
    "trace-file": str,
    "algo": _csv_list,
    "region": str,
    "dim": int,
    "burn-in": float,
    "snapshot-interval": float,
    "timing": _bool,
}


def read_config_file(path: str | Path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("_", "-")
        if key not in SWEEP_OPTIONS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = SWEEP_OPTIONS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    return out


def build_config(options: dict, model: str | None = None) -> ExperimentConfig:
    kwargs = {}
    for key, attr in (
        ("n-start", "n_start"),
        ("n-stop", "n_stop"),
        ("n-step", "n_step"),
        ("rmax", "rmax"),
        ("trials", "trials"),
        ("seed", "seed"),
        ("model", "model"),
        ("trace-file", "trace_file"),
        ("algo", "algorithms"),
        ("burn-in", "burn_in"),
        ("snapshot-interval", "snapshot_interval"),
        ("timing", "timing"),
    ):
        if options.get(key) is not None:
            kwargs[attr] = options[key]
    if model is not None:
        kwargs["model"] = model
    dim = options.get("dim")
    if options.get("region") is not None:
        region = Region.parse(options["region"])
        if dim is not None and dim != region.dim:
            raise ConfigError(f"--dim {dim} does not match region {options['region']}")
    elif dim is not None:
        region = Region((1000.0,) * dim)
    else:
        region = Region()
    kwargs["region"] = region
    return ExperimentConfig(**kwargs)


def _add_sweep_flags(p: argparse.ArgumentParser) -> None:
    for name, conv in SWEEP_OPTIONS.items():
        if name == "timing":
            p.add_argument("--timing", action="store_const", const=True, default=None,
                           help="fill the wall_ms column (makes output non-reproducible)")
        else:
            p.add_argument(f"--{name}", type=conv, default=None)
    p.add_argument("--config", help="file of 'key = value' lines; flags override it")
    p.add_argument("--out", help="CSV output path (default: stdout)")


def _sweep_options(args) -> dict:
    options = read_config_file(args.config) if args.config else {}
    for name in SWEEP_OPTIONS:
        value = getattr(args, name.replace("-", "_"))
        if value is not None:
            options[name] = value
    return options


def _emit(records, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            write_csv(records, fh)
    else:
        write_csv(records, sys.stdout)


def _read_records(path: str):
    with open(path, encoding="utf-8", newline="") as fh:
        return read_csv(fh)


def cmd_run(args) -> int:
    config = build_config(_sweep_options(args))
    _emit(run_experiment(config), args.out)
    return 0


def cmd_trace(args) -> int:
    options = _sweep_options(args)
    options.setdefault("algo", ["udg", "lrr"])
    config = build_config(options, model="trace")
    _emit(run_experiment(config), args.out)
    return 0


def cmd_fit(args) -> int:
    report = fit_log(_read_records(args.csv), args.algo, args.rmax, args.model)
    print(f"fit: max interference ~ {report.a:.4f} * ln(n) + {report.b:.4f}")
    print(f"R^2 (log) = {report.r_squared:.4f}   R^2 (linear) = {report.linear_r_squared:.4f}")
    for n, mean in report.means.items():
        print(f"  n={n:5d}  mean={mean:.3f}  fitted={report.predict(n):.3f}")
    if report.excluded:
        print(f"excluded (fewer than half connected): {report.excluded}")
    return 0


def cmd_compare(args) -> int:
    print(format_comparison(compare_topologies(_read_records(args.csv))))
    return 0


def cmd_oracle(args) -> int:
    failed = 0
    for res in run_oracle_suite(seed=args.seed, scale=args.scale):
        print(f"[{'PASS' if res.passed else 'FAIL'}] {res.name}: {res.detail}")
        failed += not res.passed
    return 1 if failed else 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topocontrol", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="parameter sweep")
    _add_sweep_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("trace", help="evaluate on a mobility trace")
    _add_sweep_flags(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("fit", help="fit mean max interference to a*ln(n)+b")
    p.add_argument("csv")
    p.add_argument("--algo", default="lrr")
    p.add_argument("--rmax", type=float, required=True)
    p.add_argument("--model", default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("compare", help="paired comparison of algorithms")
    p.add_argument("csv")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle", help="cross-check fast paths against brute force")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", type=float, default=1.0, help="multiply the default instance counts")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (TopologyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
