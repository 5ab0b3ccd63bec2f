"""Command-line front end: parameter sweeps plus code/circuit text dumps."""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .circuits import build_round, dump_circuit
from .codes import bs17_spec, format_code_spec, surface17_spec
from .experiments import (
    ConfigError,
    EXPERIMENTS,
    ExperimentConfig,
    SWEEP_VARS,
    run_experiment,
)
from .noise import table1_defaults

DEFAULT_GRIDS = {
    "t_int": "log:0.1,10,20",
    "t_readout": "log:0.024,24,20",
    "t2_star": "10.5,21,42,84,inf",
}


def parse_grid(text: str, var: str) -> tuple[float, ...]:
    text = text.strip()
    if text == "default":
        text = DEFAULT_GRIDS[var]
    if text.startswith(("log:", "lin:")):
        kind, body = text.split(":", 1)
        parts = body.split(",")
        if len(parts) != 3:
            raise ConfigError(f"{kind} grid needs lo,hi,n")
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1 or lo <= 0 and kind == "log":
            raise ConfigError("bad grid range")
        if kind == "log":
            values = np.geomspace(lo, hi, n)
        else:
            values = np.linspace(lo, hi, n)
        return tuple(float(v) for v in values)
    values = []
    for cell in text.split(","):
        cell = cell.strip()
        values.append(math.inf if cell in ("inf", "INF") else float(cell))
    return tuple(values)


def parse_sweep(text: str) -> tuple[str, tuple[float, ...]]:
    if "=" not in text:
        raise ConfigError("--sweep expects <var>=<grid>")
    var, grid = text.split("=", 1)
    var = var.strip()
    if var not in SWEEP_VARS:
        raise ConfigError(f"unknown sweep variable {var!r}")
    return var, parse_grid(grid, var)


def parse_set(items) -> tuple[tuple[str, float], ...]:
    overrides = []
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        overrides.append((key.strip(), float(value)))
    return tuple(overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qec-spinsim")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a parameter sweep")
    run.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    run.add_argument("--code", default=None, choices=("surface17", "bs17"))
    run.add_argument("--encoding", default="hybrid", choices=("all-ld", "hybrid"))
    run.add_argument("--sweep", required=True, metavar="VAR=GRID")
    run.add_argument("--set", action="append", metavar="KEY=VALUE", dest="sets")
    run.add_argument("--readout-curve", default="table",
                     help="table | fallback | const:<p> | <curve.csv>")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--shots", default="default")
    run.add_argument("--threshold", type=float, default=1e-6)
    run.add_argument("--out", required=True)
    run.add_argument("--workers", type=int, default=None)

    dump_code = sub.add_parser("dump-code", help="print a code's definition")
    dump_code.add_argument("code", choices=("surface17", "bs17"))

    dump_circ = sub.add_parser("dump-circuit", help="print one QEC round")
    dump_circ.add_argument("--encoding", default="hybrid",
                           choices=("all-ld", "hybrid"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "dump-code":
        code = surface17_spec() if args.code == "surface17" else bs17_spec()
        print(format_code_spec(code), end="")
        return 0
    if args.command == "dump-circuit":
        params = table1_defaults(args.encoding)
        print(dump_circuit(build_round(args.encoding, params)), end="")
        return 0

    try:
        var, grid = parse_sweep(args.sweep)
        code = args.code or ("bs17" if args.experiment == "bs-prep" else "surface17")
        config = ExperimentConfig(
            experiment=args.experiment,
            code=code,
            encoding=args.encoding,
            sweep_var=var,
            grid=grid,
            overrides=parse_set(args.sets),
            readout=args.readout_curve,
            seed=args.seed,
            shots=args.shots,
            threshold=args.threshold,
        )
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        rows, _ = run_experiment(config, out_dir=args.out, workers=args.workers)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    for row in rows:
        print(f"{row.sweep_value:g}: p_L in [{row.p_l_lower:.3e}, "
              f"{row.p_l_upper:.3e}] +- {row.std_err:.1e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
