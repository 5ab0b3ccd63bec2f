"""CLI: `plots render --spec <file> --out <dir>`."""

from __future__ import annotations

import argparse
import sys

from .figspec import SpecError, parse_spec_file
from .render import render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plots")
    sub = parser.add_subparsers(dest="command", required=True)
    cmd = sub.add_parser("render", help="render a figure from a spec file")
    cmd.add_argument("--spec", required=True)
    cmd.add_argument("--out", default=".")
    args = parser.parse_args(argv)

    try:
        spec = parse_spec_file(args.spec)
        path = render(spec, args.out)
    except (SpecError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
