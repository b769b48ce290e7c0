"""Command line entry point: one subcommand per experiment."""
from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config

EXIT_PASS, EXIT_ERROR, EXIT_FAIL = 0, 1, 2

COMMANDS = ("build-coding", "validate", "green", "ancona", "martin-rays", "escape-expansion",
            "escape-cutting", "comparability", "pressure")


def _model(text: str) -> str:
    if text in ("f2", "z", "z2", "trivial"):
        return text
    if text.startswith("zmod:") and text[5:].isdigit() and int(text[5:]) >= 1:
        return text
    raise argparse.ArgumentTypeError("model must be f2, z, z2, zmod:m or trivial")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypcover", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--model", type=_model)
        p.add_argument("--delta", type=float)
        p.add_argument("--lambda", dest="lam", type=float)
        p.add_argument("--depth", type=int)
        p.add_argument("--radius", type=int)
        p.add_argument("--samples", type=int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_ERROR
    from .experiments import DRIVERS
    overrides = {k: getattr(args, k) for k in ("seed", "out", "model", "delta", "lam", "depth", "radius", "samples")}
    try:
        cfg = load_config(args.config, overrides, args.command)
        report = DRIVERS[args.command](cfg)
        paths = report.write(cfg.out)
    except (ConfigError, OSError, ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    verdict = "pass" if report.passed else "FAIL"
    print(f"{args.command}: {verdict} ({', '.join(paths)})")
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
