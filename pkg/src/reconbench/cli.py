"""Command line interface.

    reconbench run --config exp.toml --out results/ [--seed N] [--jobs N]
    reconbench gallery --config exp.toml --cell random_sampling,64,attack1 --count 4
    reconbench validate --config exp.toml

Exit codes: 0 success, 1 invalid config or fatal error, 2 some cells failed.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .config import load_config, validate_config
from .experiment import ConfigError, emit_reconstruction_gallery, run_experiment


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="reconbench", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the full sweep and write CSV reports")
    run.add_argument("--config", required=True)
    run.add_argument("--out", help="output directory (overrides config and RECONBENCH_OUT_DIR)")
    run.add_argument("--seed", type=int, help="master seed override")
    run.add_argument("--jobs", type=int, help="worker processes (overrides RECONBENCH_JOBS)")

    gal = sub.add_parser("gallery", help="write original/reconstruction image pairs for one cell")
    gal.add_argument("--config", required=True)
    gal.add_argument("--cell", required=True, help="method,k,attack")
    gal.add_argument("--count", type=int, default=4)
    gal.add_argument("--out")
    gal.add_argument("--seed", type=int)

    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("--config", required=True)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
    except (OSError, ValueError, TypeError) as exc:
        print(f"cannot load config {args.config}: {exc}", file=sys.stderr)
        return 1
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed

    if args.command == "validate":
        findings = validate_config(cfg)
        for f in findings:
            print(f)
        if not findings:
            print("config OK")
        return 1 if findings else 0

    if args.out:
        cfg.output_dir = args.out
    try:
        if args.command == "run":
            manifest = run_experiment(cfg, jobs=args.jobs)
            print(
                f"wrote {manifest.row_counts['accuracy']} accuracy rows and "
                f"{manifest.row_counts['robustness']} robustness rows to {cfg.output_dir} "
                f"({manifest.error_rows} error rows)"
            )
            return manifest.exit_code
        gdir = emit_reconstruction_gallery(cfg, args.cell, args.count)
        print(f"wrote gallery to {gdir}")
        return 0
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (KeyError, ValueError) as exc:
        print(exc.args[0] if exc.args else exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
