"""Command-line interface.

Verbs: run, ivs, eval, reconstruct, export-patterns. Exit codes: 0 on
success, 1 for configuration errors, 2 for data errors, 3 for anything
that fails at runtime.
"""

from __future__ import annotations

import argparse
import sys

from .config import load_config
from .errors import ConfigError, DataError
from .runner import (cmd_eval, cmd_export_patterns, cmd_ivs, cmd_reconstruct,
                     cmd_run)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdae-ivs",
        description="Variable-selecting stacked denoising auto-encoder experiments",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, help_text in (
        ("run", "pretrain, fine-tune, and evaluate per the config"),
        ("ivs", "run variable selection alone and export its artifacts"),
        ("eval", "re-evaluate serialized models from a previous run"),
        ("reconstruct", "export reconstruction grids from serialized models"),
        ("export-patterns", "export relevant/irrelevant pattern grids"),
    ):
        p = sub.add_parser(verb, help=help_text)
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the master seed")
        p.add_argument("--out", default=None, help="override the output directory")
        p.add_argument("--paper-grid", action="store_true",
                       help="reject hyper-parameters outside the benchmark grid")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed_override=args.seed,
                          out_override=args.out, paper_grid=args.paper_grid)
        if args.verb == "run":
            report = cmd_run(cfg)
            print((cfg.out / "summary.txt").read_text(), end="")
            print(f"report: {cfg.out / 'report.json'}")
        elif args.verb == "ivs":
            result = cmd_ivs(cfg)
            final = result.history[-1]
            print(f"iterations: {len(result.history)}  "
                  f"kept: {result.mask.popcount}/{result.mask.m}  "
                  f"last validation error: {100 * final.validation_error:.2f}%")
            print(f"artifacts: {cfg.out / 'ivs'}")
        elif args.verb == "eval":
            recomputed = cmd_eval(cfg)
            ok = True
            for variant, depths in sorted(recomputed.items()):
                for depth_key, entry in sorted(depths.items()):
                    ok &= entry["matches_report"]
                    print(f"{variant} {depth_key}: "
                          f"{100 * entry['test_error_rate']:.2f}% "
                          f"(matches report: {entry['matches_report']})")
            if not ok:
                print("serialized models disagree with report.json",
                      file=sys.stderr)
                return EXIT_RUNTIME
        elif args.verb == "reconstruct":
            for path in cmd_reconstruct(cfg):
                print(path)
        elif args.verb == "export-patterns":
            for path in cmd_export_patterns(cfg):
                print(path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
