"""``anosov-lab`` command line entry point.

Exit codes: 0 every verdict passes, 1 some verdict fails, 2 input or
validation error (including resource caps), 3 inconclusive.
"""
from __future__ import annotations

import argparse
import logging
import sys

from ..diagnostics.fits import Verdict
from ..errors import ConfigError, DomainError, ResourceError
from .commands import COMMANDS, run_command
from .config import load_config

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 1, 2, 3

log = logging.getLogger("anosov_lab")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="anosov-lab",
                                 description="Numerical Anosov and Hitchin diagnostics for Fuchsian group representations.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON config file")
    ap.add_argument("--out", required=True, help="output directory (report.json, tables/, cache/)")
    ap.add_argument("--jobs", type=int, default=1, help="worker threads for the map phases")
    ap.add_argument("--seed", type=int, default=None, help="override the config seed")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        cfg = load_config(args.config, seed=args.seed)
        report, verdict = run_command(args.command, cfg, args.out, args.jobs)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for p in exc.problems:
            print(f"  {p}", file=sys.stderr)
        return EXIT_INPUT
    except (ResourceError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    for name, cat in report["categories"].items():
        log.info("%-28s %-12s %s=%r", name, cat["verdict"], cat["statistic"], cat["margin"])
    print(f"{args.command}: {verdict.value}" + (f" (failing: {', '.join(report['failing'])})"
                                                if report["failing"] else ""))
    return {Verdict.PASS: EXIT_PASS, Verdict.FAIL: EXIT_FAIL, Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE}[verdict]


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
