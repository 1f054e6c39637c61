"""Command-line entry point: ``ldgfrac {converge,project,preset,list-presets}``."""
from __future__ import annotations

import argparse
import logging
import sys

from .exceptions import LdgFracError
from .experiments import (OUTPUT_ENV, PRESETS, ExperimentConfig, preset, run_experiment,
                          write_report)


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--out", help=f"CSV path (default: ${OUTPUT_ENV}/<name>.csv or ./results)")
    p.add_argument("--workers", type=int, default=1, help="process pool size for the p sweep")
    p.add_argument("--cfl", type=float, help="override the time-step safety factor")
    p.add_argument("--no-audit", action="store_true", help="skip the dt-halving audit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ldgfrac", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("converge", "run an LDG convergence sweep from a config file"),
                        ("project", "run a projection-rate study from a config file")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="INI file with an [experiment] section")
        _add_run_flags(p)
    p = sub.add_parser("preset", help="run a builtin preset")
    p.add_argument("name", choices=sorted(PRESETS), metavar="name")
    p.add_argument("--dump", action="store_true", help="print the preset config and exit")
    _add_run_flags(p)
    sub.add_parser("list-presets", help="list builtin presets")
    return parser


def _apply_flags(cfg: ExperimentConfig, args) -> ExperimentConfig:
    changes = {}
    if args.cfl is not None:
        changes["cfl"] = args.cfl
    if args.no_audit:
        changes["audit"] = False
    return cfg.replace(**changes) if changes else cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "list-presets":
        for name, cfg in sorted(PRESETS.items()):
            print(f"{name}\t{cfg.mode}\t{cfg.kind}")
        return 0
    try:
        if args.command == "preset":
            cfg = preset(args.name)
            if args.dump:
                sys.stdout.write(cfg.to_ini())
                return 0
        else:
            cfg = ExperimentConfig.load(args.config)
            if cfg.mode != args.command:
                cfg = cfg.replace(mode=args.command)
        cfg = _apply_flags(cfg, args)
        report = run_experiment(cfg, workers=args.workers)
    except LdgFracError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    path = write_report(report, cfg, args.out)
    print(report.summary())
    print(f"wrote {path}")
    return 0 if report.passed else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
