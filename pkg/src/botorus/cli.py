"""``bo <experiment> --config <path> [--out <dir>]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .experiments import EXPERIMENTS, ExperimentConfig, load_config, parse_config, run


def build_parser():
    p = argparse.ArgumentParser(prog="bo", description="Benjamin-Ono experiments on the torus.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", type=Path, help="flat key = value file")
    p.add_argument("--out", type=Path, default=None, help="output directory (default: ./out/<experiment>)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key; may be repeated")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    params = load_config(args.config) if args.config else {}
    params.update(parse_config("\n".join(args.overrides)))
    out = args.out or Path("out") / args.experiment
    cfg = ExperimentConfig(args.experiment, params, out)
    report = run(cfg)
    for name, ok in report.checks.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    print(json.dumps({k: v for k, v in report.summary.items() if not isinstance(v, list)}, default=float))
    print(f"wrote {out}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
