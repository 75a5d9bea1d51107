"""Command line entry point: ``bvlab <subcommand> [options]``."""

import argparse
import json
import os
import sys

from .errors import BVLabError
from .harness import (CONSTANTS, DEFAULT_SEED, ConfigError, ExperimentConfig, claim_suite,
                      run, suite_summary)

# default function per subcommand when no --config is given
_DEFAULTS = {
    "sweep": {"kind": "affine", "slope": 1.0},
    "recover": {"kind": "cantor", "mass": 1.0},
    "slice2d": {"kind": "disk_indicator", "radius": 0.3},
    "verify": {"kind": "cantor", "mass": 1.0},
    "oracle": {"kind": "sum", "terms": [{"kind": "affine", "slope": 1.0},
                                        {"kind": "step", "location": 0.5, "height": 1.0}]},
}


def _common(p):
    p.add_argument("--config", help="TOML or JSON experiment file")
    p.add_argument("--seed", type=int, help="random seed (default %d)" % DEFAULT_SEED)
    p.add_argument("--out", help="output directory")
    p.add_argument("--tol", type=float, help="relative tolerance of the evaluator")
    p.add_argument("--threads", type=int, default=1,
                   help="accepted for interface stability; evaluation is single-threaded")


def build_parser():
    ap = argparse.ArgumentParser(prog="bvlab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("sweep", "recover", "slice2d", "verify", "oracle"):
        p = sub.add_parser(name, help=f"run a {name} experiment")
        _common(p)
        p.add_argument("--gamma", type=float)
        p.add_argument("--function", help="function descriptor as JSON text")
        p.add_argument("--no-timing", action="store_true",
                       help="write runtime_ms as 0 for byte-identical CSV")
    p = sub.add_parser("claims", help="run the acceptance claim suite")
    _common(p)
    p.add_argument("--criteria", help="comma separated criterion numbers (default: all)")
    p.add_argument("--constant", action="append", default=[], metavar="NAME=VALUE",
                   help="override a constant in the targets, e.g. C1=3 (negative control)")
    return ap


def _config(args):
    if args.config:
        cfg = ExperimentConfig.load(args.config)
        cfg.mode = args.command
    else:
        cfg = ExperimentConfig(function=_DEFAULTS[args.command], mode=args.command)
    if args.function:
        try:
            cfg.function = json.loads(args.function)
        except ValueError as exc:
            raise ConfigError([f"function: {exc}"]) from exc
    if args.gamma is not None:
        cfg.gamma = args.gamma
    if args.seed is not None:
        cfg.seed = args.seed
    if args.tol is not None:
        cfg.tol = args.tol
    if args.out:
        cfg.output = dict(cfg.output, dir=args.out)
    if args.no_timing:
        cfg.output = dict(cfg.output, timing=False)
    cfg.threads = args.threads
    cfg.validate()
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "claims":
            consts = dict(CONSTANTS)
            for item in args.constant:
                name, _, value = item.partition("=")
                if name not in consts:
                    raise ConfigError([f"constant: unknown name {name!r}"])
                consts[name] = float(value)
            crit = [int(c) for c in args.criteria.split(",")] if args.criteria else None
            rows = claim_suite(crit, consts, log=print)
            summary = suite_summary(rows)
            if args.out:
                os.makedirs(args.out, exist_ok=True)
                with open(os.path.join(args.out, "claims.json"), "w") as fh:
                    json.dump(summary, fh, indent=1)
            return 0 if summary["passed"] else 1
        cfg = _config(args)
        res = run(cfg)
        for key, path in sorted(res.artifacts.items()):
            print(f"{key}: {path}")
        if cfg.mode in ("verify", "oracle"):
            for row in res.summary["rows"]:
                print(("PASS " if row["passed"] else "FAIL ") + row["claim"])
        return res.status
    except ConfigError as exc:
        print("usage error:", file=sys.stderr)
        for problem in exc.problems:
            print(f"  {problem}", file=sys.stderr)
        return 2
    except BVLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
