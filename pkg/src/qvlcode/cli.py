"""Command-line entry point: ``qvlcode {run,sweep,exponent,cache,validate}``."""
from __future__ import annotations

import argparse
import json
import math
import os
import shutil
import sys
from pathlib import Path

from . import harness
from .harness import EXIT_CONFIG, EXIT_OK, EXIT_RESOURCES, ConfigError
from .linalg import MemoryCapError
from .schur_weyl import CACHE_ENV, PROJECTOR_CAP, decomposition, save_decomposition, _cache_path
from .sources import ExpansionCapError


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def _load(args) -> harness.ExperimentConfig:
    try:
        raw = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    if getattr(args, "seed", None) is not None:
        raw["seed"] = args.seed
    return harness.parse_config(raw)


def _emit(report, cfg, args) -> int:
    fmt = args.format or cfg.out_format
    text = harness.render(report, fmt, args.bits)
    out = args.out or cfg.out_path
    if out:
        harness.write_atomic(out, text)
    else:
        sys.stdout.write(text)
    for msg in report.invariant_breaches:
        print(f"invariant breach: {msg}", file=sys.stderr)
    code = report.exit_code()
    if code == harness.EXIT_BOUND:
        bad = sum(1 for r in report.rows if not all(r.flags()))
        print(f"{bad} row(s) violate a bound", file=sys.stderr)
    return code


def cmd_run(args) -> int:
    cfg = _load(args)
    return _emit(harness.run(cfg, jobs=args.jobs), cfg, args)


def cmd_validate(args) -> int:
    cfg = _load(args)
    print(f"ok: mode={cfg.mode} cells={len(harness.cells(cfg))}")
    return EXIT_OK


def cmd_exponent(args) -> int:
    if args.config:
        cfg = _load(args)
        if cfg.mode != "exponent":
            raise ConfigError("config mode must be 'exponent'")
        return _emit(harness.run(cfg, jobs=args.jobs), cfg, args)
    if not args.a or not args.R:
        raise ConfigError("give --config or both --a and --R")
    raw = {"mode": "exponent", "a": _floats(args.a), "R": _floats(args.R)}
    if args.bits:
        raw["R"] = [r * math.log(2) for r in raw["R"]]
    if args.step:
        raw["grid_step"] = args.step
    cfg = harness.parse_config(raw)
    return _emit(harness.run(cfg, jobs=args.jobs), cfg, args)


def cmd_cache(args) -> int:
    root = os.environ.get(CACHE_ENV)
    if not root:
        raise ConfigError(f"set {CACHE_ENV} to a cache directory")
    if args.action == "clear":
        shutil.rmtree(root, ignore_errors=True)
        print(f"cleared {root}")
        return EXIT_OK
    for d in args.d:
        for n in args.n:
            if d ** n > PROJECTOR_CAP:
                print(f"skip n={n} d={d}: {d ** n} > {PROJECTOR_CAP}", file=sys.stderr)
                continue
            path = _cache_path(n, d)
            dec = decomposition(n, d)
            if not path.exists():
                save_decomposition(dec, path)
            print(f"n={n} d={d}: {len(dec.blocks)} blocks -> {path}")
    return EXIT_OK


def _common(p: argparse.ArgumentParser, config_required: bool = True):
    p.add_argument("--config", required=config_required, metavar="PATH")
    p.add_argument("--seed", type=int, metavar="N")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--bits", action="store_true", help="display rates and exponents in bits")
    p.add_argument("--jobs", type=int, default=1, metavar="N")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qvlcode", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn, help_ in [("run", cmd_run, "run one experiment config"),
                            ("sweep", cmd_run, "run a config with parameter ranges")]:
        p = sub.add_parser(name, help=help_)
        _common(p)
        p.set_defaults(func=fn)
    p = sub.add_parser("exponent", help="overflow exponent for a spectrum and rates")
    _common(p, config_required=False)
    p.add_argument("--a", help="probability vector, e.g. '0.9,0.1'")
    p.add_argument("--R", help="rate or rates, e.g. '0.4,0.5'")
    p.add_argument("--step", type=float, help="oracle grid step")
    p.set_defaults(func=cmd_exponent)
    p = sub.add_parser("cache", help=f"manage the projector cache in ${CACHE_ENV}")
    p.add_argument("action", choices=["build", "clear"])
    p.add_argument("--n", type=int, nargs="+", default=list(range(2, 8)))
    p.add_argument("--d", type=int, nargs="+", default=[2])
    p.set_defaults(func=cmd_cache)
    p = sub.add_parser("validate", help="check a config without running it")
    p.add_argument("--config", required=True, metavar="PATH")
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) is not None and getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MemoryCapError, ExpansionCapError) as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCES


if __name__ == "__main__":
    sys.exit(main())
