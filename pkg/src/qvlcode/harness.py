"""Experiment configs, sweep execution, bound verdicts and report files.

A config is JSON validated against ``CONFIG_SCHEMA``. Each cell of the cartesian
product n x R x delta x delta' yields one report row carrying every computed
quantity next to its bound and a satisfaction flag. Row contents depend only on
(config, seed), never on the number of worker threads.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import product
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from . import __version__
from .entangled import local_fixed_error, local_varlen_report, reduced_spectrum
from .exponents import (
    DEFAULT_STEP,
    fixed_error_bound,
    overflow_exponent,
    rank_bound,
    schedule,
)
from .fixed_code import average_error, make_fixed, trace_on_average
from .linalg import MemoryCapError, average_state, partial_trace_B, tensor_power
from .presets import build_source
from .sources import ExpansionCapError
from .varlen import RateGrid, make_naive, make_smeared, varlen_report

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_CONFIG, EXIT_RESOURCES, EXIT_INVARIANT, EXIT_BOUND = 0, 2, 3, 4, 5
MODES = ["fixed", "varlen", "naive", "entangled-fixed", "entangled-varlen", "exponent"]
EXACTNESS_TOL = 1e-8
POVM_TOL = 1e-10

COLUMNS = [
    "schema", "mode", "n", "d", "R", "delta", "delta_prime", "status",
    "error", "error_stderr", "error_aux", "error_bound", "error_ok",
    "overflow", "overflow_bound", "overflow_ok",
    "rank", "rank_bound", "rank_ok",
    "exponent", "exponent_method",
]
RATE_COLUMNS = ("R", "delta", "delta_prime", "exponent")

_number_or_list = {"oneOf": [{"type": "number"}, {"type": "array", "items": {"type": "number"}, "minItems": 1}]}

CONFIG_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["mode"],
    "additionalProperties": False,
    "properties": {
        "mode": {"enum": MODES},
        "d": {"type": "integer", "minimum": 2, "maximum": 8},
        "source": {
            "type": "object",
            "oneOf": [
                {"required": ["preset"]},
                {"required": ["states"]},
            ],
            "properties": {
                "preset": {"type": "string"},
                "params": {"type": "object"},
                "dimA": {"type": "integer", "minimum": 1},
                "dimB": {"type": "integer", "minimum": 1},
                "states": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "required": ["prob", "matrix"],
                        "properties": {
                            "prob": {"type": "number", "minimum": 0, "maximum": 1},
                            "matrix": {"type": "array"},
                        },
                    },
                },
            },
        },
        "a": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 2},
        "n_range": {
            "oneOf": [
                {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
                {"type": "object", "required": ["start", "stop"],
                 "properties": {"start": {"type": "integer", "minimum": 1},
                                "stop": {"type": "integer", "minimum": 1}}},
            ]
        },
        "R": _number_or_list,
        "delta": _number_or_list,
        "delta_prime": _number_or_list,
        "schedule": {"type": "boolean"},
        "fallback": {
            "type": "object",
            "required": ["delta", "delta_prime"],
            "properties": {"delta": {"type": "number"}, "delta_prime": {"type": "number"}},
        },
        "alphas": {"type": "array", "items": {"type": "number"}, "minItems": 2},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
        "caps": {
            "type": "object",
            "properties": {
                "sequences": {"type": "integer", "minimum": 1},
                "mc_samples": {"type": "integer", "minimum": 0},
                "cells": {"type": "integer", "minimum": 1},
            },
        },
        "grid_step": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.5},
        "output": {
            "type": "object",
            "properties": {"path": {"type": "string"}, "format": {"enum": ["csv", "json"]}},
        },
    },
}


class ConfigError(ValueError):
    pass


def _as_list(x) -> list:
    if x is None:
        return [None]
    return list(x) if isinstance(x, (list, tuple)) else [x]


@dataclass
class ExperimentConfig:
    mode: str
    d: int = 2
    source: dict | None = None
    a: list[float] | None = None
    ns: list[int] = field(default_factory=lambda: [4])
    Rs: list[float | None] = field(default_factory=lambda: [None])
    deltas: list[float | None] = field(default_factory=lambda: [None])
    delta_primes: list[float | None] = field(default_factory=lambda: [None])
    schedule: bool = False
    fallback: dict | None = None
    alphas: list[float] | None = None
    seed: int = 0
    seq_cap: int = 4096
    mc_samples: int = 0
    cell_cap: int = 10_000
    grid_step: float | None = None
    out_path: str | None = None
    out_format: str = "csv"
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def bipartite(self) -> bool:
        return self.mode.startswith("entangled")


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate a config dict and resolve sources; raises ConfigError."""
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"schema violation at {list(exc.absolute_path)}: {exc.message}") from exc
    mode = raw["mode"]
    nr = raw.get("n_range", [4])
    ns = list(range(nr["start"], nr["stop"] + 1)) if isinstance(nr, dict) else list(nr)
    caps = raw.get("caps", {})
    out = raw.get("output", {})
    cfg = ExperimentConfig(
        mode=mode,
        d=raw.get("d", 2),
        source=raw.get("source"),
        a=raw.get("a"),
        ns=ns,
        Rs=_as_list(raw.get("R")),
        deltas=_as_list(raw.get("delta")),
        delta_primes=_as_list(raw.get("delta_prime")),
        schedule=raw.get("schedule", False),
        fallback=raw.get("fallback"),
        alphas=raw.get("alphas"),
        seed=raw.get("seed", 0),
        seq_cap=caps.get("sequences", 4096),
        mc_samples=caps.get("mc_samples", 0),
        cell_cap=caps.get("cells", 10_000),
        grid_step=raw.get("grid_step"),
        out_path=out.get("path"),
        out_format=out.get("format", "csv"),
        raw=raw,
    )
    _semantic_checks(cfg)
    return cfg


def _semantic_checks(cfg: ExperimentConfig):
    if cfg.mode == "exponent":
        if cfg.a is None:
            raise ConfigError("exponent mode needs 'a'")
        if abs(sum(cfg.a) - 1) > 1e-12:
            raise ConfigError(f"'a' sums to {sum(cfg.a)!r}, not 1")
        if None in cfg.Rs:
            raise ConfigError("exponent mode needs 'R'")
        for R in cfg.Rs:
            if not 0 <= R <= math.log(len(cfg.a)) + 1e-12:
                raise ConfigError(f"R={R} outside [0, ln d]")
        return
    if cfg.source is None:
        raise ConfigError("a source is required")
    try:
        src = build_source(cfg.source, cfg.bipartite)
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"invalid source: {exc}") from exc
    dim = src.dimA if cfg.bipartite else src.dim
    if dim != cfg.d:
        raise ConfigError(f"source acts on dimension {dim}, config says d={cfg.d}")
    if cfg.mode.endswith("fixed"):
        if None in cfg.Rs:
            raise ConfigError("fixed modes need 'R'")
        for R in cfg.Rs:
            if not 0 <= R <= math.log(cfg.d) + 1e-12:
                raise ConfigError(f"R={R} outside [0, ln d]")
    if cfg.mode == "naive":
        if cfg.alphas is None:
            raise ConfigError("naive mode needs 'alphas'")
        try:
            RateGrid(cfg.alphas, cfg.d)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if cfg.mode.endswith("varlen") and not cfg.schedule and None in cfg.deltas:
        raise ConfigError("varlen modes need 'delta' or 'schedule'")
    if cfg.schedule and cfg.fallback is None:
        raise ConfigError("'schedule' needs a feasible 'fallback' pair for small n")
    if cfg.fallback is not None:
        f = cfg.fallback
        if not 0 < 2 * f["delta_prime"] < f["delta"]:
            raise ConfigError("fallback pair must satisfy 0 < 2 delta' < delta")
    ncells = len(cfg.ns) * len(cfg.Rs) * len(cfg.deltas) * len(cfg.delta_primes)
    if ncells > cfg.cell_cap:
        raise ConfigError(f"{ncells} cells exceed the cell cap {cfg.cell_cap}")


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return parse_config(raw)


@dataclass
class Row:
    mode: str
    n: int | None
    d: int
    R: float | None
    delta: float | None = None
    delta_prime: float | None = None
    status: str = "ok"
    error: float | None = None
    error_stderr: float | None = None
    error_aux: float | None = None
    error_bound: float | None = None
    error_ok: bool | None = None
    overflow: float | None = None
    overflow_bound: float | None = None
    overflow_ok: bool | None = None
    rank: int | None = None
    rank_bound: float | None = None
    rank_ok: bool | None = None
    exponent: float | None = None
    exponent_method: str | None = None
    diagnostics: list[str] = field(default_factory=list)

    def flags(self) -> list[bool]:
        return [f for f in (self.error_ok, self.overflow_ok, self.rank_ok) if f is not None]

    def sort_key(self):
        return (self.n if self.n is not None else -1, -1.0 if self.R is None else self.R,
                self.delta or 0.0, self.delta_prime or 0.0)


@dataclass
class SimulationReport:
    config: dict
    provenance: dict
    rows: list[Row]

    @property
    def all_satisfied(self) -> bool:
        return all(all(r.flags()) for r in self.rows)

    @property
    def invariant_breaches(self) -> list[str]:
        return [f"n={r.n} R={r.R}: {m}" for r in self.rows for m in r.diagnostics]

    def exit_code(self) -> int:
        if self.invariant_breaches:
            return EXIT_INVARIANT
        if not self.all_satisfied:
            return EXIT_BOUND
        return EXIT_OK


def _le(x: float, bound: float, slack: float = 1e-12) -> bool:
    return bool(x <= bound + slack)


def _cell_rows(cfg: ExperimentConfig, n, R, delta, dprime, index: int) -> Row:
    row = Row(cfg.mode, n, cfg.d, R, delta, dprime)
    mode = cfg.mode
    if mode == "exponent":
        res = overflow_exponent(np.asarray(cfg.a), R, step=cfg.grid_step)
        row.n = None
        row.exponent, row.exponent_method = res.value, res.method
        return row

    src = build_source(cfg.source, cfg.bipartite)
    if mode in ("fixed", "entangled-fixed"):
        code = make_fixed(R, n, cfg.d)
        row.rank, row.rank_bound = code.rank, rank_bound(n, cfg.d, R)
        row.rank_ok = _le(code.rank, row.rank_bound)
        if mode == "fixed":
            est = average_error(code, src, cfg.seq_cap, cfg.mc_samples or None, seed=cfg.seed + index)
            a = average_state(src).spectrum()
            tr = trace_on_average(code, src)
        else:
            est = local_fixed_error(code, src, cfg.seq_cap)
            a = reduced_spectrum(src)
            red = partial_trace_B(average_state(src.joint()).entries, src.dimA, src.dimB)
            tr = float(np.real(np.vdot(code.P, tensor_power(red, n))))
        row.error, row.error_stderr = est.value, est.stderr
        row.error_aux = 2.0 * (1.0 - tr)
        row.error_bound = fixed_error_bound(n, cfg.d, a, R)
        row.error_ok = _le(est.value, row.error_aux, 1e-10) and _le(row.error_aux, row.error_bound)
        res = overflow_exponent(a, R, check=False)
        row.exponent, row.exponent_method = res.value, res.method
        return row

    if mode == "naive":
        code = make_naive(RateGrid(cfg.alphas, cfg.d), n, cfg.d)
        rep = varlen_report(code, src, [R] if R is not None else [], cap=cfg.seq_cap)
        row.error, row.error_aux = rep.average_error_exact, rep.average_error_definitional
        if R is not None:
            row.overflow = rep.overflow[R]
        _exactness(row)
        return row

    # smeared code, plain or entangled
    if cfg.schedule:
        delta, dprime = schedule(n)
        if not 0 < 2 * dprime < delta:
            delta, dprime = cfg.fallback["delta"], cfg.fallback["delta_prime"]
        row.delta, row.delta_prime = delta, dprime
    try:
        code = make_smeared(n, cfg.d, delta)
    except ValueError:
        row.status = "infeasible"
        return row
    feasible = dprime is not None and 0 < 2 * dprime < code.delta
    Rs = [R] if R is not None else []
    dp = dprime if feasible else None
    if mode == "varlen":
        rep = varlen_report(code, src, Rs, dp, cfg.seq_cap)
    else:
        rep = local_varlen_report(code, src, Rs, dp, cfg.seq_cap)
    completeness = float(np.abs(code.povm_sum() - np.eye(cfg.d ** n)).max())
    if completeness > POVM_TOL:
        row.diagnostics.append(f"POVM completeness off by {completeness:.3e}")
    row.delta = code.delta
    row.error, row.error_aux = rep.average_error_exact, rep.average_error_definitional
    if dprime is not None and not feasible:
        row.status = "infeasible"
    if rep.error_bound is not None:
        row.error_bound = rep.error_bound
        row.error_ok = _le(rep.average_error_exact, rep.error_bound)
    if R is not None:
        row.overflow, row.overflow_bound = rep.overflow[R], rep.overflow_bounds[R]
        row.overflow_ok = _le(row.overflow, row.overflow_bound)
    _exactness(row)
    return row


def _exactness(row: Row):
    if row.error_aux is not None and not math.isnan(row.error_aux):
        if abs(row.error - row.error_aux) > EXACTNESS_TOL:
            row.diagnostics.append(
                f"closed-form error {row.error!r} != definitional {row.error_aux!r}")


def cells(cfg: ExperimentConfig) -> list[tuple]:
    ns = [None] if cfg.mode == "exponent" else cfg.ns
    return list(product(ns, cfg.Rs, cfg.deltas, cfg.delta_primes))


def run(cfg: ExperimentConfig, jobs: int = 1) -> SimulationReport:
    """Evaluate every cell; rows come back sorted by (n, R) regardless of ``jobs``."""
    todo = cells(cfg)

    def one(arg):
        i, (n, R, delta, dprime) = arg
        try:
            return _cell_rows(cfg, n, R, delta, dprime, i)
        except (MemoryCapError, ExpansionCapError):
            raise
        except ValueError:
            return Row(cfg.mode, n, cfg.d, R, delta, dprime, status="infeasible")

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(one, enumerate(todo)))
    else:
        rows = [one(x) for x in enumerate(todo)]
    rows.sort(key=Row.sort_key)
    return SimulationReport(cfg.raw, provenance(cfg), rows)


sweep = run


def provenance(cfg: ExperimentConfig) -> dict:
    steps = {str(d): s for d, s in DEFAULT_STEP.items()}
    if cfg.grid_step is not None:
        steps = {"all": cfg.grid_step}
    return {
        "package": "qvlcode",
        "version": __version__,
        "schema": SCHEMA_VERSION,
        "seed": cfg.seed,
        "grid_resolution": steps,
        "sequence_cap": cfg.seq_cap,
        "mc_samples": cfg.mc_samples,
    }


def _fmt(v, bits: bool = False, col: str = "") -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if bits and col in RATE_COLUMNS:
            v = v / math.log(2)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.17g}"
    return str(v)


def to_csv(report: SimulationReport, bits: bool = False) -> str:
    buf = io.StringIO()
    prov = dict(report.provenance, units="bits" if bits else "nats")
    for k in sorted(prov):
        buf.write(f"# {k}: {json.dumps(prov[k], sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in report.rows:
        d = asdict(r)
        d["schema"] = SCHEMA_VERSION
        w.writerow([_fmt(d[c], bits, c) for c in COLUMNS])
    return buf.getvalue()


def to_json(report: SimulationReport, bits: bool = False) -> str:
    rows = []
    for r in report.rows:
        d = asdict(r)
        rows.append({c: _json_val(d[c], bits, c) for c in COLUMNS[1:]} | {"diagnostics": d["diagnostics"]})
    doc = {
        "schema": SCHEMA_VERSION,
        "config": report.config,
        "provenance": dict(report.provenance, units="bits" if bits else "nats"),
        "rows": rows,
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _json_val(v, bits, col):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if bits and col in RATE_COLUMNS:
            v /= math.log(2)
        if math.isnan(v) or math.isinf(v):
            return str(v)
        return float(f"{v:.17g}")
    if isinstance(v, np.integer):
        return int(v)
    return v


def render(report: SimulationReport, fmt: str = "csv", bits: bool = False) -> str:
    return to_json(report, bits) if fmt == "json" else to_csv(report, bits)


def write_atomic(path: str | os.PathLike, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
