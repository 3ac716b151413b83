import csv
import io
import json
import math

import pytest

from qvlcode import harness
from qvlcode.cli import main
from qvlcode.harness import ConfigError, parse_config
from qvlcode.presets import build_source, encode_matrix, decode_matrix

FIXED = {
    "mode": "fixed", "d": 2,
    "source": {"preset": "pure-qubit-pair", "params": {"theta": 0.7853981633974483, "p": 0.5}},
    "n_range": {"start": 2, "stop": 6}, "R": 0.5, "seed": 7,
}


def rows_of(text):
    body = "\n".join(l for l in text.splitlines() if not l.startswith("#"))
    return list(csv.DictReader(io.StringIO(body)))


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def test_fixed_end_to_end(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["run", "--config", str(write(tmp_path, FIXED)), "--out", str(out)]) == 0
    rows = rows_of(out.read_text())
    assert len(rows) == 5
    assert [int(r["n"]) for r in rows] == [2, 3, 4, 5, 6]
    assert all(r["error_ok"] == "true" and r["rank_ok"] == "true" for r in rows)
    assert rows[0]["schema"] == harness.SCHEMA_VERSION
    assert list(rows[0]) == harness.COLUMNS


def test_bad_probabilities_exit_2_without_output(tmp_path):
    cfg = {"mode": "fixed", "d": 2, "n_range": [2], "R": 0.5, "source": {"states": [
        {"prob": 0.5, "matrix": encode_matrix([[1, 0], [0, 0]])},
        {"prob": 0.4, "matrix": encode_matrix([[0, 0], [0, 1]])}]}}
    out = tmp_path / "r.csv"
    assert main(["run", "--config", str(write(tmp_path, cfg)), "--out", str(out)]) == 2
    assert not out.exists()


@pytest.mark.parametrize("bad", [
    {"mode": "bogus"},
    {"mode": "fixed", "d": 2, "source": {"preset": "bell"}, "R": 0.5},
    {"mode": "fixed", "d": 3, "source": {"preset": "diagonal-qubit"}, "R": 0.5},
    {"mode": "fixed", "d": 2, "source": {"preset": "diagonal-qubit"}, "R": 5.0},
    {"mode": "varlen", "d": 2, "source": {"preset": "diagonal-qubit"}},
    {"mode": "varlen", "d": 2, "source": {"preset": "diagonal-qubit"}, "schedule": True},
    {"mode": "exponent", "a": [0.5, 0.6], "R": 0.3},
    {"mode": "naive", "d": 2, "source": {"preset": "diagonal-qubit"}, "alphas": [0, 0.3]},
])
def test_config_rejections(bad):
    with pytest.raises(ConfigError):
        parse_config(bad)


def test_missing_config_file_exit_2(tmp_path):
    assert main(["validate", "--config", str(tmp_path / "nope.json")]) == 2


def test_resource_cap_exit_3(tmp_path):
    cfg = dict(FIXED, n_range=[12])
    assert main(["run", "--config", str(write(tmp_path, cfg)), "--out", str(tmp_path / "x.csv")]) == 3


def test_bound_violation_exit_5(tmp_path, monkeypatch):
    monkeypatch.setattr(harness, "fixed_error_bound", lambda *a: 0.0)
    out = tmp_path / "r.csv"
    assert main(["run", "--config", str(write(tmp_path, FIXED)), "--out", str(out)]) == 5
    assert out.exists()


def test_invariant_breach_exit_4(tmp_path, monkeypatch):
    monkeypatch.setattr(harness, "EXACTNESS_TOL", -1.0)
    cfg = {"mode": "varlen", "d": 2, "source": {"preset": "diagonal-qubit"},
           "n_range": [3], "delta": 0.7}
    assert main(["run", "--config", str(write(tmp_path, cfg)), "--out", str(tmp_path / "r.csv")]) == 4


def test_sweep_cardinality():
    cfg = parse_config({"mode": "varlen", "d": 2, "source": {"preset": "diagonal-qubit"},
                        "n_range": [3, 4, 5, 6], "R": [0.1, 0.3, 0.5, 0.69], "delta": 0.7})
    rep = harness.run(cfg)
    assert len(rep.rows) == 16
    keys = [(r.n, r.R) for r in rep.rows]
    assert keys == sorted(keys)


def test_infeasible_cells_flagged():
    cfg = parse_config({"mode": "varlen", "d": 2, "source": {"preset": "diagonal-qubit"},
                        "n_range": [1, 4], "R": 0.4, "delta": [0.7], "delta_prime": [0.1, 0.5]})
    rows = harness.run(cfg).rows
    status = {(r.n, r.delta_prime): r.status for r in rows}
    assert status[(1, 0.1)] == "infeasible"
    assert status[(4, 0.5)] == "infeasible"
    assert status[(4, 0.1)] == "ok"
    ok = [r for r in rows if r.status == "ok"][0]
    assert ok.error is not None and ok.error_ok is not None


def test_schedule_fallback():
    cfg = parse_config({"mode": "varlen", "d": 2, "source": {"preset": "diagonal-qubit"},
                        "n_range": [4], "schedule": True,
                        "fallback": {"delta": 0.7, "delta_prime": 0.1}})
    (row,) = harness.run(cfg).rows
    assert row.delta_prime == 0.1 and row.error_ok is not None


def test_exponent_column_monotone(tmp_path, capsys):
    assert main(["exponent", "--a", "0.9,0.1", "--R", "0.35,0.4,0.5,0.6,0.69"]) == 0
    rows = rows_of(capsys.readouterr().out)
    vals = [float(r["exponent"]) for r in rows]
    assert vals == sorted(vals)


def test_bits_display(capsys):
    assert main(["exponent", "--a", "0.9,0.1", "--R", "0.5"]) == 0
    nats = rows_of(capsys.readouterr().out)[0]
    assert main(["exponent", "--a", "0.9,0.1", "--R", str(0.5 / math.log(2)), "--bits"]) == 0
    bits = rows_of(capsys.readouterr().out)[0]
    assert float(bits["R"]) == pytest.approx(0.5 / math.log(2))
    assert float(bits["exponent"]) == pytest.approx(float(nats["exponent"]) / math.log(2))


def test_repeat_runs_byte_identical(tmp_path):
    cfg = write(tmp_path, FIXED)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["run", "--config", str(cfg), "--out", str(a)])
    main(["sweep", "--config", str(cfg), "--out", str(b), "--jobs", "3"])
    assert a.read_bytes() == b.read_bytes()


def test_json_report_and_seed_override(tmp_path):
    out = tmp_path / "r.json"
    assert main(["run", "--config", str(write(tmp_path, FIXED)), "--out", str(out),
                 "--format", "json", "--seed", "99"]) == 0
    doc = json.loads(out.read_text())
    assert doc["provenance"]["seed"] == 99 and doc["config"]["seed"] == 99
    assert len(doc["rows"]) == 5


def test_validate_and_cache(tmp_path, monkeypatch, capsys):
    assert main(["validate", "--config", str(write(tmp_path, FIXED))]) == 0
    assert "cells=5" in capsys.readouterr().out
    monkeypatch.delenv("QVLCODE_CACHE_DIR", raising=False)
    assert main(["cache", "build", "--n", "3"]) == 2
    cache = tmp_path / "cache"
    monkeypatch.setenv("QVLCODE_CACHE_DIR", str(cache))
    assert main(["cache", "build", "--n", "2", "3"]) == 0
    assert len(list(cache.glob("*.npz"))) == 2
    assert main(["cache", "clear"]) == 0
    assert not cache.exists()


def test_matrix_encoding_roundtrip():
    m = [[0.5, 0.25 - 0.1j], [0.25 + 0.1j, 0.5]]
    assert (decode_matrix(encode_matrix(m)) == m).all()
    with pytest.raises(ValueError):
        decode_matrix([[1, 0], [0, 1]])


def test_presets():
    plain = build_source({"preset": "pure-qubit-pair", "params": {"theta": 0.3}}, False)
    assert plain.dim == 2 and len(plain) == 2
    lifted = build_source({"preset": "diagonal-qubit"}, True)
    assert lifted.dimB == 1
    with pytest.raises(ValueError):
        build_source({"preset": "nope"}, False)
