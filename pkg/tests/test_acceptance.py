"""Acceptance criteria, each checked at its stated tolerance.

Every test prints one ``[PASS]``/``[FAIL]`` line; the lines are also collected in
``RESULTS`` and echoed in the terminal summary by conftest. Run standalone with
``python tests/test_acceptance.py`` for just the summary.
"""
from __future__ import annotations

import math
from itertools import combinations

import numpy as np
import pytest

from qvlcode import harness
from qvlcode.entangled import (
    BipartiteEnsemble,
    BipartiteState,
    local_fixed_error,
    local_varlen_error_definitional,
    local_varlen_error_exact,
    local_varlen_report,
    reduced_trace_identity_check,
)
from qvlcode.exponents import (
    _fast_path,
    constant_C,
    grid_oracle,
    overflow_exponent,
    rank_bound,
    schedule,
    shannon_entropy,
    trace_bound,
    varlen_error_bound,
)
from qvlcode.fixed_code import average_error, error_bound_chain, make_fixed
from qvlcode.linalg import (
    DensityMatrix,
    Ensemble,
    average_state,
    kron_all,
    random_density,
    random_pure,
    random_unitary,
)
from qvlcode.schur_weyl import decomposition, rate_projector
from qvlcode.varlen import (
    RateGrid,
    average_error_definitional,
    average_error_exact,
    make_naive,
    make_smeared,
    varlen_report,
)

RESULTS: dict[int, str] = {}

SW_CASES = [(2, n) for n in range(2, 9)] + [(3, n) for n in range(2, 6)]


def record(num: int, ok: bool, detail: str):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}"
    RESULTS[num] = line
    print(line)
    assert ok, line


def random_ensemble(rng, d: int, size: int, pure: bool) -> Ensemble:
    probs = rng.dirichlet(np.ones(size))
    probs /= probs.sum()
    make = (lambda: random_pure(d, rng)) if pure else (lambda: random_density(d, rng))
    return Ensemble([(p, make()) for p in probs])


def non_increasing(xs, slack=0.0) -> bool:
    return all(b <= a + slack for a, b in zip(xs, xs[1:]))


def strictly_decreasing(xs) -> bool:
    return all(b < a for a, b in zip(xs, xs[1:]))


# 1 ---------------------------------------------------------------------------
def test_criterion_1_schur_weyl_suite():
    rng = np.random.default_rng(101)
    worst, rank_ok = 0.0, True
    for d, n in SW_CASES:
        dec = decomposition(n, d)
        N = d ** n
        Ps = [b.projector for b in dec.blocks]
        worst = max(worst, np.abs(sum(Ps) - np.eye(N)).max())
        for P in Ps:
            worst = max(worst, np.abs(P @ P - P).max())
        for P, Q in combinations(Ps, 2):
            worst = max(worst, np.abs(P @ Q).max())
        for _ in range(20):
            U = kron_all([random_unitary(d, rng)] * n)
            for P in Ps:
                worst = max(worst, np.abs(U @ P @ U.conj().T - P).max())
        rank_ok &= sum(b.rank for b in dec.blocks) == N
        rank_ok &= all(round(np.trace(b.projector).real) == b.rank for b in dec.blocks)
    record(1, worst <= 1e-9 and rank_ok,
           f"max deviation {worst:.2e} (tol 1e-9), ranks sum to d^n: {rank_ok}")


# 2 ---------------------------------------------------------------------------
def test_criterion_2_rank_bound():
    violations, checked = 0, 0
    for d, n in SW_CASES:
        for R in np.linspace(0, math.log(d), 10):
            P = rate_projector(float(R), n, d)
            checked += 1
            violations += not (P.rank <= rank_bound(n, d, float(R)))
    record(2, violations == 0, f"{checked} (n, d, R) cells, {violations} violations")


# 3 ---------------------------------------------------------------------------
def _deficiency(P, a, n):
    diag_n = kron_all([np.diag(a)] * n).diagonal().real
    return 1.0 - float(np.diag(P.projector) @ diag_n)


def test_criterion_3_trace_bound_and_monotone_deficiency():
    rng = np.random.default_rng(303)
    violations, checked = 0, 0
    series_ok, series_total = 0, 0
    for d, ns in [(2, range(2, 9)), (3, range(2, 6))]:
        for _ in range(20):
            a = rng.dirichlet(np.ones(d))
            H = shannon_entropy(a)
            for R in np.linspace(H, math.log(d), 7)[1:-1]:
                R = float(R)
                defs = []
                for n in ns:
                    x = _deficiency(rate_projector(R, n, d), a, n)
                    checked += 1
                    violations += not (x <= trace_bound(n, d, a, R))
                    defs.append(x)
                steps = np.diff(defs)
                series_total += 1
                series_ok += bool(np.all(steps <= 0) and np.sum(steps == 0) <= 1)
    ok = violations == 0 and series_ok == series_total
    record(3, ok, f"trace bound: {violations}/{checked} violations; "
                  f"deficiency non-increasing in {series_ok}/{series_total} (rho, R) series")


# 4 ---------------------------------------------------------------------------
def test_criterion_4_fixed_length_chain():
    rng = np.random.default_rng(404)
    violations, checked = 0, 0
    decreasing, eligible = 0, 0
    for j in range(20):
        src = random_ensemble(rng, 2, int(rng.integers(2, 4)), pure=j % 2 == 0)
        H = shannon_entropy(average_state(src).spectrum())
        R = H + 0.5 * (math.log(2) - H)
        errs = []
        for n in range(2, 7):
            rec = error_bound_chain(make_fixed(R, n, 2), src)
            checked += 1
            ok = rec.exact <= rec.two_one_minus_trace + 1e-10 and rec.two_one_minus_trace <= rec.rhs_bound
            violations += not ok
            errs.append(rec.exact)
        eligible += 1
        decreasing += strictly_decreasing(errs)
    record(4, violations == 0 and decreasing == eligible,
           f"chain: {violations}/{checked} violations; exact error decreasing in n "
           f"for {decreasing}/{eligible} ensembles with H < R")


# 5 ---------------------------------------------------------------------------
def test_criterion_5_varlen_exactness():
    rng = np.random.default_rng(505)
    worst, povm = 0.0, 0.0
    codes = {n: make_smeared(n, 2, 0.7) for n in range(2, 7)}
    for code in codes.values():
        povm = max(povm, np.abs(code.povm_sum() - np.eye(2 ** code.n)).max())
    for j in range(20):
        src = random_ensemble(rng, 2, int(rng.integers(2, 4)), pure=j % 2 == 0)
        for code in codes.values():
            e = average_error_exact(code, src).value
            f = average_error_definitional(code, src).value
            worst = max(worst, abs(e - f))
    record(5, worst <= 1e-8 and povm <= 1e-10,
           f"max |closed form - definitional| {worst:.2e} (tol 1e-8), POVM completeness {povm:.2e} (tol 1e-10)")


# 6 ---------------------------------------------------------------------------
def test_criterion_6_varlen_bounds():
    rng = np.random.default_rng(606)
    sources = [Ensemble.single(DensityMatrix.diag([0.8, 0.2]))]
    sources += [random_ensemble(rng, 2, 2, pure=bool(j % 2)) for j in range(2)]
    Rs = [0.1, 0.25, 0.4, 0.55, 0.69]
    cells, violations, monotone_fail = 0, 0, 0
    for src in sources:
        a = average_state(src).spectrum()
        C = constant_C(a)
        for n in range(2, 8):
            for delta in (0.5, 0.7):
                try:
                    code = make_smeared(n, 2, delta)
                except ValueError:
                    continue
                for dp in (0.05, 0.1, 0.2):
                    if not 0 < 2 * dp < code.delta:
                        continue
                    rep = varlen_report(code, src, Rs, dp, definitional=False)
                    eb = varlen_error_bound(n, 2, a, code.delta, dp, C)
                    for R in Rs:
                        cells += 1
                        violations += not (rep.average_error_exact <= eb + 1e-12)
                        violations += not (rep.overflow[R] <= rep.overflow_bounds[R] + 1e-12)
                    ov = [rep.overflow[R] for R in Rs]
                    monotone_fail += not non_increasing(ov)
    record(6, cells >= 100 and violations == 0 and monotone_fail == 0,
           f"{cells} feasible cells, {violations} bound violations, "
           f"{monotone_fail} overflow series not non-increasing in R")


# 7 ---------------------------------------------------------------------------
def test_criterion_7_exponent_optimizer():
    rng = np.random.default_rng(707)
    worst = 0.0
    for j in range(50):
        d = 2 if j < 25 else 3
        a = rng.dirichlet(np.ones(d))
        H = shannon_entropy(a)
        R = float(rng.uniform(H, math.log(d)))
        fast, _ = _fast_path(a, R)
        grid, _ = grid_oracle(a, R)
        worst = max(worst, abs(fast - grid))
    c_err = abs(constant_C([0.5, 0.5], step=1e-4) - 1 / math.log(2))
    zero = all(overflow_exponent(a, R).value == 0.0
               for a in ([0.9, 0.1], [0.5, 0.3, 0.2], [0.7, 0.3])
               for R in (0.0, 0.5 * shannon_entropy(a), shannon_entropy(a)))
    record(7, worst <= 1e-4 and c_err <= 1e-6 and zero,
           f"fast vs oracle max gap {worst:.2e} (tol 1e-4), |C - 1/ln2| {c_err:.2e} (tol 1e-6), "
           f"zero below entropy: {zero}")


# 8 ---------------------------------------------------------------------------
def demolition_series():
    a = [0.8, 0.2]
    src = Ensemble.single(DensityMatrix.diag(a))
    H, L = shannon_entropy(a), math.log(2)
    ns = range(2, 9)
    boundary = [average_error_exact(make_naive(RateGrid([0, H, L]), n, 2), src).value for n in ns]
    interior = [average_error_exact(make_naive(RateGrid([0, (H + L) / 2, L]), n, 2), src).value
                for n in ns]
    smeared = [average_error_exact(make_smeared(n, 2, schedule(n)[0]), src).value for n in ns]
    return boundary, interior, smeared


def test_criterion_8_demolition_contrast():
    boundary, interior, smeared = demolition_series()
    decays = lambda s: non_increasing(s, 1e-3)  # noqa: E731
    ok = (not decays(boundary)) and decays(interior) and decays(smeared)
    fmt = lambda s: ",".join(f"{x:.3f}" for x in s)  # noqa: E731
    record(8, ok, f"boundary [{fmt(boundary)}] decays={decays(boundary)}; "
                  f"interior [{fmt(interior)}] decays={decays(interior)}; "
                  f"smeared [{fmt(smeared)}] decays={decays(smeared)}")


# 9 ---------------------------------------------------------------------------
def _random_bipartite(rng, dA, dB, size):
    probs = rng.dirichlet(np.ones(size))
    items = []
    for j, p in enumerate(probs):
        if j % 2 == 0:
            v = rng.standard_normal(dA * dB) + 1j * rng.standard_normal(dA * dB)
            items.append((p, BipartiteState.pure(v, dA, dB)))
        else:
            items.append((p, BipartiteState(random_density(dA * dB, rng).entries, dA, dB)))
    return BipartiteEnsemble(items)


def test_criterion_9_entangled_mode():
    rng = np.random.default_rng(909)
    # reduced-trace identity
    ident = 0.0
    for j in range(20):
        n = 2 + j % 3
        v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        phi = BipartiteState.pure(v, 2, 2)
        lhs, rhs = reduced_trace_identity_check(rate_projector(0.5, n, 2), phi, n)
        ident = max(ident, abs(lhs - rhs))
    # dimB = 1 reduction
    red = 0.0
    for j in range(5):
        src = random_ensemble(rng, 2, 2, pure=j % 2 == 0)
        bip = BipartiteEnsemble([(p, BipartiteState(s.entries, 2, 1)) for p, s in src.items])
        for n in (2, 3, 4):
            code = make_fixed(0.5, n, 2)
            red = max(red, abs(local_fixed_error(code, bip).value - average_error(code, src).value))
            sm = make_smeared(n, 2, 0.7)
            red = max(red, abs(local_varlen_error_exact(sm, bip).value
                               - average_error_exact(sm, src).value))
            red = max(red, abs(local_varlen_error_definitional(sm, bip).value
                               - average_error_definitional(sm, src).value))
    # bounds with a = reduced spectrum
    viol, cells = 0, 0
    Rs = [0.2, 0.45, 0.69]
    for j in range(20):
        e = _random_bipartite(rng, 2, 2, 2)
        for n in (3, 4):
            code = make_smeared(n, 2, 0.7)
            rep = local_varlen_report(code, e, Rs, delta_prime=0.1, definitional=False)
            cells += 1
            viol += not (rep.average_error_exact <= rep.error_bound + 1e-12)
            viol += sum(not (rep.overflow[R] <= rep.overflow_bounds[R] + 1e-12) for R in Rs)
    # Schmidt trend
    sch = BipartiteEnsemble.single(BipartiteState.schmidt([0.95, 0.05]))
    errs = [local_fixed_error(make_fixed(0.4, n, 2), sch).value for n in range(2, 7)]
    trend = strictly_decreasing(errs)
    ok = ident <= 1e-10 and red <= 1e-12 and viol == 0 and trend
    record(9, ok, f"reduced-trace identity gap {ident:.2e} (tol 1e-10); dimB=1 gap {red:.2e} (tol 1e-12); "
                  f"bipartite bounds {viol} violations over {cells} cells; "
                  f"Schmidt(0.95,0.05) R=0.4 errors [{','.join(f'{x:.4f}' for x in errs)}] "
                  f"decreasing={trend}")


# 10 --------------------------------------------------------------------------
def test_criterion_10_harness_determinism():
    raw = {
        "mode": "varlen", "d": 2,
        "source": {"preset": "pure-qubit-pair", "params": {"theta": 0.6, "p": 0.3}},
        "n_range": [3, 4, 5], "R": [0.3, 0.5], "delta": 0.7, "delta_prime": [0.1, 0.2],
        "seed": 12345678901234567,
    }
    cfg = harness.parse_config(raw)
    outs = {j: harness.render(harness.run(cfg, jobs=j), "csv") for j in (1, 4)}
    outs_json = {j: harness.render(harness.run(cfg, jobs=j), "json") for j in (1, 4)}
    same = outs[1] == outs[4] and outs_json[1] == outs_json[4]
    record(10, same, f"CSV and JSON reports byte-identical across 1 and 4 worker threads: {same}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
