import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy.optimize import brentq

from qvlcode.exponents import (
    ProbVector,
    _fast_path,
    constant_C,
    exponent_value,
    f_overhead,
    fixed_error_bound,
    grid_oracle,
    overflow_exponent,
    rank_bound,
    relative_entropy,
    schedule,
    shannon_entropy,
    simplex_grid,
    trace_bound,
    varlen_error_bound,
    varlen_overflow_bound,
)


def binary_oracle(a1, R):
    """Two-outcome exponent: the level set H(b)=R is {t, 1-t}; take the nearer one."""
    h = lambda t: -t * math.log(t) - (1 - t) * math.log(1 - t)  # noqa: E731
    t = brentq(lambda t: h(t) - R, 0.5, 1 - 1e-15)
    return min(relative_entropy([t, 1 - t], [a1, 1 - a1]),
               relative_entropy([1 - t, t], [a1, 1 - a1]))


def test_frozen_binary_value():
    assert exponent_value([0.9, 0.1], 0.5) == pytest.approx(0.044168021886846529, abs=1e-9)
    assert binary_oracle(0.9, 0.5) == pytest.approx(0.044168021886846529, abs=1e-9)


def test_relative_entropy_support():
    assert relative_entropy([0.5, 0.5], [1.0, 0.0]) == math.inf
    assert relative_entropy([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2))


def test_probvector_validation():
    with pytest.raises(ValueError):
        ProbVector([0.5, 0.6])
    with pytest.raises(ValueError):
        ProbVector([1.2, -0.2])


def test_trivial_and_infinite_regimes():
    a = [0.7, 0.3]
    res = overflow_exponent(a, shannon_entropy(a))
    assert res.value == 0.0 and res.method == "trivial"
    assert exponent_value([0.6, 0.4, 0.0], math.log(3)) == math.inf


def test_uniform_constant():
    assert constant_C([0.5, 0.5], step=1e-4) == pytest.approx(1 / math.log(2), abs=1e-6)


def test_simplex_grid_is_reverse_lexicographic():
    g = simplex_grid(3, 2)
    assert len(g) == 6
    np.testing.assert_allclose(g.sum(axis=1), 1)
    assert [tuple(r) for r in g] == sorted((tuple(r) for r in g), reverse=True)


def test_f_overhead_per_symbol_decreases():
    vals = [f_overhead(n, 0.5, 2) / n for n in range(4, 200, 15)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_schedule_feasible_eventually():
    d, dp = schedule(64)
    assert d == pytest.approx(0.5) and dp == pytest.approx(0.25)
    assert not 2 * schedule(8)[1] < schedule(8)[0]


def test_bound_shapes():
    assert rank_bound(4, 2, 0.0) == pytest.approx(6.0 ** 8)
    assert rank_bound(800, 3, 1.0) == math.inf
    assert fixed_error_bound(5, 2, [0.9, 0.1], 0.6) == pytest.approx(2 * trace_bound(5, 2, [0.9, 0.1], 0.6))
    with pytest.raises(ValueError):
        varlen_error_bound(10, 2, [0.9, 0.1], 0.4, 0.2)
    assert 0 <= varlen_error_bound(10, 2, [0.9, 0.1], 0.6, 0.1) <= 1
    assert varlen_overflow_bound(10, 2, [0.9, 0.1], 0.6, 0.5) >= 0


probs2 = st.floats(0.02, 0.98)


@given(probs2, st.floats(0.0, 1.0))
def test_binary_matches_oracle(a1, frac):
    a = [a1, 1 - a1]
    H = shannon_entropy(a)
    R = H + frac * (math.log(2) - H)
    assume(math.log(2) - R > 1e-6 and R - H > 1e-9)
    assert exponent_value(a, R) == pytest.approx(binary_oracle(a1, R), abs=1e-8)


@given(st.integers(0, 2 ** 32 - 1))
def test_fast_path_matches_grid_d3(seed):
    rng = np.random.default_rng(seed)
    a = rng.dirichlet(np.ones(3))
    H = shannon_entropy(a)
    R = float(rng.uniform(H, math.log(3)))
    assume(R - H > 1e-6 and math.log(3) - R > 1e-6)
    fast, _ = _fast_path(a, R)
    grid, _ = grid_oracle(a, R)
    assert abs(fast - grid) <= 1e-4


@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 3))
def test_exponent_nondecreasing_in_rate(seed, d):
    rng = np.random.default_rng(seed)
    a = rng.dirichlet(np.ones(d))
    Rs = np.linspace(0, math.log(d) - 1e-9, 12)
    vals = [exponent_value(a, float(R)) for R in Rs]
    assert all(v >= 0 for v in vals)
    assert all(b >= a_ - 1e-12 for a_, b in zip(vals, vals[1:]))


@given(st.integers(0, 2 ** 32 - 1))
def test_exponent_argmin_on_level_set(seed):
    rng = np.random.default_rng(seed)
    a = rng.dirichlet(np.ones(3))
    H = shannon_entropy(a)
    R = float(rng.uniform(H, math.log(3)))
    assume(R - H > 1e-4 and math.log(3) - R > 1e-4)
    res = overflow_exponent(a, R)
    b = np.asarray(res.argmin)
    assert shannon_entropy(b) == pytest.approx(R, abs=1e-6)
    assert relative_entropy(b, a) == pytest.approx(res.value, abs=1e-9)
