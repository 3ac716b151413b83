"""Variable-length codes from entropy bins of isotypic blocks.

A rate grid 0 = alpha_1 < ... < alpha_{l+1} = ln d splits the diagrams into bins
``alpha_i <= H(lambda/n) < alpha_{i+1}`` (top bin closed). The naive code
measures the bin; the smeared code first draws a grid offset k uniformly from
{1..floor(n delta)} and uses grid ``alpha(k/n)``.

Error of a projective bin measurement followed by the embedding, for one
sequence state rho with t = Tr P rho, is t * (1 - sqrt t); summing over bins
gives the closed form ``1 - sum t^{3/2}`` (weighted by 1/k_max).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .exponents import (
    varlen_error_bound,
    varlen_overflow_bound,
)
from .linalg import Ensemble, average_state, bures_sq, kron_all, tensor_power
from .schur_weyl import ENTROPY_SLACK, IsotypicDecomposition, decomposition
from .sources import DEFAULT_CAP, Estimate, expectation, sample_sequences

# outcomes with smaller conditional probability contribute nothing measurable
TINY = 1e-15


@dataclass(frozen=True)
class RateGrid:
    alphas: tuple[float, ...]

    def __init__(self, alphas: Sequence[float], d: int | None = None):
        al = tuple(float(x) for x in alphas)
        if len(al) < 2 or al[0] != 0.0:
            raise ValueError("grid must start at 0 and have at least two points")
        if any(b <= a for a, b in zip(al, al[1:])):
            raise ValueError(f"grid is not strictly increasing: {al}")
        if d is not None and abs(al[-1] - math.log(d)) > 1e-12:
            raise ValueError("grid must end at ln d")
        object.__setattr__(self, "alphas", al)

    @property
    def l(self) -> int:
        return len(self.alphas) - 1

    def bin_of(self, h: float) -> int:
        """0-based bin index with alpha_i <= h < alpha_{i+1}; the top bin is closed."""
        i = 0
        for j, a in enumerate(self.alphas[:-1]):
            if h + ENTROPY_SLACK >= a:
                i = j
        return i


@dataclass(frozen=True, eq=False)
class Partition:
    """Bins of diagrams for one grid over a fixed (n, d) decomposition."""

    grid: RateGrid
    dec: IsotypicDecomposition
    bins: tuple[tuple[int, ...], ...]  # block indices per bin

    @cached_property
    def ranks(self) -> tuple[int, ...]:
        return tuple(sum(self.dec.blocks[b].rank for b in bn) for bn in self.bins)

    @cached_property
    def projectors(self) -> tuple[np.ndarray, ...]:
        N = self.dec.d ** self.dec.n
        out = []
        for bn in self.bins:
            P = np.zeros((N, N))
            for b in bn:
                P = P + self.dec.blocks[b].projector
            P.setflags(write=False)
            out.append(P)
        return tuple(out)

    def bin_traces(self, block_traces: np.ndarray) -> np.ndarray:
        return np.array([block_traces[list(bn)].sum() if bn else 0.0 for bn in self.bins])


def make_partition(grid: RateGrid, n: int, d: int) -> Partition:
    dec = decomposition(n, d)
    bins: list[list[int]] = [[] for _ in range(grid.l)]
    for j, blk in enumerate(dec.blocks):
        bins[grid.bin_of(blk.entropy)].append(j)
    return Partition(grid, dec, tuple(tuple(b) for b in bins))


@dataclass(frozen=True, eq=False)
class NaiveCode:
    grid: RateGrid
    n: int
    d: int
    partition: Partition

    @property
    def projectors(self):
        return self.partition.projectors

    @property
    def ranks(self):
        return self.partition.ranks


def make_naive(grid: RateGrid, n: int, d: int) -> NaiveCode:
    if abs(grid.alphas[-1] - math.log(d)) > 1e-12:
        raise ValueError("grid must end at ln d")
    return NaiveCode(grid, n, d, make_partition(grid, n, d))


def smeared_grid(k: int, n: int, delta: float, l: int, d: int) -> RateGrid:
    inner = [k / n + (i - 2) * delta for i in range(2, l + 1)]
    return RateGrid([0.0, *inner, math.log(d)], d)


@dataclass(frozen=True, eq=False)
class SmearedCode:
    n: int
    d: int
    delta: float
    l: int
    k_max: int
    partitions: tuple[Partition, ...]  # index k-1

    @property
    def grids(self) -> tuple[RateGrid, ...]:
        return tuple(p.grid for p in self.partitions)

    @property
    def outcomes(self) -> list[tuple[int, int]]:
        """Omega_n as (k, i), 1-based, sorted."""
        return [(k, i) for k in range(1, self.k_max + 1) for i in range(1, self.l + 1)]

    @property
    def omega_size(self) -> int:
        return self.k_max * self.l

    def rank(self, k: int, i: int) -> int:
        return self.partitions[k - 1].ranks[i - 1]

    def projector(self, k: int, i: int) -> np.ndarray:
        return self.partitions[k - 1].projectors[i - 1]

    def povm_sum(self) -> np.ndarray:
        return sum(self.projector(k, i) for k, i in self.outcomes) / self.k_max


def reconcile_delta(delta: float, d: int) -> tuple[float, int]:
    """l = ceil(ln d / delta) + 1 and delta recomputed as ln d / (l - 1)."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    l = math.ceil(math.log(d) / delta) + 1
    return math.log(d) / (l - 1), l


def make_smeared(n: int, d: int, delta: float) -> SmearedCode:
    delta, l = reconcile_delta(delta, d)
    k_max = math.floor(n * delta)
    if k_max < 1:
        raise ValueError(f"n*delta = {n * delta:.4g} < 1 after reconciling delta")
    parts = tuple(make_partition(smeared_grid(k, n, delta, l, d), n, d)
                  for k in range(1, k_max + 1))
    return SmearedCode(n, d, delta, l, k_max, parts)


def as_smeared(code: NaiveCode) -> SmearedCode:
    """View a naive code as a one-offset code (k_max = 1)."""
    delta = code.grid.alphas[1] if code.grid.l > 1 else math.log(code.d)
    return SmearedCode(code.n, code.d, delta, code.grid.l, 1, (code.partition,))


def _coerce(code) -> SmearedCode:
    return as_smeared(code) if isinstance(code, NaiveCode) else code


def _block_traces(dec: IsotypicDecomposition, rho_n: np.ndarray) -> np.ndarray:
    return np.array([np.real(np.vdot(b.projector, rho_n)) for b in dec.blocks])


def _outcome_traces(code: SmearedCode, rho_n: np.ndarray) -> np.ndarray:
    """t[k-1, i-1] = Tr P_i^{(k)} rho_n."""
    bt = _block_traces(code.partitions[0].dec, rho_n)
    return np.array([p.bin_traces(bt) for p in code.partitions])


def average_input(source) -> np.ndarray:
    if isinstance(source, Ensemble):
        return average_state(source).entries
    return np.asarray(source, dtype=complex)


def outcome_distribution(code, source) -> dict[tuple[int, int], float]:
    """P(k, i) = Tr P_i^{(k)} rho_bar^{(x) n} / k_max."""
    code = _coerce(code)
    rho_bar = average_input(source)
    if rho_bar.shape[0] != code.d:
        raise ValueError("source dimension does not match the code")
    t = np.clip(_outcome_traces(code, tensor_power(rho_bar, code.n)), 0.0, None)
    return {(k, i): float(t[k - 1, i - 1] / code.k_max) for k, i in code.outcomes}


def average_error_exact(code, source: Ensemble, cap: int = DEFAULT_CAP,
                        mc_samples: int | None = None, seed: int = 0) -> Estimate:
    """1 - E_seq sum_{k,i} (1/k_max) (Tr P_i^{(k)} rho_seq)^{3/2}."""
    code = _coerce(code)
    states = source.states

    def term(seq):
        t = np.clip(_outcome_traces(code, kron_all([states[j].entries for j in seq])), 0.0, None)
        return 1.0 - float(np.sum(t ** 1.5)) / code.k_max

    return expectation(term, source.probs, code.n, cap, mc_samples, seed)


def sequence_error_definitional(code: SmearedCode, rho: np.ndarray) -> float:
    """sum_w Tr E_w(rho) b^2(rho, E_w(rho)/Tr E_w(rho)) with matrix Bures distances."""
    total = 0.0
    for k, i in code.outcomes:
        P = code.projector(k, i)
        post = P @ rho @ P
        t = float(np.real(np.trace(post)))
        if t <= TINY:
            continue
        total += (t / code.k_max) * bures_sq(rho, post / t)
    return total


def average_error_definitional(code, source: Ensemble, cap: int = DEFAULT_CAP,
                               mc_samples: int | None = None, seed: int = 0) -> Estimate:
    code = _coerce(code)
    states = source.states

    def term(seq):
        return sequence_error_definitional(code, kron_all([states[j].entries for j in seq]))

    return expectation(term, source.probs, code.n, cap, mc_samples, seed)


def jensen_bound(code, source) -> float:
    """1 - sum (1/k_max) (Tr rho_bar^n P)^{3/2}, the convexity bound on the exact error."""
    code = _coerce(code)
    p = np.array(list(outcome_distribution(code, source).values())) * code.k_max
    return 1.0 - float(np.sum(p ** 1.5)) / code.k_max


def coding_length(code, outcome: tuple[int, int]) -> float:
    """ln |Omega| + ln rank P_i^{(k)}, in nats."""
    code = _coerce(code)
    k, i = outcome
    r = code.rank(k, i)
    if r < 1:
        raise ValueError(f"outcome {outcome} has rank 0")
    return math.log(code.omega_size) + math.log(r)


def coding_lengths(code) -> dict[tuple[int, int], float]:
    code = _coerce(code)
    return {w: coding_length(code, w) for w in code.outcomes if code.rank(*w) >= 1}


def overflow_probability(code, source, R: float, dist=None) -> float:
    """P{ coding_length / n >= R }."""
    code = _coerce(code)
    dist = outcome_distribution(code, source) if dist is None else dist
    lens = coding_lengths(code)
    total = sum(dist[w] for w in sorted(lens) if lens[w] / code.n >= R - 1e-15)
    return float(min(1.0, max(0.0, total)))


def simulate_outcomes(code, source: Ensemble, shots: int, seed: int) -> dict[tuple[int, int], float]:
    """Empirical outcome frequencies from sampled sequences, offsets and Born-rule draws."""
    code = _coerce(code)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    seqs = sample_sequences(source.probs, code.n, shots, seed + 1)
    states = source.states
    counts = {w: 0 for w in code.outcomes}
    cache: dict[tuple, np.ndarray] = {}
    for s in seqs:
        key = tuple(s)
        if key not in cache:
            rho = kron_all([states[j].entries for j in key])
            cache[key] = np.array([[np.real(np.trace(code.projector(k, i) @ rho))
                                    for i in range(1, code.l + 1)]
                                   for k in range(1, code.k_max + 1)])
        k = int(rng.integers(1, code.k_max + 1))
        p = np.clip(cache[key][k - 1], 0.0, None)
        i = int(rng.choice(code.l, p=p / p.sum())) + 1
        counts[(k, i)] += 1
    return {w: c / shots for w, c in counts.items()}


@dataclass
class VarlenReport:
    outcome_probs: dict[tuple[int, int], float]
    coding_lengths: dict[tuple[int, int], float]
    average_error_exact: float
    average_error_definitional: float
    jensen: float
    overflow: dict[float, float] = field(default_factory=dict)
    overflow_bounds: dict[float, float] = field(default_factory=dict)
    error_bound: float | None = None


def varlen_report(code, source: Ensemble, Rs: Sequence[float] = (), delta_prime: float | None = None,
                  cap: int = DEFAULT_CAP, definitional: bool = True) -> VarlenReport:
    code = _coerce(code)
    dist = outcome_distribution(code, source)
    a = average_state(source).spectrum()
    exact = average_error_exact(code, source, cap).value
    defin = average_error_definitional(code, source, cap).value if definitional else math.nan
    rep = VarlenReport(dist, coding_lengths(code), exact, defin, jensen_bound(code, source))
    for R in Rs:
        rep.overflow[R] = overflow_probability(code, source, R, dist)
        rep.overflow_bounds[R] = varlen_overflow_bound(code.n, code.d, a, code.delta, R)
    if delta_prime is not None:
        rep.error_bound = varlen_error_bound(code.n, code.d, a, code.delta, delta_prime)
    return rep


def demolition_probe(code_factory, source: Ensemble, ns: Sequence[int]) -> list[float]:
    """Exact average error of ``code_factory(n)`` on ``source`` for each n."""
    return [average_error_exact(code_factory(n), source).value for n in ns]
