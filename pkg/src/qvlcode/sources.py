"""Expansion of an i.i.d. source p^n into weighted product sequences.

Every code in this package commutes with permutations of the tensor factors
(the projectors are built from S_n class sums and the pad vector is |0...0>),
so the per-sequence error depends only on the multiset of members drawn. Exact
expansion therefore runs over type classes with multinomial weights; beyond the
sequence cap a seeded Monte Carlo sample of sequences is used instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Iterator

import numpy as np

DEFAULT_CAP = 4096
DEFAULT_MC_SAMPLES = 10_000


class ExpansionCapError(RuntimeError):
    """|source|^n exceeds the exact-expansion cap and Monte Carlo is disabled."""


@dataclass(frozen=True)
class Estimate:
    """A value with its Monte Carlo standard error (0 for exact expansions)."""

    value: float
    stderr: float = 0.0
    samples: int | None = None

    @property
    def exact(self) -> bool:
        return self.samples is None

    def __float__(self):
        return float(self.value)


def multinomial(counts) -> float:
    n = sum(counts)
    out = math.factorial(n)
    for c in counts:
        out //= math.factorial(c)
    return float(out)


def type_classes(probs, n: int) -> Iterator[tuple[float, tuple[int, ...]]]:
    """Yield (p^n mass of the class, representative index sequence), sorted order."""
    probs = np.asarray(probs, dtype=float)
    m = len(probs)
    for seq in combinations_with_replacement(range(m), n):
        counts = np.bincount(seq, minlength=m)
        w = multinomial(counts) * float(np.prod(probs ** counts))
        if w > 0:
            yield w, seq


def sample_sequences(probs, n: int, samples: int, seed: int) -> np.ndarray:
    """Seeded i.i.d. draws of index sequences, shape (samples, n)."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return rng.choice(len(probs), size=(samples, n), p=np.asarray(probs))


def expectation(term, probs, n: int, cap: int = DEFAULT_CAP,
                mc_samples: int | None = None, seed: int = 0) -> Estimate:
    """E_{p^n}[term(seq)], exact over type classes when len(probs)^n <= cap."""
    if len(probs) ** n <= cap:
        total = 0.0
        for w, seq in type_classes(probs, n):
            total += w * term(seq)
        return Estimate(total)
    if not mc_samples:
        raise ExpansionCapError(f"{len(probs)}^{n} sequences exceed cap {cap}")
    seqs = sample_sequences(probs, n, mc_samples, seed)
    vals = np.array([term(tuple(sorted(s))) for s in seqs])
    return Estimate(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(len(vals))), len(vals))
