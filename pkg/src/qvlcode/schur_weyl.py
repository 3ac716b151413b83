"""Schur-Weyl isotypic projectors on (C^d)^{(x) n} and the rate projectors built from them.

Pi_lambda = (dim lambda / n!) * sum_pi chi_lambda(pi) U(pi), organized as
sum over cycle types c of chi_lambda(c) * S_c, where S_c is the sum of U(pi)
over every permutation of cycle type c. Characters come from the
Murnaghan-Nakayama rule and are exact integers.
"""
from __future__ import annotations

import math
import os
import threading
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from pathlib import Path

import numpy as np

from .exponents import shannon_entropy
from .linalg import MAX_DIM, MemoryCapError

CACHE_ENV = "QVLCODE_CACHE_DIR"
CACHE_VERSION = 1
# dense projector construction is refused above this dimension (3^7)
PROJECTOR_CAP = 2187
# boundary slack for entropy comparisons against rates
ENTROPY_SLACK = 1e-12

YoungDiagram = tuple  # non-increasing positive ints


def partitions(n: int, d: int | None = None) -> list[tuple[int, ...]]:
    """Partitions of n into at most d parts, lexicographically decreasing."""
    d = n if d is None else d
    out = []

    def rec(rest, maxpart, prefix):
        if rest == 0:
            out.append(tuple(prefix))
            return
        if len(prefix) == d:
            return
        for p in range(min(rest, maxpart), 0, -1):
            prefix.append(p)
            rec(rest - p, p, prefix)
            prefix.pop()

    rec(n, n, [])
    return out


def validate_diagram(lam, d: int | None = None) -> tuple[int, ...]:
    lam = tuple(int(x) for x in lam)
    if not lam or any(x <= 0 for x in lam) or any(a < b for a, b in zip(lam, lam[1:])):
        raise ValueError(f"not a Young diagram: {lam}")
    if d is not None and len(lam) > d:
        raise ValueError(f"diagram {lam} has more than d={d} rows")
    return lam


def hook_length_dim(lam) -> int:
    """Dimension of the S_n irrep via the hook-length formula."""
    lam = validate_diagram(lam)
    n = sum(lam)
    conj = [sum(1 for r in lam if r > j) for j in range(lam[0])]
    hooks = 1
    for i, row in enumerate(lam):
        for j in range(row):
            hooks *= (row - j - 1) + (conj[j] - i - 1) + 1
    return math.factorial(n) // hooks


def weyl_dim(lam, d: int) -> int:
    """Dimension of the U(d) irrep with highest weight lambda."""
    lam = list(validate_diagram(lam, d)) + [0] * (d - len(lam))
    num, den = 1, 1
    for i in range(d):
        for j in range(i + 1, d):
            num *= lam[i] - lam[j] + j - i
            den *= j - i
    return num // den


def _rim_hooks(lam: tuple[int, ...], r: int):
    """Yield (diagram after removing a rim hook of size r, leg length)."""
    # beta-set: removing an r-rim hook = moving a bead from b to b - r
    L = len(lam)
    beta = [lam[i] + (L - 1 - i) for i in range(L)]
    bset = set(beta)
    for b in beta:
        nb = b - r
        if nb < 0 or nb in bset:
            continue
        leg = sum(1 for x in beta if nb < x < b)
        new = sorted([x for x in beta if x != b] + [nb], reverse=True)
        parts = [new[i] - (L - 1 - i) for i in range(L)]
        yield tuple(p for p in parts if p > 0), leg


@lru_cache(maxsize=None)
def sn_character(lam: tuple[int, ...], cycle_type: tuple[int, ...]) -> int:
    """chi_lambda on the class with the given cycle type (Murnaghan-Nakayama)."""
    lam = tuple(lam)
    cycle_type = tuple(sorted(cycle_type, reverse=True))
    if sum(lam) != sum(cycle_type):
        raise ValueError("diagram and class are partitions of different n")
    if not cycle_type:
        return 1
    r, rest = cycle_type[0], cycle_type[1:]
    total = 0
    for mu, leg in _rim_hooks(lam, r):
        total += (-1) ** leg * sn_character(mu, rest)
    return total


def cycle_type(perm) -> tuple[int, ...]:
    n = len(perm)
    seen = [False] * n
    lens = []
    for i in range(n):
        if not seen[i]:
            c, j = 0, i
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                c += 1
            lens.append(c)
    return tuple(sorted(lens, reverse=True))


def permutation_indices(perm, d: int) -> np.ndarray:
    """Index map of U(pi): basis index x goes to out[x].

    U(pi) sends the tensor factor in slot j to slot perm[j].
    """
    n = len(perm)
    if d ** n > MAX_DIM:
        raise MemoryCapError(f"d^n = {d ** n} exceeds cap {MAX_DIM}")
    idx = np.arange(d ** n).reshape((d,) * n)
    # out[..i_{perm[j]} = i_j..]: factor j moves to position perm[j]
    inv = np.argsort(perm)
    moved = np.transpose(idx, axes=inv)
    out = np.empty(d ** n, dtype=np.int64)
    out[moved.ravel()] = np.arange(d ** n)
    return out


def permutation_operator(perm, d: int) -> np.ndarray:
    """Unitary 0/1 matrix permuting tensor factors: slot j goes to slot perm[j]."""
    perm = tuple(perm)
    if sorted(perm) != list(range(len(perm))):
        raise ValueError(f"not a permutation: {perm}")
    out = permutation_indices(perm, d)
    N = d ** len(perm)
    U = np.zeros((N, N))
    U[out, np.arange(N)] = 1.0
    return U


def class_sums(n: int, d: int) -> dict[tuple[int, ...], np.ndarray]:
    """S_c = sum of U(pi) over permutations of cycle type c (real count matrices)."""
    N = d ** n
    if N > PROJECTOR_CAP:
        raise MemoryCapError(f"d^n = {N} exceeds projector cap {PROJECTOR_CAP}")
    acc = defaultdict(lambda: np.zeros((N, N)))
    cols = np.arange(N)
    for perm in permutations(range(n)):
        ct = cycle_type(perm)
        acc[ct][permutation_indices(perm, d), cols] += 1.0
    return dict(acc)


def isotypic_projector(lam, d: int, sums: dict | None = None) -> np.ndarray:
    lam = validate_diagram(lam, d)
    n = sum(lam)
    S = class_sums(n, d) if sums is None else sums
    P = sum(sn_character(lam, c) * M for c, M in S.items())
    return P * (hook_length_dim(lam) / math.factorial(n))


def complete_homogeneous(x, kmax: int) -> np.ndarray:
    """h_0..h_kmax of the variables x (coefficients of prod 1/(1 - x_i t))."""
    h = np.zeros(kmax + 1)
    h[0] = 1.0
    for xi in np.asarray(x, dtype=float):
        for k in range(1, kmax + 1):
            h[k] += xi * h[k - 1]
    return h


def schur_polynomial(lam, x) -> float:
    """s_lambda(x) by the Jacobi-Trudi determinant det(h_{lambda_i - i + j})."""
    lam = validate_diagram(lam)
    m = len(lam)
    h = complete_homogeneous(x, sum(lam))
    M = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            k = lam[i] - i + j
            M[i, j] = h[k] if 0 <= k < len(h) else 0.0
    return float(np.linalg.det(M))


def spectral_block_weight(lam, spectrum) -> float:
    """Tr Pi_lambda rho^{(x) n} = f^lambda s_lambda(spectrum of rho), no matrices."""
    return hook_length_dim(lam) * schur_polynomial(lam, spectrum)


def diagram_entropy(lam) -> float:
    lam = validate_diagram(lam)
    n = sum(lam)
    return shannon_entropy(np.array(lam, dtype=float) / n)


@dataclass(frozen=True, eq=False)
class IsotypicBlock:
    lam: tuple[int, ...]
    projector: np.ndarray
    rank: int
    entropy: float


@dataclass(frozen=True, eq=False)
class IsotypicDecomposition:
    n: int
    d: int
    blocks: tuple[IsotypicBlock, ...]

    def block(self, lam) -> IsotypicBlock:
        lam = tuple(lam)
        for b in self.blocks:
            if b.lam == lam:
                return b
        raise KeyError(lam)

    def traces(self, rho_n: np.ndarray) -> dict[tuple[int, ...], float]:
        """Tr Pi_lambda rho_n for every block."""
        rho_n = np.asarray(rho_n)
        return {b.lam: float(np.real(np.vdot(b.projector, rho_n))) for b in self.blocks}


_lock = threading.Lock()
_memo: dict[tuple[int, int], IsotypicDecomposition] = {}


def _cache_path(n: int, d: int) -> Path | None:
    root = os.environ.get(CACHE_ENV)
    if not root:
        return None
    return Path(root) / f"isotypic_v{CACHE_VERSION}_n{n}_d{d}.npz"


def _build(n: int, d: int) -> IsotypicDecomposition:
    blocks = []
    sums = class_sums(n, d)
    for lam in partitions(n, d):
        P = isotypic_projector(lam, d, sums)
        rank = hook_length_dim(lam) * weyl_dim(lam, d)
        blocks.append(IsotypicBlock(lam, P, rank, diagram_entropy(lam)))
    return IsotypicDecomposition(n, d, tuple(blocks))


def _load(path: Path, n: int, d: int) -> IsotypicDecomposition | None:
    try:
        with np.load(path, allow_pickle=False) as z:
            if int(z["version"]) != CACHE_VERSION:
                return None
            blocks = []
            for lam in partitions(n, d):
                key = "_".join(map(str, lam))
                P = z[f"P_{key}"]
                blocks.append(IsotypicBlock(lam, P, hook_length_dim(lam) * weyl_dim(lam, d),
                                            diagram_entropy(lam)))
            return IsotypicDecomposition(n, d, tuple(blocks))
    except (OSError, KeyError, ValueError):
        return None


def save_decomposition(dec: IsotypicDecomposition, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = {f"P_{'_'.join(map(str, b.lam))}": b.projector for b in dec.blocks}
    tmp = path.with_suffix(".tmp.npz")
    np.savez_compressed(tmp, version=CACHE_VERSION, **arrays)
    os.replace(tmp, path)


def decomposition(n: int, d: int) -> IsotypicDecomposition:
    """Isotypic decomposition of (C^d)^{(x) n}, memoized and optionally disk-cached."""
    if n < 1 or d < 2:
        raise ValueError("need n >= 1 and d >= 2")
    key = (n, d)
    dec = _memo.get(key)
    if dec is not None:
        return dec
    with _lock:
        dec = _memo.get(key)
        if dec is not None:
            return dec
        path = _cache_path(n, d)
        if path is not None and path.exists():
            dec = _load(path, n, d)
        if dec is None:
            dec = _build(n, d)
            if path is not None:
                save_decomposition(dec, path)
        for b in dec.blocks:
            b.projector.setflags(write=False)
        _memo[key] = dec
        return dec


def clear_memory_cache():
    with _lock:
        _memo.clear()


@dataclass(frozen=True, eq=False)
class RateProjector:
    R: float
    n: int
    d: int
    projector: np.ndarray
    rank: int
    selected: tuple[tuple[int, ...], ...]


def rate_projector(R: float, n: int, d: int) -> RateProjector:
    """P_{R,n}: sum of Pi_lambda over diagrams with H(lambda/n) <= R."""
    if not 0 <= R <= math.log(d) + ENTROPY_SLACK:
        raise ValueError(f"R={R} outside [0, ln d]")
    dec = decomposition(n, d)
    sel = [b for b in dec.blocks if b.entropy <= R + ENTROPY_SLACK]
    N = d ** n
    P = np.zeros((N, N))
    for b in sel:
        P = P + b.projector
    P.setflags(write=False)
    return RateProjector(R, n, d, P, sum(b.rank for b in sel), tuple(b.lam for b in sel))
