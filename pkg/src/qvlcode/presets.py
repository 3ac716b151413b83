"""Named sources and the JSON state encoding (matrices as nested [re, im] pairs)."""
from __future__ import annotations

import math

import numpy as np

from .entangled import BipartiteEnsemble, BipartiteState
from .linalg import DensityMatrix, Ensemble


def decode_matrix(rows) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("matrix must be a nested list of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def pure_qubit_pair(theta: float = math.pi / 4, p: float = 0.5) -> Ensemble:
    """|0> with probability p and cos(theta)|0> + sin(theta)|1> otherwise."""
    a = DensityMatrix.pure([1, 0])
    b = DensityMatrix.pure([math.cos(theta), math.sin(theta)])
    return Ensemble([(p, a), (1 - p, b)])


def diagonal_qubit(q: float = 0.8) -> Ensemble:
    return Ensemble.single(DensityMatrix.diag([q, 1 - q]))


def bell() -> BipartiteEnsemble:
    return BipartiteEnsemble.single(BipartiteState.schmidt([0.5, 0.5]))


def schmidt(q: float = 0.95) -> BipartiteEnsemble:
    return BipartiteEnsemble.single(BipartiteState.schmidt([q, 1 - q]))


PLAIN = {"pure-qubit-pair": pure_qubit_pair, "diagonal-qubit": diagonal_qubit}
BIPARTITE = {"bell": bell, "schmidt": schmidt}


def build_source(block: dict, bipartite: bool):
    """Ensemble (or BipartiteEnsemble when ``bipartite``) from a config source block."""
    if "preset" in block:
        name, params = block["preset"], block.get("params", {})
        if name in BIPARTITE:
            if not bipartite:
                raise ValueError(f"preset {name!r} is bipartite; use an entangled mode")
            return BIPARTITE[name](**params)
        if name in PLAIN:
            ens = PLAIN[name](**params)
            if bipartite:
                return BipartiteEnsemble([(p, BipartiteState(s, s.dim, 1)) for p, s in ens.items])
            return ens
        raise ValueError(f"unknown preset {name!r}")
    items = [(it["prob"], decode_matrix(it["matrix"])) for it in block["states"]]
    if bipartite:
        dA, dB = block["dimA"], block["dimB"]
        return BipartiteEnsemble([(p, BipartiteState(m, dA, dB)) for p, m in items])
    return Ensemble(items)
