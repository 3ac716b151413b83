"""Small-n series behind the trend checks: trace deficiency, fixed-code error, Schmidt error.

Shows the lattice effect: the set of diagrams with H(lambda/n) <= R changes
irregularly with n, so none of these series is monotone at desk scale.

Usage: python scripts/desk_trends.py
"""
from __future__ import annotations

import math

import numpy as np

from qvlcode.entangled import BipartiteEnsemble, BipartiteState, local_fixed_error
from qvlcode.exponents import shannon_entropy
from qvlcode.fixed_code import average_error, make_fixed
from qvlcode.linalg import DensityMatrix, Ensemble
from qvlcode.schur_weyl import rate_projector, spectral_block_weight


def main():
    a = np.array([0.8, 0.2])
    R = shannon_entropy(a) + 0.5 * (math.log(2) - shannon_entropy(a))
    print(f"# diagonal qubit a={a.tolist()}, R={R:.4f}")
    print("n,selected_diagrams,deficiency,fixed_error")
    src = Ensemble.single(DensityMatrix.diag(a))
    for n in range(2, 9):
        P = rate_projector(R, n, 2)
        kept = sum(spectral_block_weight(lam, a) for lam in P.selected)
        err = average_error(make_fixed(R, n, 2), src).value
        sel = " ".join("-".join(map(str, lam)) for lam in P.selected)
        print(f"{n},{sel},{1 - kept:.6f},{err:.6f}")
    print("# Schmidt (0.95, 0.05), R = 0.4")
    print("n,selected_diagrams,error")
    e = BipartiteEnsemble.single(BipartiteState.schmidt([0.95, 0.05]))
    for n in range(2, 9):
        code = make_fixed(0.4, n, 2)
        sel = " ".join("-".join(map(str, lam)) for lam in code.projector.selected)
        print(f"{n},{sel},{local_fixed_error(code, e).value:.6f}")


if __name__ == "__main__":
    main()
