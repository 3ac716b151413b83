"""Naive-code demolition versus smearing at large n, qubit diagonal source.

For d = 2 the block weights Tr Pi_lambda rho^{(x)n} have a closed form, so no
projector is ever built and n can reach the thousands:

    s_(l1,l2)(x, y) = (xy)^l2 (x^(m+1) - y^(m+1)) / (x - y),  m = l1 - l2,

with the hook-length dimension computed through log-gamma.

Usage: python scripts/demolition_asymptotics.py [--q 0.8] [--ns 8 16 ... 1024]
"""
from __future__ import annotations

import argparse
import math

import numpy as np
from scipy.special import gammaln

from qvlcode.exponents import shannon_entropy
from qvlcode.schur_weyl import diagram_entropy, partitions
from qvlcode.varlen import RateGrid, reconcile_delta, smeared_grid


def block_weights(a, n):
    x, y = sorted(a, reverse=True)
    out = {}
    for lam in partitions(n, 2):
        l1, l2 = lam[0], (lam[1] if len(lam) > 1 else 0)
        m = l1 - l2
        log_f = gammaln(n + 1) - gammaln(l1 + 2) - gammaln(l2 + 1) + math.log(m + 1)
        r = y / x
        log_s = l2 * math.log(x * y) + m * math.log(x)
        log_s += math.log((m + 1) if r == 1 else (1 - r ** (m + 1)) / (1 - r))
        out[lam] = math.exp(log_f + log_s)
    return out


def error(grids, weights):
    total = 0.0
    for g in grids:
        t = np.zeros(g.l)
        for lam, w in weights.items():
            t[g.bin_of(diagram_entropy(lam))] += w
        total += float(np.sum(t ** 1.5))
    return 1.0 - total / len(grids)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", type=float, default=0.8)
    ap.add_argument("--ns", type=int, nargs="+", default=[8, 16, 32, 64, 128, 256, 512, 1024])
    args = ap.parse_args()
    a = (args.q, 1 - args.q)
    H, L = shannon_entropy(a), math.log(2)
    print(f"# source spectrum {a}, H = {H:.6f} nats; smeared delta_n = n^(-1/6)")
    print("n,boundary,interior,smeared,l,k_max")
    for n in args.ns:
        w = block_weights(a, n)
        b = error([RateGrid([0, H, L])], w)
        i = error([RateGrid([0, (H + L) / 2, L])], w)
        delta, l = reconcile_delta(n ** (-1 / 6), 2)
        k_max = math.floor(n * delta)
        s = error([smeared_grid(k, n, delta, l, 2) for k in range(1, k_max + 1)], w)
        print(f"{n},{b:.6f},{i:.6f},{s:.6f},{l},{k_max}")


if __name__ == "__main__":
    main()
