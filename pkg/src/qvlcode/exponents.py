"""Classical entropy, divergence, the overflow exponent and the bound formulas.

The overflow exponent is ``inf { D(b||a) : H(b) >= R }``. It is computed two ways:

* a fast path along the tilted family ``b_beta ~ a**beta`` (bisection on beta), and
* a reference oracle: a grid over the simplex, each grid point pushed radially
  from the uniform distribution onto the level set ``H = R``, then zoomed.

The oracle is the contract; the fast path is used only when both agree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

AGREE_TOL = 1e-4
DEFAULT_STEP = {2: 1e-3, 3: 5e-3}


@dataclass(frozen=True, eq=False)
class ProbVector:
    probs: np.ndarray

    def __init__(self, probs):
        p = np.array(probs, dtype=float).ravel()
        if p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"not a probability vector: {probs!r}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return self.probs.size

    def __array__(self, dtype=None, copy=None):
        return self.probs if dtype is None else self.probs.astype(dtype)

    def __repr__(self):
        return f"ProbVector({self.probs.tolist()})"


@dataclass(frozen=True)
class ExponentResult:
    value: float
    argmin: ProbVector | None
    method: str  # "fast-path", "grid-oracle" or "trivial"
    resolution: float = field(default=0.0)


def _p(b) -> np.ndarray:
    return np.asarray(b, dtype=float)


def shannon_entropy(b) -> float:
    b = _p(b)
    nz = b[b > 0]
    return float(-np.sum(nz * np.log(nz)))


def relative_entropy(b, a) -> float:
    b, a = _p(b), _p(a)
    if b.shape != a.shape:
        raise ValueError("length mismatch")
    s = b > 0
    if np.any(a[s] <= 0):
        return math.inf
    return max(0.0, float(np.sum(b[s] * np.log(b[s] / a[s]))))


def _entropy_rows(B: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(B > 0, B * np.log(np.where(B > 0, B, 1.0)), 0.0)
    return -t.sum(axis=-1)


def _divergence_rows(B: np.ndarray, a: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        loga = np.where(a > 0, np.log(np.where(a > 0, a, 1.0)), -np.inf)
        logb = np.log(np.where(B > 0, B, 1.0))
        t = np.where(B > 0, B * (logb - loga), 0.0)
    return np.maximum(t.sum(axis=-1), 0.0)


@lru_cache(maxsize=16)
def simplex_grid(d: int, m: int) -> np.ndarray:
    """All points of the d-simplex with coordinates in (1/m)Z, in decreasing lexicographic order."""
    if d == 1:
        return np.ones((1, 1))
    if d == 2:
        t = np.arange(m + 1)[::-1] / m
        return np.stack([t, 1 - t], axis=1)
    rows = []
    for first in range(m, -1, -1):
        rest = simplex_grid(d - 1, m - first) if m - first > 0 else np.zeros((1, d - 1))
        if m - first > 0:
            rest = rest * (m - first) / m
        rows.append(np.column_stack([np.full(len(rest), first / m), rest]))
    out = np.vstack(rows)
    out.setflags(write=False)
    return out


def _tilted(a: np.ndarray, beta: float) -> np.ndarray:
    s = a > 0
    logw = np.where(s, beta * np.log(np.where(s, a, 1.0)), -np.inf)
    w = np.exp(logw - logw[s].max())
    return w / w.sum()


def _fast_path(a: np.ndarray, R: float) -> tuple[float, np.ndarray]:
    f = lambda beta: shannon_entropy(_tilted(a, beta)) - R
    beta = brentq(f, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    b = _tilted(a, beta)
    return relative_entropy(b, a), b


def _radial_to_level(P: np.ndarray, R: float, iters: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Push each row of P along the ray from the uniform point onto H = R.

    H is concave with its maximum at the uniform point, so it is nonincreasing
    along each ray; bisection on the ray parameter is exact up to ``iters``.
    Rows whose ray never reaches H = R inside the simplex are flagged invalid.
    """
    d = P.shape[1]
    u = np.full(d, 1.0 / d)
    D = P - u
    with np.errstate(divide="ignore", invalid="ignore"):
        neg = np.where(D < 0, -u / np.where(D < 0, D, -1.0), np.inf)
    tmax = neg.min(axis=1)
    finite = np.isfinite(tmax)
    tmax = np.where(finite, tmax, 0.0)
    valid = finite & (_entropy_rows(u + tmax[:, None] * D) <= R)
    lo = np.zeros(len(P))
    hi = np.where(valid, tmax, 0.0)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        above = _entropy_rows(u + mid[:, None] * D) >= R
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    B = u + lo[:, None] * D
    B = np.clip(B, 0.0, None)
    B /= B.sum(axis=1, keepdims=True)
    return B, valid


def _argmin_lex(vals: np.ndarray, B: np.ndarray) -> int:
    best = vals.min()
    idx = np.flatnonzero(vals <= best)
    if len(idx) == 1:
        return int(idx[0])
    # lexicographically smallest argmin on equal values
    order = np.lexsort(B[idx].T[::-1])
    return int(idx[order[0]])


def grid_oracle(a, R: float, step: float | None = None, zoom: int = 3) -> tuple[float, np.ndarray]:
    """Constrained minimum of D(.||a) over {H >= R} by radial-projected grid search."""
    a = _p(a)
    d = a.size
    step = DEFAULT_STEP.get(d, 2e-2) if step is None else step
    if shannon_entropy(a) >= R:
        return 0.0, a.copy()
    if R > math.log(d) + 1e-12:
        raise ValueError(f"R={R} exceeds ln d")
    if abs(R - math.log(d)) <= 1e-12:
        u = np.full(d, 1.0 / d)
        return relative_entropy(u, a), u
    m = max(1, int(round(1.0 / step)))
    P = np.asarray(simplex_grid(d, m))
    B, valid = _radial_to_level(P, R)
    vals = np.where(valid, _divergence_rows(B, a), np.inf)
    i = _argmin_lex(vals, B)
    best_b, best_v = B[i], vals[i]
    # zoom: local grid of half-width 2 steps around the incumbent, shrinking
    h = 1.0 / m
    rng_off = np.linspace(-2.0, 2.0, 21)
    for _ in range(zoom):
        h /= 5.0
        offs = np.array(np.meshgrid(*([rng_off] * (d - 1)), indexing="ij")).reshape(d - 1, -1).T
        cand = np.empty((len(offs), d))
        cand[:, : d - 1] = best_b[: d - 1] + offs * h * 5.0
        cand[:, d - 1] = 1.0 - cand[:, : d - 1].sum(axis=1)
        keep = np.all(cand >= 0, axis=1)
        if not keep.any():
            break
        Bz, vz = _radial_to_level(cand[keep], R)
        vals_z = np.where(vz, _divergence_rows(Bz, a), np.inf)
        j = _argmin_lex(vals_z, Bz)
        if vals_z[j] < best_v:
            best_b, best_v = Bz[j], vals_z[j]
    return float(best_v), best_b


def overflow_exponent(a, R: float, step: float | None = None, check: bool = True) -> ExponentResult:
    """inf_{H(b) >= R} D(b||a) in nats.

    Returns 0 with ``argmin = a`` when ``H(a) >= R``. Otherwise the tilted-family
    value is returned if it matches the grid oracle within ``AGREE_TOL``, else
    the oracle value. With ``check=False`` the oracle is skipped.
    """
    a = _p(a)
    d = a.size
    if R > math.log(d) + 1e-12:
        raise ValueError(f"R={R} exceeds ln d={math.log(d)}")
    if shannon_entropy(a) >= R:
        return ExponentResult(0.0, ProbVector(a), "trivial")
    supp = a > 0
    if R > math.log(int(supp.sum())) + 1e-12:
        # every feasible b leaves the support of a
        return ExponentResult(math.inf, None, "trivial")
    v_fast, b_fast = _fast_path(a, R)
    if not check:
        return ExponentResult(v_fast, ProbVector(b_fast), "fast-path")
    step = DEFAULT_STEP.get(d, 2e-2) if step is None else step
    v_grid, b_grid = grid_oracle(a, R, step)
    if abs(v_fast - v_grid) <= AGREE_TOL:
        return ExponentResult(v_fast, ProbVector(b_fast), "fast-path", step)
    return ExponentResult(v_grid, ProbVector(b_grid), "grid-oracle", step)


def exponent_value(a, R: float, check: bool = False) -> float:
    """overflow_exponent extended to any real R: 0 below H(a), +inf above ln d."""
    a = _p(a)
    if R <= shannon_entropy(a):
        return 0.0
    if R > math.log(a.size) + 1e-12:
        return math.inf
    return overflow_exponent(a, min(R, math.log(a.size)), check=check).value


def constant_C(a, step: float | None = None, band: float = 1e-6) -> float:
    """min_b D(b||a) / (H(a) - H(b))^2 over a simplex grid, excluding |dH| < band."""
    a = _p(a)
    d = a.size
    step = {2: 1e-4, 3: 2e-3}.get(d, 2e-2) if step is None else step
    m = max(1, int(round(1.0 / step)))
    B = np.asarray(simplex_grid(d, m))
    dH = shannon_entropy(a) - _entropy_rows(B)
    keep = np.abs(dH) >= band
    ratio = _divergence_rows(B[keep], a) / dH[keep] ** 2
    return float(ratio.min())


def poly_factor(n: int, d: int) -> float:
    """(n+d)^{4d}, the universal polynomial prefactor."""
    return float(n + d) ** (4 * d)


def log_poly_factor(n: int, d: int) -> float:
    return 4 * d * math.log(n + d)


def f_overhead(n: int, delta: float, d: int) -> float:
    kmax = math.floor(n * delta)
    if kmax < 1:
        raise ValueError(f"n*delta = {n * delta} < 1")
    return delta + log_poly_factor(n, d) - math.log(kmax * (math.log(d) / delta + 1))


def _bounded_exp(logv: float) -> float:
    return math.exp(logv) if logv < 700 else math.inf


def rank_bound(n: int, d: int, R: float) -> float:
    return _bounded_exp(log_poly_factor(n, d) + n * R)


def trace_bound(n: int, d: int, a, R: float) -> float:
    """Bound on 1 - Tr P_{R,n} rho^{(x)n} for rho with spectrum a."""
    e = exponent_value(a, R)
    if math.isinf(e):
        return 0.0
    return _bounded_exp(log_poly_factor(n, d) - n * e)


def fixed_error_bound(n: int, d: int, a, R: float) -> float:
    return 2.0 * trace_bound(n, d, a, R)


def varlen_error_bound(n: int, d: int, a, delta: float, delta_prime: float, C: float | None = None) -> float:
    """Average-error bound of the smeared code.

    ``1 - (floor(n(delta-2delta'))/floor(n delta)) * (1 - (n+d)^{4d} e^{-n C delta'^2})^{3/2}``.
    The inner base is floored at 0: the per-bin trace it bounds is nonnegative.
    """
    if not 0 < 2 * delta_prime < delta:
        raise ValueError("need 0 < 2 delta' < delta")
    kmax = math.floor(n * delta)
    if kmax < 1:
        raise ValueError(f"n*delta = {n * delta} < 1")
    C = constant_C(a) if C is None else C
    x = _bounded_exp(log_poly_factor(n, d) - n * C * delta_prime ** 2)
    good = math.floor(n * (delta - 2 * delta_prime))
    return 1.0 - (good / kmax) * max(0.0, 1.0 - x) ** 1.5


def varlen_overflow_bound(n: int, d: int, a, delta: float, R: float) -> float:
    e = exponent_value(a, R - f_overhead(n, delta, d) / n)
    if math.isinf(e):
        return 0.0
    return _bounded_exp(log_poly_factor(n, d) - n * e)


def schedule(n: int) -> tuple[float, float]:
    """(delta_n, delta'_n) = (n^{-1/6}, n^{-1/3})."""
    if n < 1:
        raise ValueError("n must be positive")
    return n ** (-1 / 6), n ** (-1 / 3)
