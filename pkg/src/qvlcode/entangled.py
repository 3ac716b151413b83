"""Codes acting only on Alice's side of shared bipartite states.

Joint states of n copies live on (A B)^{(x) n} in the natural product order. The
codes act on A^{(x) n}, so joint operators are built in the block order
A^{(x) n} (x) B^{(x) n}; ``to_block_order`` is the explicit permutation between
the two orderings.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exponents import varlen_error_bound, varlen_overflow_bound
from .fixed_code import FixedLengthCode
from .linalg import (
    DensityMatrix,
    Ensemble,
    MemoryCapError,
    MAX_DIM,
    average_state,
    bures_sq,
    kron_all,
    partial_trace_B,
    tensor_power,
)
from .schur_weyl import RateProjector
from .sources import DEFAULT_CAP, Estimate, expectation
from .varlen import (
    TINY,
    SmearedCode,
    VarlenReport,
    _coerce,
    _outcome_traces,
    coding_lengths,
    outcome_distribution,
    overflow_probability,
)


@dataclass(frozen=True, eq=False)
class BipartiteState:
    dimA: int
    dimB: int
    state: DensityMatrix

    def __init__(self, state, dimA: int, dimB: int):
        st = state if isinstance(state, DensityMatrix) else DensityMatrix(state)
        if st.dim != dimA * dimB:
            raise ValueError(f"state of dimension {st.dim} is not {dimA}x{dimB}")
        object.__setattr__(self, "dimA", int(dimA))
        object.__setattr__(self, "dimB", int(dimB))
        object.__setattr__(self, "state", st)

    @classmethod
    def pure(cls, psi, dimA: int, dimB: int) -> "BipartiteState":
        return cls(DensityMatrix.pure(psi), dimA, dimB)

    @classmethod
    def schmidt(cls, coeffs_sq: Sequence[float], dimA: int | None = None) -> "BipartiteState":
        """sum_i sqrt(c_i) |i>|i>."""
        c = np.asarray(coeffs_sq, dtype=float)
        dA = len(c) if dimA is None else dimA
        psi = np.zeros(dA * dA, dtype=complex)
        for i, ci in enumerate(c):
            psi[i * dA + i] = math.sqrt(ci)
        return cls.pure(psi, dA, dA)

    @property
    def reduced_A(self) -> np.ndarray:
        return partial_trace_B(self.state.entries, self.dimA, self.dimB)

    def is_pure(self, tol: float = 1e-10) -> bool:
        return self.state.purity() >= 1 - tol


@dataclass(frozen=True, eq=False)
class BipartiteEnsemble:
    items: tuple

    def __init__(self, items):
        items = tuple((float(p), s) for p, s in items)
        if not items:
            raise ValueError("ensemble is empty")
        dims = {(s.dimA, s.dimB) for _, s in items}
        if len(dims) != 1:
            raise ValueError(f"members have different factorizations {sorted(dims)}")
        probs = np.array([p for p, _ in items])
        if np.any(probs < 0) or abs(probs.sum() - 1) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "items", items)

    @property
    def dimA(self) -> int:
        return self.items[0][1].dimA

    @property
    def dimB(self) -> int:
        return self.items[0][1].dimB

    @property
    def probs(self) -> np.ndarray:
        return np.array([p for p, _ in self.items])

    @property
    def states(self) -> list[BipartiteState]:
        return [s for _, s in self.items]

    def joint(self) -> Ensemble:
        return Ensemble([(p, s.state) for p, s in self.items])

    def reduced(self) -> Ensemble:
        """Ensemble of Alice's reduced states (same probabilities)."""
        return Ensemble([(p, DensityMatrix(s.reduced_A)) for p, s in self.items])

    @classmethod
    def single(cls, state: BipartiteState) -> "BipartiteEnsemble":
        return cls([(1.0, state)])


def block_order_perm(dimA: int, dimB: int, n: int) -> np.ndarray:
    """perm[x] = index in A^n B^n order of the (AB)^n-order basis index x."""
    shape = (dimA, dimB) * n
    idx = np.arange((dimA * dimB) ** n).reshape(shape)
    # axes (A1, B1, A2, B2, ...) -> (A1..An, B1..Bn)
    order = [2 * j for j in range(n)] + [2 * j + 1 for j in range(n)]
    blocked = np.transpose(idx, order).ravel()
    perm = np.empty_like(blocked)
    perm[blocked] = np.arange(blocked.size)
    return perm


def to_block_order(x: np.ndarray, dimA: int, dimB: int, n: int) -> np.ndarray:
    """Reorder a vector or matrix from (AB)^{(x)n} to A^{(x)n} (x) B^{(x)n}."""
    perm = block_order_perm(dimA, dimB, n)
    inv = np.argsort(perm)
    if x.ndim == 1:
        return x[inv]
    return x[np.ix_(inv, inv)]


def from_block_order(x: np.ndarray, dimA: int, dimB: int, n: int) -> np.ndarray:
    perm = block_order_perm(dimA, dimB, n)
    if x.ndim == 1:
        return x[perm]
    return x[np.ix_(perm, perm)]


def reduced_spectrum(e: BipartiteEnsemble) -> np.ndarray:
    """Eigenvalues of Tr_B of the average state, descending."""
    avg = average_state(e.joint())
    red = partial_trace_B(avg.entries, e.dimA, e.dimB)
    w = np.linalg.eigvalsh(0.5 * (red + red.conj().T))[::-1]
    return np.clip(w, 0.0, None)


def entanglement_entropy(phi: BipartiteState) -> float:
    """H(Tr_B phi) for a pure bipartite state."""
    if not phi.is_pure():
        raise ValueError("entanglement entropy is only defined here for pure states")
    w = np.linalg.eigvalsh(phi.reduced_A)
    w = w[w > 1e-15]
    return float(-np.sum(w * np.log(w)))


def tensor_power_bipartite(phi: BipartiteState, n: int) -> BipartiteState:
    """phi^{(x)n} as a bipartite state on A^n : B^n."""
    m = to_block_order(tensor_power(phi.state.entries, n), phi.dimA, phi.dimB, n)
    return BipartiteState(m, phi.dimA ** n, phi.dimB ** n)


def _joint_sequence(states: list[BipartiteState], seq, n: int) -> np.ndarray:
    s0 = states[0]
    N = (s0.dimA * s0.dimB) ** n
    if N > MAX_DIM:
        raise MemoryCapError(f"joint dimension {N} exceeds cap {MAX_DIM}")
    m = kron_all([states[j].state.entries for j in seq])
    return to_block_order(m, s0.dimA, s0.dimB, n)


def _joint_pure_sequence(states: list[BipartiteState], seq, n: int) -> np.ndarray:
    vecs = []
    for j in seq:
        w, v = np.linalg.eigh(states[j].state.entries)
        vecs.append(v[:, -1])
    psi = vecs[0]
    for v in vecs[1:]:
        psi = np.kron(psi, v)
    s0 = states[0]
    return to_block_order(psi, s0.dimA, s0.dimB, n)


def local_encode_decode(code: FixedLengthCode, rho: np.ndarray, dimB_n: int) -> np.ndarray:
    """(D o E (x) id_B)(rho) for rho in A^n B^n order."""
    NA = code.P.shape[0]
    P = code.P
    r = rho.reshape(NA, dimB_n, NA, dimB_n)
    kept = np.einsum("ab,bjck,cd->ajdk", P, r, P)
    Q = np.eye(NA) - P
    # Tr_A[(Q (x) I) rho] as a B-operator
    rest = np.einsum("ab,bjak->jk", Q, r)
    v = code.pad
    pad = np.einsum("a,c,jk->ajck", v, v.conj(), rest)
    return (kept + pad).reshape(NA * dimB_n, NA * dimB_n)


def _pure_local_fidelity(code: FixedLengthCode, psi: np.ndarray, dimB_n: int) -> float:
    """<psi| (D o E (x) id)(|psi><psi|) |psi> for a block-ordered pure vector."""
    NA = code.P.shape[0]
    M = psi.reshape(NA, dimB_n)
    PM = code.P @ M
    t = float(np.real(np.vdot(M, PM)))
    QM = M - PM
    X = QM.T @ M.conj()  # X[j, k] = sum_a (QM)[a, j] conj(M[a, k])
    y = code.pad.conj() @ M
    pad_term = float(np.real(y.conj() @ X @ y))
    return t * t + pad_term


def local_fixed_error(code: FixedLengthCode, e: BipartiteEnsemble, cap: int = DEFAULT_CAP,
                      pure_shortcut: bool | None = None) -> Estimate:
    """Average b^2(rho_seq, (D o E (x) id_B)(rho_seq)) over p^n.

    Pure members use the vector identity Tr|sqrt(psi) sqrt(sigma)| = sqrt(<psi|sigma|psi>),
    which keeps large joint dimensions cheap.
    """
    if e.dimA != code.d:
        raise ValueError("code dimension does not match Alice's system")
    n = code.n
    states = e.states
    dimB_n = e.dimB ** n
    if pure_shortcut is None:
        pure_shortcut = all(s.is_pure() for s in states)

    if pure_shortcut:
        def term(seq):
            psi = _joint_pure_sequence(states, seq, n)
            F = _pure_local_fidelity(code, psi, dimB_n)
            return max(0.0, 1.0 - math.sqrt(max(F, 0.0)))
    else:
        def term(seq):
            rho = _joint_sequence(states, seq, n)
            return bures_sq(rho, local_encode_decode(code, rho, dimB_n))

    return expectation(term, e.probs, n, cap)


def reduced_trace_identity_check(P: RateProjector, phi: BipartiteState, n: int) -> tuple[float, float]:
    """(Tr (P (x) I_B) phi^{(x)n}, Tr_A P (Tr_B phi)^{(x)n}), computed independently."""
    if not phi.is_pure():
        raise ValueError("phi must be pure")
    if P.n != n or P.d != phi.dimA:
        raise ValueError("projector does not act on A^n")
    psi = _joint_pure_sequence([phi], (0,) * n, n)
    M = psi.reshape(phi.dimA ** n, phi.dimB ** n)
    lhs = float(np.real(np.vdot(M, P.projector @ M)))
    rhs = float(np.real(np.vdot(P.projector, tensor_power(phi.reduced_A, n))))
    return lhs, rhs


def _local_sequence_traces(code: SmearedCode, states: list[BipartiteState], seq) -> np.ndarray:
    """Tr (P_i^{(k)} (x) I) rho_seq = Tr P_i^{(k)} (x)_j Tr_B rho_j."""
    return _outcome_traces(code, kron_all([states[j].reduced_A for j in seq]))


def local_varlen_error_exact(code, e: BipartiteEnsemble, cap: int = DEFAULT_CAP) -> Estimate:
    code = _coerce(code)
    states = e.states

    def term(seq):
        t = np.clip(_local_sequence_traces(code, states, seq), 0.0, None)
        return 1.0 - float(np.sum(t ** 1.5)) / code.k_max

    return expectation(term, e.probs, code.n, cap)


def local_varlen_error_definitional(code, e: BipartiteEnsemble, cap: int = DEFAULT_CAP) -> Estimate:
    """Joint-space Bures errors of the post-measurement states (P (x) I) rho (P (x) I) / t."""
    code = _coerce(code)
    n = code.n
    states = e.states
    dimB_n = e.dimB ** n
    NA = code.d ** n

    def term(seq):
        rho = _joint_sequence(states, seq, n)
        r = rho.reshape(NA, dimB_n, NA, dimB_n)
        total = 0.0
        for k, i in code.outcomes:
            P = code.projector(k, i)
            post = np.einsum("ab,bjck,cd->ajdk", P, r, P).reshape(rho.shape)
            t = float(np.real(np.trace(post)))
            if t <= TINY:
                continue
            total += (t / code.k_max) * bures_sq(rho, post / t)
        return total

    return expectation(term, e.probs, n, cap)


def local_varlen_report(code, e: BipartiteEnsemble, Rs: Sequence[float] = (),
                        delta_prime: float | None = None, cap: int = DEFAULT_CAP,
                        definitional: bool = True) -> VarlenReport:
    """Outcome law, coding lengths, both error routes and the bounds with a = reduced spectrum."""
    code = _coerce(code)
    if e.dimA != code.d:
        raise ValueError("code dimension does not match Alice's system")
    red_avg = partial_trace_B(average_state(e.joint()).entries, e.dimA, e.dimB)
    dist = outcome_distribution(code, red_avg)
    a = reduced_spectrum(e)
    exact = local_varlen_error_exact(code, e, cap).value
    defin = local_varlen_error_definitional(code, e, cap).value if definitional else math.nan
    p = np.array([dist[w] for w in code.outcomes]) * code.k_max
    rep = VarlenReport(dist, coding_lengths(code), exact, defin,
                       1.0 - float(np.sum(p ** 1.5)) / code.k_max)
    for R in Rs:
        rep.overflow[R] = overflow_probability(code, red_avg, R, dist)
        rep.overflow_bounds[R] = varlen_overflow_bound(code.n, code.d, a, code.delta, R)
    if delta_prime is not None:
        rep.error_bound = varlen_error_bound(code.n, code.d, a, code.delta, delta_prime)
    return rep
