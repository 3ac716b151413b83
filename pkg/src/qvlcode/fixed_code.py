"""Universal fixed-length code: project onto P_{R,n}, send the rest to a pad state."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exponents import fixed_error_bound, shannon_entropy
from .linalg import Ensemble, average_state, bures_sq, kron_all, tensor_power
from .schur_weyl import RateProjector, rate_projector
from .sources import DEFAULT_CAP, Estimate, expectation

LEAK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class FixedLengthCode:
    R: float
    n: int
    d: int
    projector: RateProjector
    pad_state_index: int

    @property
    def P(self) -> np.ndarray:
        return self.projector.projector

    @property
    def pad(self) -> np.ndarray:
        """Unit pad vector: P e_j normalized, j = pad_state_index."""
        v = self.P[:, self.pad_state_index].astype(complex)
        return v / np.linalg.norm(v)

    @property
    def rank(self) -> int:
        return self.projector.rank


def make_fixed(R: float, n: int, d: int) -> FixedLengthCode:
    rp = rate_projector(R, n, d)
    if rp.rank < 1:
        raise ValueError("rate projector has rank 0")
    # first basis vector with most of its weight inside range(P); |0...0> always qualifies
    diag = np.diag(rp.projector)
    j = int(np.flatnonzero(diag > 0.5)[0])
    return FixedLengthCode(R, n, d, rp, j)


def encode(code: FixedLengthCode, rho_n) -> np.ndarray:
    """P rho P + Tr((I - P) rho) |pad><pad|."""
    rho_n = np.asarray(rho_n, dtype=complex)
    if rho_n.shape != code.P.shape:
        raise ValueError(f"input has shape {rho_n.shape}, code acts on {code.P.shape}")
    P = code.P
    kept = P @ rho_n @ P
    w = float(np.real(np.trace(rho_n) - np.trace(kept)))
    v = code.pad
    return kept + w * np.outer(v, v.conj())


def decode(code: FixedLengthCode, sigma) -> np.ndarray:
    """Embedding of the coding subspace back into the full space."""
    sigma = np.asarray(sigma, dtype=complex)
    Q = np.eye(code.P.shape[0]) - code.P
    leak = np.abs(Q @ sigma).max() if sigma.size else 0.0
    if leak > LEAK_TOL:
        raise ValueError(f"state leaks {leak:.2e} outside the coding subspace")
    return sigma


def _sequence_state(states, seq) -> np.ndarray:
    return kron_all([states[i].entries for i in seq])


def average_error(code: FixedLengthCode, source: Ensemble, cap: int = DEFAULT_CAP,
                  mc_samples: int | None = None, seed: int = 0) -> Estimate:
    """sum_seq p^n(seq) b^2(rho_seq, D(E(rho_seq))), by exact expansion or Monte Carlo."""
    if source.dim != code.d:
        raise ValueError("source dimension does not match the code")
    states = source.states

    def term(seq):
        rho = _sequence_state(states, seq)
        return bures_sq(rho, decode(code, encode(code, rho)))

    return expectation(term, source.probs, code.n, cap, mc_samples, seed)


def trace_on_average(code: FixedLengthCode, source: Ensemble) -> float:
    """Tr P rho_bar^{(x) n}."""
    rho_bar = average_state(source)
    return float(np.real(np.vdot(code.P, tensor_power(rho_bar.entries, code.n))))


@dataclass
class ChainRecord:
    exact: float
    two_one_minus_trace: float
    rhs_bound: float
    entropy_below_rate: bool
    diagnostics: list[str] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.diagnostics


def error_bound_chain(code: FixedLengthCode, source: Ensemble, cap: int = DEFAULT_CAP,
                      slack: float = 1e-10) -> ChainRecord:
    """exact error <= 2(1 - Tr rho_bar^n P) <= 2 (n+d)^{4d} exp(-n * exponent)."""
    rho_bar = average_state(source)
    a = rho_bar.spectrum()
    exact = average_error(code, source, cap).value
    middle = 2.0 * (1.0 - trace_on_average(code, source))
    rhs = fixed_error_bound(code.n, code.d, a, code.R)
    rec = ChainRecord(exact, middle, rhs, shannon_entropy(a) < code.R)
    if exact > middle + slack:
        rec.diagnostics.append(f"exact {exact!r} > 2(1-Tr) {middle!r}")
    if rec.entropy_below_rate and middle > rhs + slack:
        rec.diagnostics.append(f"2(1-Tr) {middle!r} > rhs {rhs!r}")
    return rec
