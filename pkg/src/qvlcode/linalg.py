"""Dense Hermitian linear algebra and quantum-state primitives.

All logarithms are natural (nats). Tensor factors use the big-endian index
convention of ``np.kron``: in a product basis |i_1 ... i_n>, factor 1 is the
most significant digit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

# d^n above this is refused by tensor_power and friends.
MAX_DIM = 6561


@dataclass(frozen=True)
class ToleranceConfig:
    psd_clip: float = 1e-12
    hermit_tol: float = 1e-10
    eq_tol: float = 1e-8

    def __post_init__(self):
        if min(self.psd_clip, self.hermit_tol, self.eq_tol) <= 0:
            raise ValueError("tolerances must be positive")


TOL = ToleranceConfig()


class MemoryCapError(RuntimeError):
    """Requested dimension exceeds the desk-scale cap."""


def _as_matrix(m) -> np.ndarray:
    if isinstance(m, DensityMatrix):
        return m.entries
    return np.asarray(m, dtype=complex)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, PSD, unit-trace complex matrix."""

    entries: np.ndarray
    tol: ToleranceConfig = field(default=TOL, repr=False)

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > self.tol.hermit_tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > self.tol.hermit_tol:
            raise ValueError(f"density matrix trace {np.trace(m).real!r} != 1")
        if np.linalg.eigvalsh(m)[0] < -self.tol.hermit_tol:
            raise ValueError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def pure(cls, psi) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def diag(cls, probs) -> "DensityMatrix":
        return cls(np.diag(np.asarray(probs, dtype=complex)))

    def spectrum(self) -> np.ndarray:
        """Eigenvalues in descending order, clipped at zero."""
        w = np.linalg.eigvalsh(self.entries)[::-1]
        return np.clip(w, 0.0, None)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.entries, self.entries)))

    def __matmul__(self, other):
        return self.entries @ _as_matrix(other)

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Finite source: list of (probability, state) pairs on a common space."""

    items: tuple

    def __init__(self, items: Sequence[tuple[float, DensityMatrix]]):
        items = tuple((float(p), s if isinstance(s, DensityMatrix) else DensityMatrix(s))
                      for p, s in items)
        if not items:
            raise ValueError("ensemble is empty")
        probs = np.array([p for p, _ in items])
        if np.any(probs < 0):
            raise ValueError("ensemble probabilities must be nonnegative")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError(f"ensemble probabilities sum to {probs.sum()!r}, not 1")
        dims = {s.dim for _, s in items}
        if len(dims) != 1:
            raise ValueError(f"ensemble members have mixed dimensions {sorted(dims)}")
        object.__setattr__(self, "items", items)

    @property
    def dim(self) -> int:
        return self.items[0][1].dim

    @property
    def probs(self) -> np.ndarray:
        return np.array([p for p, _ in self.items])

    @property
    def states(self) -> list[DensityMatrix]:
        return [s for _, s in self.items]

    def __len__(self):
        return len(self.items)

    @classmethod
    def single(cls, rho) -> "Ensemble":
        return cls([(1.0, rho)])


def average_state(e: Ensemble) -> DensityMatrix:
    """Probability-weighted mixture of the ensemble members."""
    dims = {s.dim for _, s in e.items}
    if len(dims) != 1:
        raise ValueError("dimension mismatch among ensemble members")
    avg = sum(p * s.entries for p, s in e.items)
    avg = 0.5 * (avg + avg.conj().T)
    return DensityMatrix(avg / np.trace(avg).real)


def hermitian_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Full eigendecomposition of a Hermitian matrix (ascending eigenvalues)."""
    m = _as_matrix(m)
    return np.linalg.eigh(0.5 * (m + m.conj().T))


def sqrt_psd(m, tol: ToleranceConfig = TOL) -> np.ndarray:
    """Principal square root of a PSD matrix.

    Eigenvalues in ``[-psd_clip * scale, 0)`` are treated as zero; anything more
    negative is rejected.
    """
    w, v = hermitian_eig(m)
    scale = max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)
    if w.size and w[0] < -tol.psd_clip * scale * max(1, w.size):
        raise ValueError(f"matrix is not PSD (min eigenvalue {w[0]:.3e})")
    w = np.sqrt(np.where(w > tol.psd_clip * scale, w, 0.0))
    return (v * w) @ v.conj().T


def von_neumann_entropy(rho) -> float:
    w = np.linalg.eigvalsh(_as_matrix(rho))
    w = w[w > TOL.psd_clip]
    return float(-np.sum(w * np.log(w)))


def trace_norm_sqrt_product(rho, sigma) -> float:
    """Tr|sqrt(rho) sqrt(sigma)|, the nuclear norm of the product of square roots.

    Singular values of the product are accurate in absolute terms, whereas the
    equivalent Tr sqrt(sqrt(rho) sigma sqrt(rho)) takes square roots of
    eigenvalue noise.
    """
    prod = sqrt_psd(rho) @ sqrt_psd(sigma)
    return float(np.sum(np.linalg.svd(prod, compute_uv=False)))


def bures_distance(rho, sigma) -> float:
    """b(rho, sigma) = sqrt(1 - Tr|sqrt(rho) sqrt(sigma)|)."""
    rho, sigma = _as_matrix(rho), _as_matrix(sigma)
    if rho.shape != sigma.shape:
        raise ValueError("dimension mismatch")
    overlap = min(trace_norm_sqrt_product(rho, sigma), 1.0)
    return float(np.sqrt(max(0.0, 1.0 - overlap)))


def bures_sq(rho, sigma) -> float:
    """Squared Bures distance, the per-sequence error term."""
    return max(0.0, 1.0 - min(trace_norm_sqrt_product(rho, sigma), 1.0))


def _check_cap(dim: int, cap: int = MAX_DIM):
    if dim > cap:
        raise MemoryCapError(f"dimension {dim} exceeds cap {cap}")


def kron_all(mats: Sequence) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, _as_matrix(m))
    return out


def tensor_power(rho, n: int, cap: int = MAX_DIM):
    """rho^{(x) n}; returns a DensityMatrix when given one."""
    if n < 1:
        raise ValueError("n must be positive")
    m = _as_matrix(rho)
    _check_cap(m.shape[0] ** n, cap)
    out = kron_all([m] * n)
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(out)
    return out


def partial_trace_B(rho, dimA: int, dimB: int):
    """Trace out the second (less significant) tensor factor."""
    m = _as_matrix(rho)
    if m.shape[0] != dimA * dimB:
        raise ValueError(f"dimension {m.shape[0]} does not factor as {dimA}x{dimB}")
    out = np.einsum("ajbj->ab", m.reshape(dimA, dimB, dimA, dimB))
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(out)
    return out


def partial_trace_A(rho, dimA: int, dimB: int):
    m = _as_matrix(rho)
    if m.shape[0] != dimA * dimB:
        raise ValueError(f"dimension {m.shape[0]} does not factor as {dimA}x{dimB}")
    out = np.einsum("jajb->ab", m.reshape(dimA, dimB, dimA, dimB))
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(out)
    return out


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_pure(d: int, rng: np.random.Generator) -> DensityMatrix:
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return DensityMatrix.pure(psi)
