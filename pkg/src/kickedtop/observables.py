"""Entanglement, symmetric-subspace overlap, effective dimension, RMT references."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, DomainError
from .full import dicke_amplitudes, n_qubits


def _split(state: np.ndarray, Q: int) -> np.ndarray:
    psi = np.asarray(state, dtype=complex)
    N = n_qubits(psi.shape[-1])
    if not 1 <= Q <= N - 1:
        raise DomainError(f"subsystem size Q={Q} must satisfy 1 <= Q <= N-1 (N={N})")
    # index b = hi * 2**Q + lo, lo holds qubits 0..Q-1
    return psi.reshape(psi.shape[:-1] + (2 ** (N - Q), 2**Q))


def reduced_density(state: np.ndarray, Q: int) -> np.ndarray:
    """Reduced density matrix of the first ``Q`` qubits (bits ``0..Q-1``).

    The last ``N - Q`` qubits are traced out. Batch axes are preserved.
    """
    M = _split(state, Q)
    return np.einsum("...ha,...hb->...ab", M, M.conj())


def purity(rho: np.ndarray) -> np.ndarray:
    """``Tr rho^2`` via the Frobenius norm (rho Hermitian)."""
    return np.sum(np.abs(rho) ** 2, axis=(-2, -1))


def linear_entropy(rho: np.ndarray) -> np.ndarray:
    """``1 - Tr rho^2``."""
    return 1.0 - purity(rho)


def subsystem_linear_entropy(state: np.ndarray, Q: int) -> np.ndarray:
    """``S_Q`` of a pure state, using whichever Gram matrix is smaller."""
    M = _split(state, Q)
    if M.shape[-1] <= M.shape[-2]:
        g = np.einsum("...ha,...hb->...ab", M, M.conj())
    else:
        g = np.einsum("...ah,...bh->...ab", M, M.conj())
    return 1.0 - purity(g)


def single_qubit_entropy(state: np.ndarray) -> np.ndarray:
    """``S_1`` of qubit 0 from the 2x2 reduced density matrix."""
    M = _split(state, 1)
    p0 = np.sum(np.abs(M[..., 0]) ** 2, axis=-1)
    p1 = np.sum(np.abs(M[..., 1]) ** 2, axis=-1)
    off = np.sum(M[..., 0] * M[..., 1].conj(), axis=-1)
    return 1.0 - (p0**2 + p1**2 + 2 * np.abs(off) ** 2)


def chi_overlap(state: np.ndarray) -> np.ndarray:
    """Total weight of ``state`` inside the permutation-symmetric subspace."""
    return np.sum(np.abs(dicke_amplitudes(state)) ** 2, axis=-1)


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenangles in ``(-pi, pi]`` and orthonormal eigenvectors (columns)."""

    eigenangles: np.ndarray
    eigenvectors: np.ndarray
    block: str = "full"

    @classmethod
    def from_unitary(cls, U: np.ndarray, block: str = "full"):
        """Diagonalize a unitary through its complex Schur form.

        For a normal matrix the Schur form is diagonal and the Schur vectors
        stay orthonormal even inside degenerate eigenspaces, where ``eig``
        would return a non-orthogonal basis.
        """
        T, Z = scipy.linalg.schur(np.asarray(U, dtype=complex), output="complex")
        angles = np.angle(np.diag(T))
        angles[angles <= -np.pi] += 2 * np.pi
        return cls(eigenangles=angles, eigenvectors=Z, block=block)

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * np.exp(1j * self.eigenangles)) @ V.conj().T


def effective_dimension(state: np.ndarray, eig: EigenDecomposition, alpha: float = 1e-4,
                        norm_atol: float = 1e-8) -> int:
    """Smallest number of eigenvectors carrying weight ``>= 1 - alpha`` of ``state``."""
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    psi = np.asarray(state, dtype=complex)
    if eig.eigenvectors.shape[0] != psi.shape[-1]:
        raise DimensionError("state and eigenvectors differ in dimension")
    if abs(np.linalg.norm(psi) - 1) > norm_atol:
        raise DomainError("state is not normalized")
    weights = np.abs(eig.eigenvectors.conj().T @ psi) ** 2
    order = np.argsort(-weights, kind="stable")
    cumulative = np.cumsum(weights[order])
    # guard the comparison against roundoff in the final partial sums
    K = int(np.searchsorted(cumulative, (1 - alpha) * (1 - 1e-14), side="left")) + 1
    return min(K, weights.size)


def haar_states(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def rmt_wishart_entropy(Q: int, N: int) -> float:
    """Mean ``S_Q`` of Haar-random ``N``-qubit states."""
    if not 1 <= Q <= N - 1:
        raise DomainError("need 1 <= Q <= N-1")
    return (2**Q - 1) * (2 ** (N - Q) - 1) / (2**N + 1)


def rmt_pss_entropy(Q: int, N: int) -> float:
    """Mean ``S_Q`` of random states in the permutation-symmetric subspace."""
    if not 1 <= Q <= N - 1:
        raise DomainError("need 1 <= Q <= N-1")
    return Q * (N - Q) / ((Q + 1) * (N - Q + 1))
