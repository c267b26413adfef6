"""Kicked-top dynamics inside the permutation-symmetric (Dicke) subspace.

States are complex arrays whose last axis has length ``N + 1`` and is indexed
by ``m = j, j - 1, ..., -j`` (index ``n = j - m`` counts qubits in ``|1>``).
Leading axes, if any, are treated as a batch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln, xlogy

from .errors import DimensionError, DomainError


@dataclass(frozen=True)
class TopParams:
    """Kicked-top parameters with ``tau = hbar = 1``.

    Attributes
    ----------
    k : float
        Chaos parameter (twist strength).
    p : float
        Rotation angle about ``y`` per kick, in radians.
    N : int
        Number of qubits; the collective spin is ``j = N / 2``.
    """

    k: float
    p: float
    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be a positive integer, got {self.N!r}")
        if not np.isfinite(self.k) or self.k < 0:
            raise DomainError(f"k must be finite and >= 0, got {self.k!r}")
        if not (-2 * np.pi < self.p <= 2 * np.pi):
            raise DomainError(f"p must lie in (-2pi, 2pi], got {self.p!r}")
        object.__setattr__(self, "N", int(self.N))

    @property
    def j(self) -> float:
        return self.N / 2


@dataclass(frozen=True)
class CollectiveOps:
    """Dense collective spin matrices ``Jx, Jy, Jz`` in the Dicke basis."""

    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray

    @property
    def N(self) -> int:
        return self.jz.shape[0] - 1


def _m_values(N: int) -> np.ndarray:
    return N / 2 - np.arange(N + 1)


def _ladder(N: int) -> np.ndarray:
    # <m+1|J+|m> for m = j-1, ..., -j, i.e. the superdiagonal of J+.
    n = np.arange(1, N + 1)
    return np.sqrt(n * (N - n + 1.0))


def collective_ops(N: int) -> CollectiveOps:
    """Build ``Jx, Jy, Jz`` for spin ``j = N/2`` with Condon-Shortley phases."""
    if N < 1:
        raise DomainError("N must be >= 1")
    jp = np.diag(_ladder(N), 1).astype(complex)
    jm = jp.conj().T
    return CollectiveOps(
        jx=(jp + jm) / 2,
        jy=(jp - jm) / 2j,
        jz=np.diag(_m_values(N)).astype(complex),
    )


def coherent_state(theta: float, phi: float, N: int) -> np.ndarray:
    """Spin coherent state ``(cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>)^{(x)N}``.

    Computed in log space so that large ``N`` does not overflow the binomials.
    """
    if not (0 <= theta <= np.pi):
        raise DomainError(f"theta must lie in [0, pi], got {theta!r}")
    if not (-np.pi < phi <= np.pi):
        raise DomainError(f"phi must lie in (-pi, pi], got {phi!r}")
    n = np.arange(N + 1)
    log_binom = gammaln(N + 1) - gammaln(n + 1) - gammaln(N - n + 1)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    with np.errstate(divide="ignore"):
        log_mag = 0.5 * log_binom + xlogy(N - n, c) + xlogy(n, s)
    amp = np.exp(log_mag) * np.exp(1j * phi * n)
    return amp / np.linalg.norm(amp)


def random_symmetric_state(N: int, rng: np.random.Generator, size=None) -> np.ndarray:
    """Haar-random state(s) in the ``N + 1`` dimensional symmetric subspace."""
    shape = (N + 1,) if size is None else (size, N + 1)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def _jx_eigensystem(N: int) -> tuple[np.ndarray, np.ndarray]:
    off = _ladder(N) / 2
    _, vecs = eigh_tridiagonal(np.zeros(N + 1), off)
    # eigenvalues are exactly -j, ..., j; use them instead of the rounded ones
    return np.arange(N + 1) - N / 2, vecs


def floquet_symmetric(params: TopParams) -> np.ndarray:
    """Dense ``U0 = exp(-i k/(2j) Jx^2) exp(-i p Jy)`` on the Dicke subspace.

    Both factors are built from the exact spectrum of ``Jx`` (``Jy`` is ``Jx``
    rotated by pi/2 about ``z``), so no series truncation enters.
    """
    N, j = params.N, params.j
    m, vx = _jx_eigensystem(N)
    kick = (vx * np.exp(-1j * params.k / (2 * j) * m**2)) @ vx.T
    # exp(-i p Jy) = Z exp(-i p Jx) Z^dag with Z = diag(exp(-i pi/2 m_z))
    z = np.exp(-0.5j * np.pi * _m_values(N))
    rot_x = (vx * np.exp(-1j * params.p * m)) @ vx.T
    rot = (z[:, None] * rot_x * z.conj()[None, :]).real
    return kick @ rot


def parity_symmetric(N: int) -> np.ndarray:
    """``exp(-i pi Jy)`` restricted to the Dicke subspace."""
    return floquet_symmetric(TopParams(k=0.0, p=np.pi, N=N))


def _check_dims(state: np.ndarray, U: np.ndarray):
    if U.ndim != 2 or U.shape[0] != U.shape[1] or state.shape[-1] != U.shape[0]:
        raise DimensionError(
            f"state of length {state.shape[-1]} incompatible with operator {U.shape}"
        )


def iterate_symmetric(state: np.ndarray, U: np.ndarray, n: int) -> Iterator[np.ndarray]:
    """Yield ``U^t |state>`` for ``t = 0, ..., n`` without storing the history."""
    if n < 0:
        raise DomainError("kick count must be >= 0")
    psi = np.asarray(state, dtype=complex)
    _check_dims(psi, U)
    Ut = U.T
    yield psi
    for _ in range(n):
        psi = psi @ Ut
        yield psi


def evolve_symmetric(state: np.ndarray, U: np.ndarray, n: int) -> np.ndarray:
    """Full trajectory ``[psi_0, ..., psi_n]`` stacked along a new leading axis.

    Use :func:`iterate_symmetric` or :func:`entropy_trajectory` for long runs;
    this stores every state.
    """
    return np.stack(list(iterate_symmetric(state, U, n)))


def expectation_j(state: np.ndarray, ops: CollectiveOps | None = None) -> np.ndarray:
    """``(<Jx>, <Jy>, <Jz>)`` along the last axis of the result.

    Without ``ops`` the tridiagonal structure is used directly (O(N)).
    """
    psi = np.asarray(state, dtype=complex)
    if ops is not None:
        if ops.jz.shape[0] != psi.shape[-1]:
            raise DimensionError("operator and state dimensions differ")
        vals = [np.einsum("...i,ij,...j->...", psi.conj(), op, psi).real
                for op in (ops.jx, ops.jy, ops.jz)]
        return np.stack(vals, axis=-1)
    N = psi.shape[-1] - 1
    prob = np.abs(psi) ** 2
    jz = prob @ _m_values(N)
    # <J+> = sum_n ladder_n conj(psi[n-1]) psi[n]
    jplus = np.sum(_ladder(N) * psi[..., :-1].conj() * psi[..., 1:], axis=-1)
    return np.stack([jplus.real, jplus.imag, jz], axis=-1)


def single_qubit_entropy_from_j(expectations, j: float, atol: float = 1e-9):
    """Single-qubit linear entropy ``(1 - |<J>|^2 / j^2) / 2`` of a symmetric state."""
    e = np.asarray(expectations, dtype=float)
    r2 = np.sum(e**2, axis=-1) / j**2
    if np.any(np.abs(e) > j * (1 + atol)) or np.any(r2 > 1 + atol):
        raise DomainError("expectations lie outside the Bloch ball of radius j")
    return np.clip(0.5 * (1.0 - r2), 0.0, 0.5)


def entropy_trajectory(state: np.ndarray, U: np.ndarray, n: int) -> np.ndarray:
    """Single-qubit linear entropy after each kick ``0..n`` (batch-aware)."""
    psi = np.asarray(state, dtype=complex)
    j = (psi.shape[-1] - 1) / 2
    out = np.empty((n + 1,) + psi.shape[:-1])
    for t, phi in enumerate(iterate_symmetric(psi, U, n)):
        out[t] = single_qubit_entropy_from_j(expectation_j(phi), j)
    return out
