"""Kicked-top dynamics on the full ``2**N`` dimensional qubit space.

Basis index ``b`` encodes qubit ``l`` in bit ``l`` (bit 0 least significant),
bit value 0 meaning ``|0>``. Amplitudes live on the last axis; leading axes
are a batch. The kick is diagonal in the x basis and is applied by
conjugating with a fast Walsh-Hadamard transform.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import comb

from .errors import CapacityError, DimensionError, DomainError, SymmetryError
from .symmetric import TopParams

DENSE_QUBIT_CAP = 14

INTERACTION = "interaction"
FIELD = "field"


def n_qubits(length: int) -> int:
    N = int(length).bit_length() - 1
    if length < 1 or (1 << N) != length:
        raise DimensionError(f"length {length} is not a power of two")
    return N


def fwht(state: np.ndarray) -> np.ndarray:
    """Normalized Walsh-Hadamard transform ``H^{(x)N}`` along the last axis.

    Involutive; O(N 2^N) per vector.
    """
    a = np.array(state, dtype=complex)
    size = a.shape[-1]
    N = n_qubits(size)
    lead = a.shape[:-1]
    h = 1
    while h < size:
        a = a.reshape(lead + (size // (2 * h), 2, h))
        x, y = a[..., 0, :], a[..., 1, :]
        a = np.stack((x + y, x - y), axis=-2)
        h *= 2
    return a.reshape(lead + (size,)) * 2.0 ** (-N / 2)


def realization_seed(master_seed: int, index: int) -> int:
    """Derive the 64-bit seed of realization ``index`` from a master seed.

    The pair is hashed through :class:`numpy.random.SeedSequence`, so streams
    for different indices are independent and need no coordination.
    """
    ss = np.random.SeedSequence([int(master_seed), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class DisorderRealization:
    """One draw of coupling (``interaction``) or field (``field``) disorder.

    ``eps_pair`` holds one value per unordered pair ``l < l'`` in the order of
    ``np.triu_indices(N, 1)``; ``eps_field`` one value per site. Only the
    array matching ``kind`` is nonzero.
    """

    N: int
    w: float
    seed: int
    kind: str = INTERACTION
    eps_pair: np.ndarray = field(repr=False, default=None)
    eps_field: np.ndarray = field(repr=False, default=None)

    @classmethod
    def draw(cls, N: int, w: float, seed: int, kind: str = INTERACTION):
        if kind not in (INTERACTION, FIELD):
            raise DomainError(f"unknown disorder kind {kind!r}")
        if w < 0:
            raise DomainError("disorder width w must be >= 0")
        # PCG64 + ziggurat normals: portable and bit-reproducible across platforms
        rng = np.random.Generator(np.random.PCG64(seed))
        n_pairs = N * (N - 1) // 2
        pair = np.zeros(n_pairs)
        site = np.zeros(N)
        if kind == INTERACTION:
            pair = w * rng.standard_normal(n_pairs)
        else:
            site = w * rng.standard_normal(N)
        pair.setflags(write=False)
        site.setflags(write=False)
        return cls(N=N, w=float(w), seed=int(seed), kind=kind,
                   eps_pair=pair, eps_field=site)

    @classmethod
    def clean(cls, N: int):
        return cls.draw(N, 0.0, 0)

    def coupling_matrix(self) -> np.ndarray:
        """Symmetric ``(1 + eps_ll')`` matrix with zero diagonal."""
        J = np.zeros((self.N, self.N))
        iu = np.triu_indices(self.N, 1)
        J[iu] = 1.0 + self.eps_pair
        return J + J.T


def x_signs(N: int) -> np.ndarray:
    """``(2**N, N)`` array of x-basis eigenvalues ``+1`` (bit 0) / ``-1`` (bit 1)."""
    b = np.arange(2**N)[:, None]
    return 1 - 2 * ((b >> np.arange(N)) & 1)


def _pair_energy(J: np.ndarray) -> np.ndarray:
    """``sum_{l<l'} J_ll' x_l x_l'`` for every basis index, built by doubling.

    Adding qubit ``m`` doubles the table: the new half differs by
    ``-2 x_m * sum_{l<m} J_lm x_l``. The local field table is itself grown
    by doubling, giving O(N 2^N) total work.
    """
    N = J.shape[0]
    energy = np.zeros(1)
    for m in range(N):
        fld = np.zeros(1)
        for l in range(m):
            fld = np.concatenate((fld + J[l, m], fld - J[l, m]))
        energy = np.concatenate((energy + fld, energy - fld))
    return energy


def kick_diagonal(params: TopParams, real: DisorderRealization | None = None) -> np.ndarray:
    """Phases ``exp(-i k/(2N) sum_{l<l'} (1 + eps_ll') x_l x_l')`` in the x basis.

    Field-kind realizations leave the kick clean.
    """
    N = params.N
    if real is None or real.kind == FIELD:
        real = DisorderRealization.clean(N)
    if real.N != N:
        raise DimensionError("realization and parameters disagree on N")
    energy = _pair_energy(real.coupling_matrix())
    return np.exp(-1j * params.k / (2 * N) * energy)


def _rotate_qubit(a: np.ndarray, l: int, c, s) -> np.ndarray:
    lead = a.shape[:-1]
    size = a.shape[-1]
    a = a.reshape(lead + (size >> (l + 1), 2, 1 << l))
    x, y = a[..., 0, :], a[..., 1, :]
    return np.stack((c * x - s * y, s * x + c * y), axis=-2).reshape(lead + (size,))


def apply_y_rotation(state: np.ndarray, p: float, eps_field=None) -> np.ndarray:
    """Apply ``prod_l exp(-i (p/2)(1 + eps_l) sigma^y_l)`` qubit by qubit.

    ``eps_field`` may be ``None``, shape ``(N,)``, or shape ``batch + (N,)``
    matching the leading axes of ``state``.
    """
    a = np.array(state, dtype=complex)
    N = n_qubits(a.shape[-1])
    if eps_field is None:
        angles = np.full(N, p / 2)
    else:
        angles = (p / 2) * (1.0 + np.asarray(eps_field, dtype=float))
    if angles.shape[-1] != N:
        raise DimensionError("eps_field length must equal the qubit count")
    for l in range(N):
        theta = angles[..., l]
        c, s = np.cos(theta), np.sin(theta)
        if np.ndim(theta):
            c = c[..., None, None]
            s = s[..., None, None]
        a = _rotate_qubit(a, l, c, s)
    return a


def _as_list(real) -> list:
    if real is None:
        return []
    if isinstance(real, DisorderRealization):
        return [real]
    return list(real)


class FullFloquet:
    """Floquet propagator for one realization or a batch of realizations.

    With a batch of ``R`` realizations, states must have a leading axis of
    length ``R`` (realization ``r`` evolves ``state[r]``).

    Parameters
    ----------
    params : TopParams
    realizations : DisorderRealization, sequence of them, or None (clean)
    """

    def __init__(self, params: TopParams, realizations=None):
        self.params = params
        reals = _as_list(realizations) or [DisorderRealization.clean(params.N)]
        for r in reals:
            if r.N != params.N:
                raise DimensionError("realization and parameters disagree on N")
        self.realizations = reals
        self.batched = not (realizations is None or isinstance(realizations, DisorderRealization))
        diag = np.stack([kick_diagonal(params, r) for r in reals])
        fields = np.stack([r.eps_field for r in reals])
        has_field = any(r.kind == FIELD for r in reals)
        if not self.batched:
            diag, fields = diag[0], fields[0]
        self.diagonal = diag
        self.eps_field = fields if has_field else None

    @property
    def N(self) -> int:
        return self.params.N

    def _fields_for(self, state):
        if self.eps_field is None or not self.batched:
            return self.eps_field
        # broadcast per-realization angles over any extra batch axes
        extra = state.ndim - 2
        return self.eps_field.reshape(self.eps_field.shape[:1] + (1,) * extra + (self.N,))

    def _diag_for(self, state):
        if not self.batched:
            return self.diagonal
        extra = state.ndim - 2
        return self.diagonal.reshape(self.diagonal.shape[:1] + (1,) * extra + (-1,))

    def step(self, state: np.ndarray) -> np.ndarray:
        """One kick: rotation, then the kick phases applied in the x basis."""
        psi = np.asarray(state, dtype=complex)
        if psi.shape[-1] != 2**self.N:
            raise DimensionError("state length does not match 2**N")
        psi = apply_y_rotation(psi, self.params.p, self._fields_for(psi))
        return fwht(self._diag_for(psi) * fwht(psi))

    def to_x_frame(self, state):
        return fwht(state)

    def step_x_frame(self, state_x: np.ndarray) -> np.ndarray:
        """One kick acting on a state expressed in the x basis.

        ``H R_y(a) H = R_y(-a)``, so the Hadamard pair between successive kicks
        cancels and only the rotation sign flips.
        """
        fields = self._fields_for(state_x)
        psi = apply_y_rotation(state_x, -self.params.p, fields)
        return self._diag_for(psi) * psi

    def dense(self, max_qubits: int = DENSE_QUBIT_CAP) -> np.ndarray:
        """Dense ``2**N x 2**N`` Floquet matrix (single realization only)."""
        if self.batched:
            raise DimensionError("dense() needs a single realization")
        N = self.N
        if N > max_qubits:
            raise CapacityError(
                f"dense Floquet matrix for N={N} exceeds the cap of {max_qubits} qubits "
                f"({(2**N) ** 2 * 16 / 2**30:.1f} GiB); raise max_qubits explicitly to override"
            )
        eye = np.eye(2**N, dtype=complex)
        # row c of the result is U e_c, i.e. column c of U
        return self.step(eye).T


def floquet_step(state: np.ndarray, params: TopParams, real: DisorderRealization | None = None):
    """Advance ``state`` by one kick."""
    return FullFloquet(params, real).step(state)


def build_dense_floquet(params: TopParams, real: DisorderRealization | None = None,
                        max_qubits: int = DENSE_QUBIT_CAP) -> np.ndarray:
    """Dense Floquet matrix; column ``c`` is :func:`floquet_step` of ``e_c``."""
    return FullFloquet(params, real).dense(max_qubits=max_qubits)


def popcounts(N: int) -> np.ndarray:
    b = np.arange(2**N)
    return ((b[:, None] >> np.arange(N)) & 1).sum(axis=1)


def embed_dicke(state: np.ndarray) -> np.ndarray:
    """Embed a Dicke-basis state (last axis ``N+1``) into the ``2**N`` space."""
    psi = np.asarray(state, dtype=complex)
    N = psi.shape[-1] - 1
    n = popcounts(N)
    return psi[..., n] / np.sqrt(comb(N, n))


def dicke_amplitudes(state: np.ndarray) -> np.ndarray:
    """Overlaps ``<D_n|psi>`` with the normalized Dicke states (index ``n = j - m``)."""
    psi = np.asarray(state, dtype=complex)
    N = n_qubits(psi.shape[-1])
    n = popcounts(N)
    lead = psi.shape[:-1]
    flat = psi.reshape(-1, 2**N)
    sums = np.zeros((flat.shape[0], N + 1), dtype=complex)
    np.add.at(sums, (slice(None), n), flat)
    return (sums / np.sqrt(comb(N, np.arange(N + 1)))).reshape(lead + (N + 1,))


# ---- parity ----------------------------------------------------------------
#
# R = prod_l exp(-i pi/2 sigma^y_l) = (-i)^N prod_l sigma^y_l. In the x basis
# (after H^{(x)N}) it becomes the signed bit-complement map
#   R_x |b> = (-1)^{zeros(b)} |~b>,
# so its eigenvectors pair each b with its complement.


def _parity_pairs(N: int, sector: int):
    """Index pairs ``(b, ~b)`` and coefficients spanning one R eigenspace.

    Returns ``(lo, hi, coef)``: the eigenvector ``v_i`` is
    ``(|lo_i> + coef_i |hi_i>) / sqrt(2)`` in the x basis. For even N the
    sectors are the ``+1``/``-1`` eigenspaces of R; for odd N (eigenvalues
    ``+-i``) ``sector=+1`` selects eigenvalue ``+i``.
    """
    if sector not in (1, -1):
        raise DomainError("sector must be +1 or -1")
    size = 2**N
    lo = np.arange(size // 2)
    hi = (size - 1) ^ lo
    zeros = N - popcounts(N)[lo]
    lam = sector * (1j if N % 2 else 1.0)
    coef = ((-1.0) ** zeros) / lam
    return lo, hi, coef


def _parity_signs(N: int) -> np.ndarray:
    return (-1.0) ** (N - popcounts(N))


def _left_parity(M: np.ndarray, N: int) -> np.ndarray:
    # (R_x M)[c, :] = sign[~c] M[~c, :]
    src = (2**N - 1) ^ np.arange(2**N)
    return _parity_signs(N)[src][:, None] * M[src, :]


def _right_parity(M: np.ndarray, N: int) -> np.ndarray:
    # (M R_x)[:, b] = M[:, ~b] sign[b]
    src = (2**N - 1) ^ np.arange(2**N)
    return M[:, src] * _parity_signs(N)[None, :]


def to_x_frame_operator(U: np.ndarray) -> np.ndarray:
    """``H U H`` for a dense operator on the qubit space."""
    return fwht(fwht(U).T).T


def parity_projected(M_x: np.ndarray, N: int, sector: int) -> np.ndarray:
    """Block of an x-frame operator in the chosen R eigenspace."""
    lo, hi, coef = _parity_pairs(N, sector)
    cc = coef.conj()
    block = (M_x[np.ix_(lo, lo)]
             + M_x[np.ix_(lo, hi)] * coef[None, :]
             + cc[:, None] * M_x[np.ix_(hi, lo)]
             + cc[:, None] * M_x[np.ix_(hi, hi)] * coef[None, :])
    return block / 2


def parity_commutator_norm(U: np.ndarray, N: int) -> float:
    """``max |[U, R]|`` evaluated in the x frame."""
    M = to_x_frame_operator(U)
    return float(np.max(np.abs(_left_parity(M, N) - _right_parity(M, N))))


def parity_blocks(U: np.ndarray, N: int, atol: float = 1e-8):
    """Split ``U`` into its ``+`` and ``-`` parity blocks.

    Each block is expressed in an orthonormal eigenbasis of
    ``R = exp(-i pi Jy)`` (see :func:`parity_basis`).

    Raises
    ------
    SymmetryError
        If ``U`` does not commute with R within ``atol``.
    """
    U = np.asarray(U, dtype=complex)
    if U.shape != (2**N, 2**N):
        raise DimensionError("operator shape does not match N")
    M = to_x_frame_operator(U)
    err = float(np.max(np.abs(_left_parity(M, N) - _right_parity(M, N))))
    if err > atol:
        raise SymmetryError(f"[U, R] has max entry {err:.3g} > {atol}")
    return parity_projected(M, N, +1), parity_projected(M, N, -1)


def parity_basis(N: int, sector: int) -> np.ndarray:
    """Columns: orthonormal eigenvectors of R for ``sector``, computational basis."""
    lo, hi, coef = _parity_pairs(N, sector)
    V = np.zeros((2**N, lo.size), dtype=complex)
    cols = np.arange(lo.size)
    V[lo, cols] = 1 / np.sqrt(2)
    V[hi, cols] = coef / np.sqrt(2)
    return fwht(V.T).T


def rotation_parity_block(N: int, p: float, sector: int) -> np.ndarray:
    """Clean rotation ``prod_l R_y(p)`` projected to one parity block (x frame)."""
    lo, hi, coef = _parity_pairs(N, sector)
    cols = np.zeros((lo.size, 2**N), dtype=complex)
    idx = np.arange(lo.size)
    cols[idx, lo] = 1 / np.sqrt(2)
    cols[idx, hi] = coef / np.sqrt(2)
    # x-frame rotation is R_y(-p); img[j] is the image of eigenvector j
    img = apply_y_rotation(cols, -p)
    return ((img[:, lo] + img[:, hi] * coef.conj()[None, :]) / np.sqrt(2)).T


def floquet_parity_block(params: TopParams, real: DisorderRealization | None,
                         sector: int = 1, rotation_block: np.ndarray | None = None):
    """Parity block of the Floquet operator without building the full matrix.

    In the x frame the kick is diagonal and invariant under bit complement,
    so the block factorizes as ``diag(kick restricted) @ rotation block``.
    Only interaction disorder is supported (field disorder changes the
    rotation per realization).
    """
    if real is not None and real.kind == FIELD and np.any(real.eps_field):
        raise DomainError("fast parity block requires interaction-kind disorder")
    lo, _, _ = _parity_pairs(params.N, sector)
    if rotation_block is None:
        rotation_block = rotation_parity_block(params.N, params.p, sector)
    d = kick_diagonal(params, real)[lo]
    return d[:, None] * rotation_block
