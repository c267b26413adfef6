from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from kickedtop.errors import CapacityError, DimensionError, DomainError, SymmetryError
from kickedtop.full import (DisorderRealization, FullFloquet, apply_y_rotation,
                            build_dense_floquet, dicke_amplitudes, embed_dicke,
                            floquet_parity_block, floquet_step, fwht, kick_diagonal,
                            n_qubits, parity_basis, parity_blocks, parity_commutator_norm,
                            realization_seed, rotation_parity_block, to_x_frame_operator)
from kickedtop.observables import chi_overlap, single_qubit_entropy
from kickedtop.spectral import eigenangles
from kickedtop.symmetric import (TopParams, coherent_state, floquet_symmetric,
                                 iterate_symmetric, random_symmetric_state)

I2 = np.eye(2)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
H1 = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def site_op(op, l, N):
    """Dense operator acting on qubit l (bit l, least significant = qubit 0)."""
    mats = [op if q == l else I2 for q in range(N)]
    # kron puts the first factor on the most significant bit
    return reduce(np.kron, mats[::-1])


def _max_abs(a):
    return float(np.max(np.abs(a)))


def random_state(N, rng):
    z = rng.standard_normal(2**N) + 1j * rng.standard_normal(2**N)
    return z / np.linalg.norm(z)


class TestFWHT:
    def test_basis_vector(self):
        e0 = np.zeros(4)
        e0[0] = 1
        np.testing.assert_allclose(fwht(e0), [0.5] * 4, atol=1e-15)

    def test_involution(self):
        psi = random_state(10, np.random.default_rng(0))
        assert _max_abs(fwht(fwht(psi)) - psi) < 1e-12

    def test_kronecker_oracle(self):
        psi = random_state(3, np.random.default_rng(1))
        H3 = np.kron(np.kron(H1, H1), H1)
        assert _max_abs(fwht(psi) - H3 @ psi) < 1e-13

    def test_batched(self):
        rng = np.random.default_rng(2)
        batch = np.stack([random_state(5, rng) for _ in range(3)])
        out = fwht(batch)
        for i in range(3):
            assert _max_abs(out[i] - fwht(batch[i])) < 1e-14

    def test_bad_length(self):
        with pytest.raises(DimensionError):
            fwht(np.ones(6))
        with pytest.raises(DimensionError):
            n_qubits(0)


class TestDisorder:
    def test_reproducible(self):
        a = DisorderRealization.draw(8, 0.3, 1234)
        b = DisorderRealization.draw(8, 0.3, 1234)
        np.testing.assert_array_equal(a.eps_pair, b.eps_pair)
        assert a.eps_pair.shape == (28,)
        assert not np.any(a.eps_field)

    def test_frozen_stream(self):
        # pins the generator and stream-splitting rule
        seed = realization_seed(0, 0)
        assert seed == realization_seed(0, 0)
        assert seed != realization_seed(0, 1) and seed != realization_seed(1, 0)
        r = DisorderRealization.draw(4, 1.0, 42)
        expected = np.random.Generator(np.random.PCG64(42)).standard_normal(6)
        np.testing.assert_array_equal(r.eps_pair, expected)

    def test_field_kind(self):
        r = DisorderRealization.draw(5, 0.5, 7, kind="field")
        assert r.eps_field.shape == (5,) and np.any(r.eps_field)
        assert not np.any(r.eps_pair)

    def test_domain(self):
        with pytest.raises(DomainError):
            DisorderRealization.draw(4, -1, 0)
        with pytest.raises(DomainError):
            DisorderRealization.draw(4, 1, 0, kind="magnetic")

    def test_coupling_matrix(self):
        r = DisorderRealization.draw(4, 0.5, 3)
        J = r.coupling_matrix()
        assert np.allclose(J, J.T) and np.all(np.diag(J) == 0)
        iu = np.triu_indices(4, 1)
        np.testing.assert_allclose(J[iu], 1 + r.eps_pair)


class TestKick:
    def test_two_qubits(self):
        k = 0.7
        d = kick_diagonal(TopParams(k, 1.0, 2))
        assert d[0] == pytest.approx(np.exp(-1j * k / 4))
        assert d[1] == pytest.approx(np.exp(1j * k / 4))

    def test_k_zero(self):
        r = DisorderRealization.draw(6, 2.0, 1)
        np.testing.assert_allclose(kick_diagonal(TopParams(0, 1, 6), r), 1.0)

    def test_unit_modulus(self):
        d = kick_diagonal(TopParams(6, 1, 10), DisorderRealization.draw(10, 3.0, 9))
        assert _max_abs(np.abs(d) - 1) < 1e-12

    def test_pauli_exponential_oracle(self):
        N, k = 4, 2.3
        r = DisorderRealization.draw(N, 1.0, 11)
        J = r.coupling_matrix()
        G = sum(J[a, b] * site_op(SX, a, N) @ site_op(SX, b, N)
                for a in range(N) for b in range(a + 1, N))
        oracle = expm(-1j * k / (2 * N) * G)
        d = kick_diagonal(TopParams(k, 1.0, N), r)
        # columns of H diag(d) H
        kick = fwht((d[:, None] * fwht(np.eye(2**N))).T).T
        assert _max_abs(kick - oracle) < 1e-10


class TestRotation:
    def test_identity(self):
        psi = random_state(4, np.random.default_rng(0))
        assert _max_abs(apply_y_rotation(psi, 0.0) - psi) < 1e-15

    def test_single_qubit(self):
        out = apply_y_rotation(np.array([1, 0], dtype=complex), np.pi / 2)
        np.testing.assert_allclose(out, [2**-0.5, 2**-0.5], atol=1e-12)

    def test_kronecker_oracle(self):
        N, p = 3, 4 * np.pi / 11
        eps = np.random.default_rng(5).standard_normal(N)
        mats = [expm(-1j * p / 2 * (1 + e) * SY) for e in eps]
        oracle = reduce(np.kron, mats[::-1])
        psi = random_state(N, np.random.default_rng(6))
        assert _max_abs(apply_y_rotation(psi, p, eps) - oracle @ psi) < 1e-12

    def test_batched_fields(self):
        rng = np.random.default_rng(8)
        eps = rng.standard_normal((3, 4))
        batch = np.stack([random_state(4, rng) for _ in range(3)])
        out = apply_y_rotation(batch, 1.1, eps)
        for i in range(3):
            assert _max_abs(out[i] - apply_y_rotation(batch[i], 1.1, eps[i])) < 1e-14

    def test_bad_field_length(self):
        with pytest.raises(DimensionError):
            apply_y_rotation(np.ones(8) / np.sqrt(8), 1.0, np.zeros(2))


class TestFloquet:
    @pytest.mark.parametrize("N,w,kind", [(3, 0.0, "interaction"), (5, 1.0, "interaction"),
                                          (6, 0.7, "field"), (4, 2.0, "interaction")])
    def test_step_equals_dense(self, N, w, kind):
        P = TopParams(3.0, 4 * np.pi / 11, N)
        r = DisorderRealization.draw(N, w, 21, kind)
        U = build_dense_floquet(P, r)
        psi = random_state(N, np.random.default_rng(N))
        a, b = psi, psi
        for _ in range(100):
            a = floquet_step(a, P, r)
            b = U @ b
        assert _max_abs(a - b) < 1e-10

    def test_dense_unitary(self):
        U = build_dense_floquet(TopParams(6, 1.0, 6), DisorderRealization.draw(6, 1.0, 3))
        assert _max_abs(U.conj().T @ U - np.eye(64)) < 1e-9

    def test_identity_when_trivial(self):
        U = build_dense_floquet(TopParams(0, 0, 4), DisorderRealization.draw(4, 1.0, 3))
        assert _max_abs(U - np.eye(16)) < 1e-14

    def test_capacity(self):
        with pytest.raises(CapacityError, match="max_qubits"):
            FullFloquet(TopParams(1, 1, 9)).dense(max_qubits=8)

    def test_x_frame_step(self):
        N = 6
        P = TopParams(2, 1.3, N)
        F = FullFloquet(P, DisorderRealization.draw(N, 0.5, 1))
        psi = random_state(N, np.random.default_rng(0))
        x = F.to_x_frame(psi)
        for _ in range(10):
            psi = F.step(psi)
            x = F.step_x_frame(x)
        assert _max_abs(fwht(x) - psi) < 1e-12

    def test_batched_realizations(self):
        N = 5
        P = TopParams(4, 1.0, N)
        reals = [DisorderRealization.draw(N, 1.0, s) for s in range(3)]
        F = FullFloquet(P, reals)
        psi = random_state(N, np.random.default_rng(1))
        out = F.step(np.tile(psi, (3, 1)))
        for i, r in enumerate(reals):
            assert _max_abs(out[i] - floquet_step(psi, P, r)) < 1e-14

    def test_batched_field_realizations(self):
        N = 4
        P = TopParams(2, 1.2, N)
        reals = [DisorderRealization.draw(N, 0.8, s, "field") for s in range(3)]
        F = FullFloquet(P, reals)
        psi = random_state(N, np.random.default_rng(3))
        out = F.step_x_frame(F.to_x_frame(np.tile(psi, (3, 1))))
        for i, r in enumerate(reals):
            ref = FullFloquet(P, r)
            assert _max_abs(out[i] - ref.step_x_frame(ref.to_x_frame(psi))) < 1e-13

    def test_mismatched_realization(self):
        with pytest.raises(DimensionError):
            FullFloquet(TopParams(1, 1, 4), DisorderRealization.draw(5, 1, 0))

    def test_norm_conserved(self):
        N = 8
        F = FullFloquet(TopParams(6, 1.0, N), DisorderRealization.draw(N, 1.0, 0))
        x = F.to_x_frame(random_state(N, np.random.default_rng(2)))
        for _ in range(2000):
            x = F.step_x_frame(x)
        assert abs(np.linalg.norm(x) - 1) < 1e-10

    def test_clean_matches_symmetric_engine(self):
        N = 8
        P = TopParams(3.0, np.pi / 2, N)
        sym = coherent_state(2.25, 1.1, N)
        U0 = floquet_symmetric(P)
        psi = embed_dicke(sym)
        # the full kick omits the sigma_x^2 terms of Jx^2: global phase exp(ik/4) per kick
        phase = np.exp(1j * P.k / 4)
        for n, s in enumerate(iterate_symmetric(sym, U0, 1000)):
            if n:
                psi = floquet_step(psi, P)
            if n % 100 == 0:
                assert _max_abs(psi - phase**n * embed_dicke(s)) < 1e-8
                assert abs(chi_overlap(psi) - 1) < 1e-10

    def test_clean_symmetric_spectrum_contained(self):
        N = 8
        P = TopParams(1.0, np.pi / 2, N)
        full = eigenangles(build_dense_floquet(P))
        sym = np.angle(np.exp(1j * P.k / 4) * np.linalg.eigvals(floquet_symmetric(P)))
        for a in sym:
            gap = np.abs(np.angle(np.exp(1j * (full - a))))
            assert gap.min() < 1e-8


class TestDicke:
    def test_basis_vector(self):
        e = embed_dicke(np.array([1, 0, 0, 0], dtype=complex))
        assert e[0] == 1 and np.count_nonzero(e) == 1

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), N=st.integers(1, 10))
    def test_round_trip(self, seed, N):
        psi = random_symmetric_state(N, np.random.default_rng(seed))
        full = embed_dicke(psi)
        assert abs(np.linalg.norm(full) - 1) < 1e-12
        assert _max_abs(dicke_amplitudes(full) - psi) < 1e-12
        assert abs(chi_overlap(full) - 1) < 1e-12


class TestParity:
    def test_two_qubit_blocks(self):
        U = build_dense_floquet(TopParams(0, np.pi / 2, 2))
        Up, Um = parity_blocks(U, 2)
        assert Up.shape == (2, 2) and Um.shape == (2, 2)
        for B in (Up, Um):
            assert _max_abs(B.conj().T @ B - np.eye(2)) < 1e-8

    def test_spectrum_union(self):
        N = 8
        U = build_dense_floquet(TopParams(0.5, 4 * np.pi / 11, N),
                                DisorderRealization.draw(N, 1.0, 4))
        Up, Um = parity_blocks(U, N)
        union = np.sort(np.concatenate([eigenangles(Up), eigenangles(Um)]))
        assert _max_abs(union - eigenangles(U)) < 1e-8

    @pytest.mark.parametrize("N", [5, 6])
    def test_basis_orthonormal_and_block(self, N):
        U = build_dense_floquet(TopParams(2.0, 1.0, N), DisorderRealization.draw(N, 0.5, 2))
        for sector, block in zip((1, -1), parity_blocks(U, N)):
            V = parity_basis(N, sector)
            assert _max_abs(V.conj().T @ V - np.eye(2 ** (N - 1))) < 1e-12
            assert _max_abs(V.conj().T @ U @ V - block) < 1e-10

    def test_parity_eigenvalues(self):
        N = 4
        R = reduce(np.kron, [-1j * SY] * N)
        for sector in (1, -1):
            V = parity_basis(N, sector)
            assert _max_abs(R @ V - sector * V) < 1e-12

    def test_fast_block(self):
        N = 7
        P = TopParams(0.5, 4 * np.pi / 11, N)
        r = DisorderRealization.draw(N, 2.0, 8)
        Up, Um = parity_blocks(build_dense_floquet(P, r), N)
        assert _max_abs(floquet_parity_block(P, r, 1) - Up) < 1e-10
        assert _max_abs(floquet_parity_block(P, r, -1, rotation_parity_block(N, P.p, -1))
                        - Um) < 1e-10

    def test_fast_block_rejects_field(self):
        with pytest.raises(DomainError):
            floquet_parity_block(TopParams(1, 1, 4), DisorderRealization.draw(4, 1, 0, "field"))

    def test_symmetry_violation(self):
        N = 3
        U = site_op(expm(-0.3j * SX), 0, N)
        assert parity_commutator_norm(U, N) > 1e-3
        with pytest.raises(SymmetryError):
            parity_blocks(U, N)

    def test_y_axis_coherent_state_single_block(self):
        N = 6
        psi = embed_dicke(coherent_state(np.pi / 2, np.pi / 2, N))
        weights = [np.linalg.norm(parity_basis(N, s).conj().T @ psi) ** 2 for s in (1, -1)]
        assert sorted(weights) == pytest.approx([0.0, 1.0], abs=1e-12)

    def test_north_pole_splits_evenly(self):
        # R maps |0...0> to |1...1>, so the z-axis state is not a parity eigenstate
        N = 6
        psi = embed_dicke(coherent_state(0, 0, N))
        weights = [np.linalg.norm(parity_basis(N, s).conj().T @ psi) ** 2 for s in (1, -1)]
        assert weights == pytest.approx([0.5, 0.5], abs=1e-12)

    def test_x_frame_operator(self):
        N = 3
        U = build_dense_floquet(TopParams(1, 1, N))
        H = reduce(np.kron, [H1] * N)
        assert _max_abs(to_x_frame_operator(U) - H @ U @ H) < 1e-13


def test_entropy_through_full_engine_matches_dense():
    N = 6
    P = TopParams(6, 1.0, N)
    r = DisorderRealization.draw(N, 0.3, 5)
    U = build_dense_floquet(P, r)
    psi = embed_dicke(coherent_state(2.25, 1.1, N))
    F = FullFloquet(P, r)
    x = F.to_x_frame(psi)
    for _ in range(30):
        psi = U @ psi
        x = F.step_x_frame(x)
    # entanglement is unchanged by the product of Hadamards
    assert abs(single_qubit_entropy(x) - single_qubit_entropy(psi)) < 1e-12
