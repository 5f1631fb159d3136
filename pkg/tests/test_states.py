import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from oracles import BI_2H, BI_2R, BI_S, BI_S_CIRC, L, R, S2
from quantawed.qmath import EXACT_TOL, partial_trace, random_unitary
from quantawed.states import (
    Biphoton,
    PhotonState,
    Polarization,
    basis_state,
    biphoton_basis,
    biphoton_in_basis,
    cross_biphoton,
    epr_state,
    expand_in_product_basis,
    induced_rotation,
    orthogonal_of,
    pair_vector,
    symmetrize_pair,
    two_photon,
)


def photon(theta, phi):
    return PhotonState.from_angle(theta, phi)


angles = st.tuples(st.floats(0, np.pi), st.floats(0, 2 * np.pi))


class TestBasisStates:
    def test_h(self):
        assert_allclose(basis_state("H").amplitudes, [1, 0])

    def test_r_convention(self):
        assert_allclose(basis_state(Polarization.R).amplitudes, R)
        assert_allclose(basis_state("L").amplitudes, L)

    def test_circular_orthogonal(self):
        assert abs(basis_state("R").inner(basis_state("L"))) < 1e-15

    def test_unnormalized_rejected(self):
        with pytest.raises(ValueError):
            PhotonState([1, 1])

    def test_family_and_partner(self):
        assert Polarization.R.family == "circular"
        assert Polarization.V.partner is Polarization.H


class TestOrthogonal:
    def test_h_to_v(self):
        assert_allclose(orthogonal_of(basis_state("H")).amplitudes, [0, 1])

    def test_r_to_l(self):
        assert orthogonal_of(basis_state("R")).same_ray(basis_state("L"))

    def test_rotation_30deg(self):
        t = np.deg2rad(30)
        out = orthogonal_of(PhotonState([np.cos(t), np.sin(t)]))
        assert out.same_ray(PhotonState([-np.sin(t), np.cos(t)]))

    @given(angles)
    def test_orthogonal_and_canonical(self, a):
        s = photon(*a)
        o = orthogonal_of(s)
        assert abs(s.inner(o)) < 1e-12
        first = next(x for x in o.amplitudes if abs(x) > EXACT_TOL)
        assert abs(first.imag) < 1e-12 and first.real > 0


class TestEPR:
    def test_amplitudes(self):
        assert_allclose(epr_state(), [1 / S2, 0, 0, -1 / S2])

    def test_circular_expansion_plus_sign(self):
        c = expand_in_product_basis(epr_state(), "circular")
        assert abs(c["RR"] - 1 / S2) < 1e-12
        assert abs(c["LL"] - 1 / S2) < 1e-12
        assert abs(c["RL"]) < 1e-12 and abs(c["LR"]) < 1e-12

    def test_reduced_states(self):
        rho = np.outer(epr_state(), epr_state().conj())
        for t in ("first", "second"):
            assert_allclose(partial_trace(rho, t), np.eye(2) / 2, atol=1e-15)

    def test_minus_sign_under_rephased_left(self):
        # with L' = iL the circular coordinates take the same form as the plane ones
        u = np.column_stack([R, 1j * L])
        coords = np.kron(u, u).conj().T @ epr_state()
        assert_allclose(coords, epr_state(), atol=1e-15)

    @pytest.mark.parametrize("basis", ["plane", "circular"])
    def test_same_basis_outcomes_agree(self, basis):
        c = expand_in_product_basis(epr_state(), basis)
        labels = list(c)
        p_equal = sum(abs(c[k]) ** 2 for k in labels if k[0] == k[1])
        assert abs(p_equal - 1) < 1e-12


class TestSymmetrize:
    def test_identical(self):
        b, w = symmetrize_pair(basis_state("H"), basis_state("H"))
        assert_allclose(b.amplitudes, BI_2H)
        assert abs(w - 1) < 1e-15

    def test_hv(self):
        b, w = symmetrize_pair(basis_state("H"), basis_state("V"))
        assert_allclose(b.amplitudes, BI_S)
        assert abs(w - 0.5) < 1e-15

    def test_rl(self):
        b, w = symmetrize_pair(basis_state("R"), basis_state("L"))
        assert b.same_ray(Biphoton(BI_S_CIRC))
        assert abs(w - 0.5) < 1e-15

    @given(angles, angles)
    @settings(max_examples=50)
    def test_symmetric_in_arguments(self, a, b):
        x, y = photon(*a), photon(*b)
        b1, w1 = symmetrize_pair(x, y)
        b2, w2 = symmetrize_pair(y, x)
        assert_allclose(b1.amplitudes, b2.amplitudes, atol=1e-12)
        assert abs(w1 - w2) < 1e-15

    @given(angles)
    def test_self_weight_one(self, a):
        x = photon(*a)
        assert abs(symmetrize_pair(x, x)[1] - 1) < 1e-12


class TestBiphotonBasis:
    def test_2h_in_circular(self):
        c = biphoton_in_basis(two_photon("H"), "circular")
        assert abs(abs(c[0]) ** 2 - 0.25) < 1e-12
        assert abs(np.linalg.norm(c) - 1) < 1e-12

    def test_2r_in_plane(self):
        assert_allclose(two_photon("R").amplitudes, BI_2R, atol=1e-15)
        assert_allclose(biphoton_in_basis(two_photon("R"), "plane"), BI_2R, atol=1e-15)

    @pytest.mark.parametrize("basis", ["plane", "circular"])
    def test_unitary(self, basis):
        u = biphoton_basis(basis)
        assert np.max(np.abs(u.conj().T @ u - np.eye(3))) < 1e-12

    def test_cross_biphoton_circular(self):
        assert_allclose(cross_biphoton("circular").amplitudes, BI_S_CIRC, atol=1e-15)

    def test_induced_rotation_unitary(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            w = induced_rotation(random_unitary(2, rng))
            assert np.max(np.abs(w.conj().T @ w - np.eye(3))) < 1e-12

    def test_pair_vector_roundtrip(self):
        b = two_photon("R")
        assert_allclose(Biphoton.from_pair_vector(b.pair_vector()).amplitudes, b.amplitudes)
        assert_allclose(b.pair_vector(), pair_vector("R", "R"), atol=1e-15)

    def test_antisymmetric_rejected(self):
        with pytest.raises(ValueError):
            Biphoton.from_pair_vector([0, 1 / S2, -1 / S2, 0])
