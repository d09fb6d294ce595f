import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from opengrape.linalg import expm, hs_inner
from opengrape.pauli import (PauliString, pauli_operator, string_sum, parse_string_sum,
                             vec, unvec, ad_superop, adj_superop,
                             pauli_basis, to_real_superop, from_real_superop)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def test_pauli_operator_zz():
    assert np.allclose(pauli_operator("zz"), np.diag([0.5, -0.5, -0.5, 0.5]))


def test_pauli_operator_identity_label():
    assert np.allclose(pauli_operator("11"), 0.5 * np.eye(4))


def test_pauli_operator_z_difference():
    got = string_sum([(1.0, "z1"), (-1.0, "1z")])
    assert np.allclose(got, np.diag([0.0, 1.0, -1.0, 0.0]))


def test_pauli_string_validation():
    with pytest.raises(ValueError):
        PauliString("")
    with pytest.raises(ValueError):
        PauliString("xq")


def test_parse_string_sum():
    terms = parse_string_sum("2.0 * xx11 + 1.0 * 1zz1")
    assert terms == [(2.0, "xx11"), (1.0, "1zz1")]
    terms = parse_string_sum("z111 - 1z11")
    assert terms == [(1.0, "z111"), (-1.0, "1z11")]
    assert np.allclose(string_sum(parse_string_sum("1.5e0*xy - 0.5*yx")),
                       1.5 * pauli_operator("xy") - 0.5 * pauli_operator("yx"))
    with pytest.raises(ValueError):
        parse_string_sum("2.0 * xq")
    with pytest.raises(ValueError):
        parse_string_sum("xx + yyy")


LABELS2 = [a + b for a in "1xyz" for b in "1xyz"]


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(LABELS2), st.sampled_from(LABELS2))
def test_distinct_strings_are_orthogonal(la, lb):
    inner = hs_inner(pauli_operator(la), pauli_operator(lb))
    if la == lb:
        assert inner != pytest.approx(0.0)
    else:
        assert inner == pytest.approx(0.0)


def test_vec_basis_state():
    rho = np.zeros((2, 2), dtype=complex)
    rho[0, 0] = 1.0
    assert np.allclose(vec(rho), [1, 0, 0, 0])


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_vec_column_stacking_identity(seed):
    rng = np.random.default_rng(seed)
    A, rho, B = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
                 for _ in range(3))
    assert np.allclose(np.kron(B.T, A) @ vec(rho), vec(A @ rho @ B))


def test_unvec_round_trip():
    assert np.allclose(unvec(vec(SY)), SY)
    with pytest.raises(ValueError):
        unvec(np.arange(5))


def test_ad_superop_identity_is_zero():
    assert np.allclose(ad_superop(np.eye(4)), 0.0)


def test_ad_superop_commutator_action():
    # [sz, sx] = 2i sy
    got = ad_superop(SZ) @ vec(SX)
    assert np.allclose(got, 2j * vec(SY))


def test_ad_superop_spectrum_of_diagonal():
    a, b = 0.7, -0.4
    w = np.linalg.eigvals(ad_superop(np.diag([a, b])))
    assert np.allclose(sorted(w.real), sorted([0.0, 0.0, a - b, b - a]))
    assert np.allclose(w.imag, 0.0)


def test_ad_annihilates_identity_and_itself():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    H = A + A.conj().T
    adH = ad_superop(H)
    assert np.linalg.norm(adH @ vec(np.eye(4))) < 1e-12
    assert np.linalg.norm(adH @ vec(H)) < 1e-12


def test_adj_superop_identity_and_flip():
    assert np.allclose(adj_superop(np.eye(2)), np.eye(4))
    ket0 = np.zeros((2, 2), dtype=complex)
    ket0[0, 0] = 1.0
    ket1 = np.zeros((2, 2), dtype=complex)
    ket1[1, 1] = 1.0
    assert np.allclose(adj_superop(SX) @ vec(ket0), vec(ket1))


def test_adj_superop_rejects_non_unitary():
    with pytest.raises(ValueError):
        adj_superop(2.0 * np.eye(2))


def test_adj_homomorphism():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    U, _ = np.linalg.qr(A)
    B = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    W, _ = np.linalg.qr(B)
    assert np.allclose(adj_superop(U @ W), adj_superop(U) @ adj_superop(W))


@pytest.mark.parametrize("dim", [4, 16])
def test_exponential_intertwining(dim):
    # e^{-i t ad_H} = Ad_{e^{-itH}} for random Hermitian H
    rng = np.random.default_rng(dim)
    t = 0.37
    for _ in range(100):
        A = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        H = (A + A.conj().T) / 2
        left = expm(-1j * t * ad_superop(H))
        right = adj_superop(expm(-1j * t * H))
        assert np.linalg.norm(left - right) < 1e-10


def test_real_representation_round_trip():
    rng = np.random.default_rng(8)
    Q = pauli_basis(2)
    assert np.allclose(Q.conj().T @ Q, np.eye(16))
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    U, _ = np.linalg.qr(A)
    S = adj_superop(U)
    R = to_real_superop(S, Q)
    assert R.dtype == np.float64
    assert np.allclose(from_real_superop(R, Q), S)
    # -i ad_H is real antisymmetric in the Pauli basis
    H = (A + A.conj().T) / 2
    R_ad = to_real_superop(-1j * ad_superop(H), Q)
    assert np.linalg.norm(R_ad + R_ad.T) < 1e-12
