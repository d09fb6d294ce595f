import numpy as np
import pytest

from opengrape.linalg import expm
from opengrape.pauli import adj_superop, pauli_operator, string_sum, vec
from opengrape.relaxation import RelaxationModel, classify_modes, double_commutator_superop, gamma_pure_t2, gamma_full
from opengrape.propagation import (ControlSequence, LiouvilleEngine, TWO_PI,
                                   fidelity_envelopes, fidelity_open,
                                   fidelity_phase_invariant, fidelity_phase_sensitive,
                                   fidelity_projected, load_sequence,
                                   propagate_closed, propagate_open, save_sequence,
                                   trajectory_projections)
from opengrape.systems import (CNOT, ControlSystem, bell_encoding,
                               lift_logical_gate, system_II)

SX = np.array([[0, 1], [1, 0]], dtype=complex)


def one_qubit_system(relaxation=None):
    return ControlSystem(1, np.zeros((2, 2), dtype=complex),
                         [pauli_operator("x")], relaxation=relaxation)


def random_two_qubit_open(seed=0, rate=2.0):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    drift = (A + A.conj().T) / 4
    controls = [string_sum([(1.0, "x1")]), string_sum([(1.0, "1y")])]
    G = rate * double_commutator_superop(pauli_operator("zz"))
    model = RelaxationModel(terms=[(pauli_operator("zz"), rate)], gamma=G)
    return ControlSystem(2, drift, controls, relaxation=model)


class TestControlSequence:
    def test_validation(self):
        with pytest.raises(ValueError):
            ControlSequence(dt=-1.0, amplitudes=[[0.0]])
        with pytest.raises(ValueError):
            ControlSequence(dt=1.0, amplitudes=[[np.nan]])
        with pytest.raises(ValueError):
            ControlSequence(dt=1.0, amplitudes=[[2.0]], u_max=1.0)
        with pytest.raises(ValueError):
            ControlSequence(dt=1.0, amplitudes=[[1.0], [1.0]], durations=[1.0])

    def test_duration(self):
        seq = ControlSequence(dt=0.5, amplitudes=np.zeros((4, 2)))
        assert seq.duration == pytest.approx(2.0)
        seq = ControlSequence(dt=0.5, amplitudes=np.zeros((2, 1)),
                              durations=[0.5, 1.5])
        assert seq.duration == pytest.approx(2.0)

    def test_file_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        seq = ControlSequence(dt=0.05, amplitudes=rng.uniform(-3, 3, (7, 2)))
        path = tmp_path / "pulse.txt"
        save_sequence(seq, path)
        back = load_sequence(path)
        assert back.dt == seq.dt
        assert np.array_equal(back.amplitudes, seq.amplitudes)
        assert back.durations is None

    def test_variable_duration_round_trip(self, tmp_path):
        seq = ControlSequence(dt=1e-6, amplitudes=[[5e5, 0.0], [0.0, 0.0]],
                              durations=[1e-6, 1.875])
        path = tmp_path / "pulse_var.txt"
        save_sequence(seq, path)
        back = load_sequence(path)
        assert np.array_equal(back.durations, seq.durations)
        assert np.array_equal(back.amplitudes, seq.amplitudes)


class TestClosed:
    def test_identity(self):
        sys1 = one_qubit_system()
        seq = ControlSequence(dt=1.0, amplitudes=np.zeros((3, 1)))
        assert np.allclose(propagate_closed(sys1, seq).final, np.eye(2))

    def test_full_pi_rotation(self):
        # u = 0.5 Hz for 1 s on the half-convention x string: exp(-i pi sx/2)
        sys1 = one_qubit_system()
        seq = ControlSequence(dt=1.0, amplitudes=[[0.5]])
        U = propagate_closed(sys1, seq).final
        assert np.allclose(U, -1j * SX, atol=1e-12)

    def test_drift_only_matches_expm(self):
        s = system_II(J_xx=2.23)
        seq = ControlSequence(dt=0.199, amplitudes=np.zeros((20, 2)))
        U = propagate_closed(s, seq).final
        ref = expm(-1j * TWO_PI * s.drift * 3.98)
        assert np.linalg.norm(U - ref) < 1e-10

    def test_slot_ordering(self):
        # slot 1 acts first: U = U2 U1
        sys1 = ControlSystem(1, pauli_operator("z"), [pauli_operator("x")])
        seq = ControlSequence(dt=0.3, amplitudes=[[0.8], [0.0]])
        U = propagate_closed(sys1, seq).final
        U1 = expm(-1j * TWO_PI * 0.3 * (sys1.drift + 0.8 * sys1.controls[0]))
        U2 = expm(-1j * TWO_PI * 0.3 * sys1.drift)
        assert np.allclose(U, U2 @ U1, atol=1e-12)

    def test_control_count_mismatch(self):
        with pytest.raises(ValueError):
            propagate_closed(one_qubit_system(),
                             ControlSequence(dt=1.0, amplitudes=[[1.0, 2.0]]))


class TestOpen:
    def test_zero_gamma_equals_lifted_closed(self):
        sys2 = random_two_qubit_open(seed=3, rate=0.0)
        rng = np.random.default_rng(5)
        seq = ControlSequence(dt=0.05, amplitudes=rng.uniform(-4, 4, (12, 2)))
        F = propagate_open(sys2, seq).final
        U = propagate_closed(sys2, seq).final
        assert np.linalg.norm(F - adj_superop(U)) < 1e-9

    def test_eigenmode_decay(self):
        # H = 0: a coherence between zz eigenvalues decays at its gamma rate
        sys2 = random_two_qubit_open(seed=0, rate=2.0)
        sys2 = ControlSystem(2, np.zeros((4, 4), dtype=complex), sys2.controls,
                             relaxation=sys2.relaxation)
        rho = np.zeros((4, 4), dtype=complex)
        rho[0, 1] = 1.0     # rate = 2.0 * 1 (unit zz eigenvalue gap)
        t = 0.7
        seq = ControlSequence(dt=t / 7, amplitudes=np.zeros((7, 2)))
        F = propagate_open(sys2, seq).final
        assert np.allclose(F @ vec(rho), np.exp(-2.0 * t) * vec(rho), atol=1e-10)

    def test_trace_preservation_and_contraction(self):
        sys2 = random_two_qubit_open(seed=11)
        rng = np.random.default_rng(13)
        seq = ControlSequence(dt=0.1, amplitudes=rng.uniform(-3, 3, (10, 2)))
        F = propagate_open(sys2, seq).final
        one = vec(np.eye(4)).conj()
        assert np.abs(one @ F - one).max() < 1e-8
        assert np.abs(np.linalg.eigvals(F)).max() <= 1 + 1e-8

    def test_requires_relaxation(self):
        with pytest.raises(ValueError):
            propagate_open(one_qubit_system(),
                           ControlSequence(dt=1.0, amplitudes=[[0.0]]))

    def test_concatenation_semigroup(self):
        sys2 = random_two_qubit_open(seed=17)
        rng = np.random.default_rng(19)
        a = rng.uniform(-2, 2, (4, 2))
        b = rng.uniform(-2, 2, (3, 2))
        Fa = propagate_open(sys2, ControlSequence(dt=0.08, amplitudes=a)).final
        Fb = propagate_open(sys2, ControlSequence(dt=0.08, amplitudes=b)).final
        Fab = propagate_open(sys2, ControlSequence(dt=0.08,
                                                   amplitudes=np.vstack([a, b]))).final
        assert np.linalg.norm(Fab - Fb @ Fa) < 1e-10


class TestFidelities:
    def test_phase_sensitive(self):
        U = np.diag([1.0, 1.0]).astype(complex)
        assert fidelity_phase_sensitive(U, U) == pytest.approx(1.0)
        assert fidelity_phase_sensitive(-U, U) == pytest.approx(-1.0)
        assert fidelity_phase_sensitive(SX, np.diag([1, -1]).astype(complex)) == pytest.approx(0.0)

    def test_phase_invariant(self):
        rng = np.random.default_rng(23)
        A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        U, _ = np.linalg.qr(A)
        assert fidelity_phase_invariant(np.exp(1j * 0.7) * U, U) == pytest.approx(1.0)
        assert fidelity_phase_invariant(
            np.kron(SX, np.eye(2)), np.kron(np.diag([1, -1]).astype(complex), np.eye(2))
        ) == pytest.approx(0.0)

    def test_phase_invariant_two_paths_agree(self):
        rng = np.random.default_rng(29)
        for _ in range(100):
            A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            B = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            U, _ = np.linalg.qr(A)
            W, _ = np.linalg.qr(B)
            direct = fidelity_phase_invariant(U, W)
            via_super = np.real(np.trace(adj_superop(W).conj().T @ adj_superop(U))) / 16
            assert direct == pytest.approx(via_super, abs=1e-12)

    def test_open_fidelity_unitary_case(self):
        rng = np.random.default_rng(31)
        A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        U, _ = np.linalg.qr(A)
        F = adj_superop(U)
        assert fidelity_open(F, F) == pytest.approx(1.0)
        assert fidelity_open(F, adj_superop(np.exp(0.3j) * U)) == pytest.approx(1.0)

    def test_open_fidelity_uniform_decay_closed_form(self):
        # gamma * (1 - projector onto vec(identity)/norm): uniform decay of the
        # traceless sector; fidelity to identity = (1 + (N^2-1) e^{-gt}) / N^2
        N = 4
        one = vec(np.eye(N)) / np.sqrt(N)
        P = np.outer(one, one.conj())
        g, t = 1.7, 0.9
        F = expm(-g * t * (np.eye(N * N) - P))
        expected = (1 + (N ** 2 - 1) * np.exp(-g * t)) / N ** 2
        assert fidelity_open(F, np.eye(N * N)) == pytest.approx(expected, abs=1e-12)

    def test_projected_reduces_to_open_on_full_space(self):
        rng = np.random.default_rng(37)
        A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        U, _ = np.linalg.qr(A)
        F = adj_superop(U)
        full = np.eye(16)
        assert fidelity_projected(F, F, full) == pytest.approx(1.0)
        G = adj_superop(np.linalg.qr(rng.standard_normal((4, 4))
                                     + 1j * rng.standard_normal((4, 4)))[0])
        assert fidelity_projected(F, G, full) == pytest.approx(fidelity_open(F, G))

    def test_projected_cnot_identity_value(self):
        # independent evaluation: (1/16) Re tr(Pi^T Ad_CNOT^dag Pi)
        enc = bell_encoding()
        _, F_target = lift_logical_gate(CNOT, enc)
        got = fidelity_projected(np.eye(256), F_target, enc.projector)
        oracle = np.real(np.trace(enc.projector.T @ F_target.conj().T
                                  @ enc.projector)) / 16
        assert got == pytest.approx(oracle, abs=1e-12)
        assert got == pytest.approx(0.25, abs=1e-12)  # |tr CNOT|^2 / 16

    def test_projected_validates_projector(self):
        with pytest.raises(ValueError):
            fidelity_projected(np.eye(4), np.eye(4), 2 * np.eye(4))


class TestTrajectories:
    def test_gamma_eigenstate_stays(self):
        model = gamma_pure_t2()
        sys4 = ControlSystem(4, np.zeros((16, 16), dtype=complex),
                             [pauli_operator("z111"), pauli_operator("111z")],
                             relaxation=model)
        enc = bell_encoding()
        rows = trajectory_projections(
            sys4, ControlSequence(dt=0.2, amplitudes=np.zeros((5, 2))), enc)
        assert all(r["p_fast"] < 1e-12 for r in rows)

    def test_system_II_drift_leaks_fast(self):
        sys4 = system_II(relaxation=gamma_full())
        enc = bell_encoding()
        rows = trajectory_projections(
            sys4, ControlSequence(dt=0.1, amplitudes=np.zeros((10, 2))), enc)
        late = [r for r in rows if r["t"] > 0.9]
        assert max(r["p_fast"] for r in late) > 1e-3

    def test_parseval(self):
        sys4 = system_II(relaxation=gamma_full())
        enc = bell_encoding()
        rows = trajectory_projections(
            sys4, ControlSequence(dt=0.25, amplitudes=np.zeros((2, 2))), enc)
        for r in rows:
            assert r["p_slow"] + r["p_fast"] <= 1.0 + 1e-9


def test_fidelity_envelopes():
    gammas = np.array([0.5, 0.5, 0.5])
    env = fidelity_envelopes([(1.0, 0.9), (2.0, 0.8)], gammas)
    for T, lo, hi in env:
        assert lo == pytest.approx(hi)
    env = fidelity_envelopes([(1.0, 1.0)], np.array([0.0, 0.0]))
    assert env[0][1] == env[0][2] == pytest.approx(1.0)
    env = fidelity_envelopes([(1.0, 1.0)], np.array([0.0, 2.0]))
    assert env[0][2] > env[0][1]
    with pytest.raises(ValueError):
        fidelity_envelopes([(1.0, 1.0)], np.array([-0.1]))
