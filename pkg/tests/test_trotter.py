import numpy as np
import pytest

from opengrape.linalg import expm
from opengrape.pauli import string_sum
from opengrape.propagation import (ControlSequence, fidelity_phase_invariant,
                                   propagate_closed)
from opengrape.systems import ControlSystem, system_I, system_II
from opengrape.trotter import (QUASI_PERIODIC_JXX, TrotterPlan, cnot_plan,
                               compile_trotter_cnot, control_power,
                               quasi_period_search, trotter_reduce)


class TestTrotterReduce:
    def test_commuting_case_exact_at_n1(self):
        # drift whose conjugated half equals itself: zz-only inter-pair term
        sys_c = ControlSystem(4, string_sum([(1.0, "1zz1")]),
                              system_II().controls)
        approx, exact = trotter_reduce(sys_c, 1)
        assert np.linalg.norm(approx - exact) < 1e-12

    def test_first_order_error_scaling(self):
        s = system_II()
        errs = {}
        for n in (4, 8, 16, 32):
            approx, exact = trotter_reduce(s, n)
            errs[n] = np.linalg.norm(approx - exact)
        for n in (4, 8, 16):
            ratio = errs[n] / errs[2 * n]
            assert 1.7 <= ratio <= 2.3

    def test_large_n_fidelity(self):
        s = system_II()
        approx, exact = trotter_reduce(s, 64)
        assert fidelity_phase_invariant(approx, exact) >= 0.99

    def test_rejects_bad_n(self):
        with pytest.raises(ValueError):
            trotter_reduce(system_II(), 0)


class TestQuasiPeriodSearch:
    def test_exact_periodicity_single_qubit(self):
        # drift z-string: eigenvalues +-1/2, exact period 1 s; the target
        # exp(+i pi/4 H) recurs at t = k - 1/8
        from opengrape.pauli import pauli_operator
        sys1 = ControlSystem(1, pauli_operator("z"), [pauli_operator("x")])
        target = expm(1j * (np.pi / 4) * sys1.drift)
        peaks = quasi_period_search(sys1, target, (0.2, 3.0), 1e-3)
        assert peaks[0][1] > 1 - 1e-12
        tops = sorted(t for t, f in peaks if f > 1 - 1e-9)
        assert np.allclose(tops, [0.875, 1.875, 2.875], atol=1e-9)

    def test_system_II_at_2p23_has_no_good_recurrence(self):
        s = system_II(J_xx=2.23)
        target = expm(1j * (np.pi / 4) * s.drift)
        peaks = quasi_period_search(s, target, (0.05, 30.0), 5e-4)
        assert peaks[0][1] < 1 - 1e-6

    def test_validation(self):
        s = system_II()
        with pytest.raises(ValueError):
            quasi_period_search(s, np.eye(16), (0.0, 1.0), -1.0)
        with pytest.raises(ValueError):
            quasi_period_search(s, np.eye(16), (1.0, 1.0), 1e-3)


class TestCompiledCnot:
    def test_plan_structure_and_duration(self):
        plan = cnot_plan()
        assert plan.n1 == 2 and plan.n2 == 64
        assert plan.J_xx == pytest.approx(np.sqrt(5.0))
        seq = compile_trotter_cnot(plan)
        assert seq.durations is not None
        assert seq.duration == pytest.approx(plan.duration, rel=1e-12)
        assert 24.2 <= seq.duration <= 32.8
        assert control_power(seq) == pytest.approx(5e5)

    def test_wait_budget_consistency(self):
        with pytest.raises(ValueError):
            cnot_plan(n1=2, wait_periods=(3,))

    def test_commensurability_check(self):
        plan = cnot_plan(n2=4)
        with pytest.raises(ValueError):
            compile_trotter_cnot(plan, dt=0.2)

    def test_decoupling_quality_grows_with_n2(self):
        # below ~n2 = 32 the wait decoupling breaks down entirely; the gate
        # quality must recover monotonically as the pulse train refines
        from opengrape.propagation import fidelity_projected
        from opengrape.systems import CNOT, bell_encoding, lift_logical_gate
        enc = bell_encoding()
        _, F_target = lift_logical_gate(CNOT, enc)
        scores = []
        for n2 in (24, 32, 48):
            plan = cnot_plan(n1=2, n2=n2)
            seq = compile_trotter_cnot(plan)
            s = system_II(J_xx=plan.J_xx, J_xyz=plan.J_int)
            U = propagate_closed(s, seq).final
            scores.append(fidelity_projected(np.kron(U.conj(), U), F_target,
                                             enc.projector))
        assert scores[0] < scores[1] < scores[2]
        assert scores[2] > 0.7


def test_control_power_examples():
    assert control_power(ControlSequence(dt=1.0, amplitudes=np.zeros((3, 2)))) == 0.0
    assert control_power(ControlSequence(dt=1.0, amplitudes=[[50.0, 0.0]])) == 50.0
