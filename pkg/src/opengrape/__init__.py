"""Gradient optimal control for unitary gates in open (relaxing) quantum
systems, with the four-qubit Bell-encoded model systems, controllability
analysis, protected-subspace diagnostics and Trotter decoupling baselines."""

__version__ = "0.1.0"

from .linalg import expm, eig_hermitian, hs_inner
from .pauli import (PauliString, pauli_operator, string_sum, parse_string_sum,
                    vec, unvec, ad_superop, adj_superop, pauli_basis)
from .relaxation import (RelaxationModel, ModeClassification,
                         double_commutator_superop, spherical_tensor_t2,
                         gamma_pure_t2, gamma_full, classify_modes,
                         blocks_in_gamma_basis, choi_matrix)
from .systems import (ControlSystem, EncodingMap, system_I, system_II,
                      bell_encoding, lift_logical_gate, restrict_to_protected, CNOT)
from .liealg import LieClosureResult, lie_closure
from .propagation import (ControlSequence, PropagationRecord, save_sequence,
                          load_sequence, propagate_closed, propagate_open,
                          fidelity_phase_sensitive, fidelity_phase_invariant,
                          fidelity_open, fidelity_projected,
                          trajectory_projections, fidelity_envelopes)
from .grape import OptimizerConfig, OptimizationResult, gradient_open, gradient_closed, optimize
from .experiments import (TopCurve, TopCurveEntry, derive_seed, top_curve,
                          cross_evaluate, compare_open_vs_time_optimal)
from .trotter import (TrotterPlan, trotter_reduce, quasi_period_search,
                      cnot_plan, compile_trotter_cnot, control_power,
                      QUASI_PERIODIC_JXX)
