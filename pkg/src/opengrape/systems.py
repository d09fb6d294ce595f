"""The four-qubit model systems, the Bell-state encoding of two logical
qubits, and the protected-subspace machinery.

System I couples two XX-pairs by an Ising zz term and is fully controllable
on the protected operator subspace; System II upgrades the inter-pair
coupling to isotropic Heisenberg, which leaks out of the protected block.
Both share the antisymmetric z-difference controls.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pauli import string_sum, vec
from .relaxation import RelaxationModel

__all__ = [
    "ControlSystem", "EncodingMap",
    "system_I", "system_II", "bell_encoding",
    "lift_logical_gate", "restrict_to_protected",
    "CNOT", "by_name",
]

CNOT = np.array([[1, 0, 0, 0],
                 [0, 1, 0, 0],
                 [0, 0, 0, 1],
                 [0, 0, 1, 0]], dtype=complex)


@dataclass
class ControlSystem:
    """Drift + control Hamiltonians (Hz) with an optional relaxation model."""
    n_qubits: int
    drift: np.ndarray
    controls: list[np.ndarray]
    relaxation: RelaxationModel | None = None
    name: str = ""

    def __post_init__(self):
        dim = 2 ** self.n_qubits
        for H in [self.drift, *self.controls]:
            if H.shape != (dim, dim):
                raise ValueError("operator dimensions inconsistent with qubit count")
            if np.linalg.norm(H - H.conj().T) > 1e-10 * max(1.0, np.linalg.norm(H)):
                raise ValueError("drift and controls must be Hermitian")

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    def with_relaxation(self, model: RelaxationModel | None) -> "ControlSystem":
        return ControlSystem(self.n_qubits, self.drift, self.controls,
                             relaxation=model, name=self.name)


def _controls_4q() -> list[np.ndarray]:
    return [
        string_sum([(1.0, "z111"), (-1.0, "1z11")]),
        string_sum([(1.0, "11z1"), (-1.0, "111z")]),
    ]


def system_I(J_xx: float = 2.0, J_zz: float = 1.0,
             relaxation: RelaxationModel | None = None) -> ControlSystem:
    """XX pairs plus Ising zz inter-pair coupling; z-difference controls."""
    drift = string_sum([
        (J_xx, "xx11"), (J_xx, "11xx"), (J_xx, "yy11"), (J_xx, "11yy"),
        (J_zz, "1zz1"),
    ])
    return ControlSystem(4, drift, _controls_4q(), relaxation, name="system-I")


def system_II(J_xx: float = 2.0, J_xyz: float = 1.0,
              relaxation: RelaxationModel | None = None) -> ControlSystem:
    """XX pairs plus isotropic Heisenberg inter-pair coupling."""
    drift = string_sum([
        (J_xx, "xx11"), (J_xx, "11xx"), (J_xx, "yy11"), (J_xx, "11yy"),
        (J_xyz, "1xx1"), (J_xyz, "1yy1"), (J_xyz, "1zz1"),
    ])
    return ControlSystem(4, drift, _controls_4q(), relaxation, name="system-II")


def by_name(name: str, **kwargs) -> ControlSystem:
    builders = {"system-I": system_I, "system-II": system_II,
                "system-i": system_I, "system-ii": system_II}
    if name not in builders:
        raise ValueError(f"unknown system {name!r}; know {sorted(set(builders))}")
    return builders[name](**kwargs)


@dataclass
class EncodingMap:
    """Bell encoding of two logical qubits into four physical ones.

    isometry: 16x4, columns are the encoded logical basis states.
    projector: 256x256 rank-16 orthogonal projector onto the protected
        operator subspace (the span of encoded outer products) in vec form.
    basis: 256x16 isometry whose columns are vec's of an orthonormal
        Hermitian operator basis of the protected subspace (diagonal outer
        products first for each lexicographic index pair (i <= j), then the
        symmetric and antisymmetric Hermitian combinations).
    """
    isometry: np.ndarray
    projector: np.ndarray
    basis: np.ndarray
    logical_dim: int = 4


def _hermitian_pair_basis(d: int) -> list[np.ndarray]:
    out = []
    for i in range(d):
        for j in range(i, d):
            E = np.zeros((d, d), dtype=complex)
            if i == j:
                E[i, i] = 1.0
                out.append(E)
            else:
                S = np.zeros((d, d), dtype=complex)
                S[i, j] = S[j, i] = 1 / np.sqrt(2)
                A = np.zeros((d, d), dtype=complex)
                A[i, j] = 1j / np.sqrt(2)
                A[j, i] = -1j / np.sqrt(2)
                out.extend([S, A])
    return out


def bell_encoding() -> EncodingMap:
    """|0>_L = (|01>+|10>)/sqrt2, |1>_L = (|01>-|10>)/sqrt2 on each pair."""
    psi_plus = np.zeros(4, dtype=complex)
    psi_plus[[1, 2]] = 1 / np.sqrt(2)
    psi_minus = np.zeros(4, dtype=complex)
    psi_minus[1], psi_minus[2] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    bell = {0: psi_plus, 1: psi_minus}
    V = np.zeros((16, 4), dtype=complex)
    for a in (0, 1):
        for b in (0, 1):
            V[:, 2 * a + b] = np.kron(bell[a], bell[b])
    W = np.kron(V.conj(), V)               # 256x16 isometry onto span{vec(V X V^dag)}
    projector = W @ W.conj().T
    basis = np.stack([W @ vec(M) for M in _hermitian_pair_basis(4)], axis=1)
    return EncodingMap(isometry=V, projector=projector, basis=basis)


def lift_logical_gate(U_L: np.ndarray, encoding: EncodingMap | None = None
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Lift a 4x4 logical unitary to the physical space.

    Returns (U_phys, F_target): U_phys acts as U_L through the isometry and
    as the identity on the 12-dimensional complement (any completion works
    since fidelities are evaluated through the protected projector); F_target
    is its conjugation superoperator.
    """
    if encoding is None:
        encoding = bell_encoding()
    U_L = np.asarray(U_L)
    if np.linalg.norm(U_L.conj().T @ U_L - np.eye(4)) > 1e-10:
        raise ValueError("logical gate must be unitary")
    V = encoding.isometry
    P = V @ V.conj().T
    U_phys = V @ U_L @ V.conj().T + (np.eye(16) - P)
    F_target = np.kron(U_phys.conj(), U_phys)
    return U_phys, F_target


def restrict_to_protected(S: np.ndarray, encoding: EncodingMap | None = None,
                          check_invariance: bool = False, tol: float = 1e-9) -> np.ndarray:
    """Compress a 256x256 superoperator to the 16-dim protected subspace.

    Uses the Hermitian-pair basis of the encoding, so a commutator
    superoperator ad_H compresses to an anti-Hermitian matrix and a
    relaxation superoperator to a real symmetric one.
    """
    if encoding is None:
        encoding = bell_encoding()
    W = encoding.basis
    if S.shape != (W.shape[0], W.shape[0]):
        raise ValueError(f"expected a {W.shape[0]}x{W.shape[0]} superoperator")
    if check_invariance:
        leak = np.linalg.norm(S @ encoding.projector
                              - encoding.projector @ S @ encoding.projector)
        if leak > tol:
            raise ValueError(f"superoperator does not preserve the protected "
                             f"subspace (leakage norm {leak:.2e})")
    return W.conj().T @ S @ W
