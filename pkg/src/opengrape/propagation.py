"""Piecewise-constant propagation of closed and open dynamics, fidelity
functionals, trajectory projections and fidelity envelopes.

Units: Hamiltonians and control amplitudes are plain frequencies in Hz and
every propagator exponent carries an explicit 2*pi, i.e. one time slot of
length dt applies exp(-i 2pi H dt) (closed) or exp(-(i 2pi ad_H + Gamma) dt)
(open).  A 0.5 Hz control on a single-letter Pauli string (which carries the
global 1/2) held for 1 s is therefore a full pi rotation: exp(-i pi sigma/2).

Open-system propagation runs internally in the real Pauli-basis
representation where the generator is a real 4^n x 4^n matrix; results are
returned in the complex vec convention.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .linalg import expm
from .pauli import pauli_basis, real_ad_generator, to_real_superop
from .relaxation import ModeClassification, classify_modes
from .systems import ControlSystem, EncodingMap

__all__ = [
    "TWO_PI", "ControlSequence", "PropagationRecord",
    "save_sequence", "load_sequence",
    "propagate_closed", "propagate_open", "LiouvilleEngine",
    "fidelity_phase_sensitive", "fidelity_phase_invariant",
    "fidelity_open", "fidelity_projected",
    "trajectory_projections", "fidelity_envelopes",
]

TWO_PI = 2.0 * np.pi


@dataclass
class ControlSequence:
    """A uniform-dt table of control amplitudes in Hz (slots x controls).

    `durations` optionally overrides dt per slot (used by compiled bang-bang
    sequences, where microsecond pulses alternate with second-scale delays).
    """
    dt: float
    amplitudes: np.ndarray
    durations: np.ndarray | None = None
    u_max: float | None = None

    def __post_init__(self):
        self.amplitudes = np.atleast_2d(np.asarray(self.amplitudes, dtype=float))
        if self.dt <= 0 and self.durations is None:
            raise ValueError("dt must be positive")
        if not np.all(np.isfinite(self.amplitudes)):
            raise ValueError("amplitudes must be finite")
        if self.durations is not None:
            self.durations = np.asarray(self.durations, dtype=float)
            if self.durations.shape != (self.amplitudes.shape[0],):
                raise ValueError("durations must have one entry per slot")
            if np.any(self.durations <= 0):
                raise ValueError("slot durations must be positive")
        if self.u_max is not None and np.abs(self.amplitudes).max() > self.u_max + 1e-12:
            raise ValueError("amplitudes exceed the declared bound")

    @property
    def n_slots(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def n_controls(self) -> int:
        return self.amplitudes.shape[1]

    def slot_durations(self) -> np.ndarray:
        if self.durations is not None:
            return self.durations
        return np.full(self.n_slots, self.dt)

    @property
    def duration(self) -> float:
        return float(self.slot_durations().sum())


def save_sequence(seq: ControlSequence, path) -> None:
    with open(path, "w") as fh:
        if seq.durations is None:
            fh.write(f"dt={seq.dt!r} controls={seq.n_controls}\n")
            for row in seq.amplitudes:
                fh.write(" ".join(repr(float(u)) for u in row) + "\n")
        else:
            fh.write(f"dt=var controls={seq.n_controls}\n")
            for d, row in zip(seq.durations, seq.amplitudes):
                fh.write(repr(float(d)) + " " + " ".join(repr(float(u)) for u in row) + "\n")


def load_sequence(path) -> ControlSequence:
    with open(path) as fh:
        header = fh.readline().split()
        fields = dict(part.split("=", 1) for part in header)
        n_controls = int(fields["controls"])
        rows = [[float(x) for x in line.split()] for line in fh if line.strip()]
    if fields["dt"] == "var":
        durations = np.array([r[0] for r in rows])
        amps = np.array([r[1:] for r in rows])
        if amps.shape[1] != n_controls:
            raise ValueError("pulse file row width does not match header")
        return ControlSequence(dt=float(durations.min()), amplitudes=amps, durations=durations)
    amps = np.array(rows)
    if amps.shape[1] != n_controls:
        raise ValueError("pulse file row width does not match header")
    return ControlSequence(dt=float(fields["dt"]), amplitudes=amps)


@dataclass
class PropagationRecord:
    final: np.ndarray                           # U(T) or F(T)
    intermediates: list[np.ndarray] | None      # cumulative maps per slot boundary
    wall_time: float
    closed: bool


def propagate_closed(system: ControlSystem, seq: ControlSequence,
                     keep_intermediates: bool = False) -> PropagationRecord:
    """U(T) = prod_k exp(-i 2pi H(t_k) dt_k), slot 1 acting first."""
    if seq.n_controls != len(system.controls):
        raise ValueError(f"sequence has {seq.n_controls} controls, system has "
                         f"{len(system.controls)}")
    t0 = time.perf_counter()
    U = np.eye(system.dim, dtype=complex)
    inter = [] if keep_intermediates else None
    for k, dt_k in enumerate(seq.slot_durations()):
        H = system.drift + sum(u * Hc for u, Hc in zip(seq.amplitudes[k], system.controls))
        w, V = np.linalg.eigh(H)
        Uk = (V * np.exp(-1j * TWO_PI * w * dt_k)) @ V.conj().T
        U = Uk @ U
        if inter is not None:
            inter.append(U.copy())
    return PropagationRecord(final=U, intermediates=inter,
                             wall_time=time.perf_counter() - t0, closed=True)


class LiouvilleEngine:
    """Real-representation generator cache for one open system.

    The slot generator is A0 + sum_j u_j A_j with A0 = -2pi ad(H_drift) - Gamma
    and A_j = -2pi ad(H_j), all real matrices in the Pauli basis.
    """

    def __init__(self, system: ControlSystem):
        if system.relaxation is None:
            raise ValueError("open propagation needs a relaxation model")
        self.system = system
        self.Q = pauli_basis(system.n_qubits)
        self.A0 = TWO_PI * real_ad_generator(system.drift, self.Q) \
            - to_real_superop(system.relaxation.gamma, self.Q)
        self.Ac = [TWO_PI * real_ad_generator(Hc, self.Q) for Hc in system.controls]

    @property
    def dim(self) -> int:
        return self.A0.shape[0]

    def slot_generator(self, u: np.ndarray) -> np.ndarray:
        L = self.A0.copy()
        for uj, Aj in zip(u, self.Ac):
            if uj != 0.0:
                L += uj * Aj
        return L

    def slot_maps(self, seq: ControlSequence) -> list[np.ndarray]:
        return [expm(self.slot_generator(seq.amplitudes[k]) * dt_k)
                for k, dt_k in enumerate(seq.slot_durations())]

    def to_vec(self, R: np.ndarray) -> np.ndarray:
        return self.Q @ R.astype(complex) @ self.Q.conj().T

    def to_real(self, S: np.ndarray) -> np.ndarray:
        return to_real_superop(S, self.Q)


def propagate_open(system: ControlSystem, seq: ControlSequence,
                   keep_intermediates: bool = False,
                   engine: LiouvilleEngine | None = None) -> PropagationRecord:
    """F(T) = prod_k exp(-(i 2pi ad_H(t_k) + Gamma) dt_k) in the vec convention."""
    if engine is None:
        engine = LiouvilleEngine(system)
    if seq.n_controls != len(system.controls):
        raise ValueError(f"sequence has {seq.n_controls} controls, system has "
                         f"{len(system.controls)}")
    t0 = time.perf_counter()
    F = np.eye(engine.dim)
    inter = [] if keep_intermediates else None
    for k, dt_k in enumerate(seq.slot_durations()):
        Fk = expm(engine.slot_generator(seq.amplitudes[k]) * dt_k)
        F = Fk @ F
        if inter is not None:
            inter.append(engine.to_vec(F))
    return PropagationRecord(final=engine.to_vec(F), intermediates=inter,
                             wall_time=time.perf_counter() - t0, closed=False)


# ---------------------------------------------------------------------------
# fidelity functionals

def _check_same_shape(A, B):
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")


def fidelity_phase_sensitive(U: np.ndarray, U_target: np.ndarray) -> float:
    """f' = Re tr(U_target^dag U) / N."""
    _check_same_shape(U, U_target)
    N = U.shape[0]
    return float(np.real(np.trace(U_target.conj().T @ U)) / N)


def fidelity_phase_invariant(U: np.ndarray, U_target: np.ndarray) -> float:
    """f = |tr(U_target^dag U) / N|^2, insensitive to a global phase.

    Equals Re tr(Ad_target^dag Ad_U) / N^2 (the superoperator trace pairing
    of the two conjugations).
    """
    _check_same_shape(U, U_target)
    N = U.shape[0]
    return float(np.abs(np.trace(U_target.conj().T @ U) / N) ** 2)


def fidelity_open(F: np.ndarray, F_target: np.ndarray) -> float:
    """Re tr(F_target^dag F) / N^2; equals 1 when F = F_target is unitary
    conjugation."""
    _check_same_shape(F, F_target)
    return float(np.real(np.trace(F_target.conj().T @ F)) / F.shape[0])


def fidelity_projected(F: np.ndarray, F_target: np.ndarray, projector: np.ndarray,
                       tol: float = 1e-9) -> float:
    """(1/rk P) Re tr(P^T F_target^dag P F): transfer quality on a subspace."""
    _check_same_shape(F, F_target)
    _check_same_shape(F, projector)
    if np.linalg.norm(projector @ projector - projector) > tol * projector.shape[0]:
        raise ValueError("projector is not idempotent")
    rank = float(np.real(np.trace(projector)))
    val = np.trace(projector.T @ F_target.conj().T @ projector @ F)
    return float(np.real(val) / rank)


def trajectory_projections(system: ControlSystem, seq: ControlSequence,
                           encoding: EncodingMap,
                           classes: ModeClassification | None = None) -> list[dict]:
    """Follow every protected basis state and record its weight in the slow
    and fast relaxation bands at each slot boundary.

    Returns rows {t, state_index, p_slow, p_fast} (squared projection norms).
    """
    if system.relaxation is None:
        raise ValueError("trajectory projections need a relaxation model")
    if classes is None:
        classes = classify_modes(system.relaxation)
    engine = LiouvilleEngine(system)
    _, V = system.relaxation.eigensystem()
    P_slow = engine.to_real(V[:, classes.indices("slow")] @ V[:, classes.indices("slow")].conj().T)
    P_fast = engine.to_real(V[:, classes.indices("fast")] @ V[:, classes.indices("fast")].conj().T)
    # protected basis states in the real representation (columns)
    states = np.real(engine.Q.conj().T @ encoding.basis)
    rows = []
    t = 0.0
    for k, dt_k in enumerate(seq.slot_durations()):
        Fk = expm(engine.slot_generator(seq.amplitudes[k]) * dt_k)
        states = Fk @ states
        t += dt_k
        slow_w = np.sum((P_slow @ states) ** 2, axis=0)
        fast_w = np.sum((P_fast @ states) ** 2, axis=0)
        for s in range(states.shape[1]):
            rows.append({"t": t, "state_index": s,
                         "p_slow": float(slow_w[s]), "p_fast": float(fast_w[s])})
    return rows


def fidelity_envelopes(g0: list[tuple[float, float]], gammas: np.ndarray
                       ) -> list[tuple[float, float, float]]:
    """Convexity bounds (T, lower, upper) around a closed-system top curve.

    lower = g0(T) exp(-T mean(gamma)); upper = g0(T) mean(exp(-gamma T)).
    """
    gammas = np.asarray(gammas, dtype=float)
    if np.any(gammas < 0):
        raise ValueError("decay rates must be nonnegative")
    out = []
    for T, g in g0:
        lower = g * float(np.exp(-T * gammas.mean()))
        upper = g * float(np.mean(np.exp(-gammas * T)))
        out.append((T, lower, upper))
    return out
