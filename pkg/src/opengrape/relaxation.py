"""Dipolar relaxation superoperators for the four-qubit model.

Three generators are provided, all acting on the two spin pairs (1,2), (3,4):

* ``gamma_pure_t2`` -- double commutators with the pair zz operators,
  calibrated so the nonzero rates are exactly {4, 8} 1/s;
* ``gamma_full`` -- the dipolar sum over the nine products of single-spin
  rank-1 tensors per pair, with the secular (0,0) term dominating.  Default
  calibration anchors the secular medium rate at 4 1/s and the longitudinal
  single-spin rate at T1_RATE = 0.024 1/s, which reproduces the model's
  nominal T2:T1 ratio of about 170:1 and yields three well-separated
  eigenvalue bands;
* ``spherical_tensor_t2`` -- the irreducible rank-2 tensors (Clebsch-Gordan
  coupled), available as an alternative term set for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .linalg import eig_hermitian
from .pauli import SIGMA, pauli_operator, vec

__all__ = [
    "RelaxationModel", "ModeClassification",
    "double_commutator_superop", "spherical_tensor_t2", "product_tensor",
    "gamma_pure_t2", "gamma_full", "classify_modes", "blocks_in_gamma_basis",
    "choi_matrix", "DEFAULT_CUTS", "T1_RATE", "T2_RATE",
]

T2_RATE = 4.027   # nominal transverse rate constant, 1/s
T1_RATE = 0.024   # nominal longitudinal rate constant, 1/s
DEFAULT_CUTS = (2.0, 6.0)  # band midpoints between {0, 4, 8} 1/s

_IZ = SIGMA["z"] / 2
_IP = (SIGMA["x"] + 1j * SIGMA["y"]) / 2
_IM = (SIGMA["x"] - 1j * SIGMA["y"]) / 2
# single-spin rank-1 spherical components: T_{1,0} = I_z, T_{1,+-1} = -+I_+-/sqrt(2)
_T1 = {0: _IZ, +1: -_IP / np.sqrt(2), -1: _IM / np.sqrt(2)}

# <1 m1 1 m2 | 2 q> Clebsch-Gordan coefficients
_CG2 = {
    (1, 1): 1.0,
    (1, 0): np.sqrt(0.5), (0, 1): np.sqrt(0.5),
    (1, -1): np.sqrt(1 / 6), (-1, 1): np.sqrt(1 / 6), (0, 0): np.sqrt(2 / 3),
    (-1, 0): np.sqrt(0.5), (0, -1): np.sqrt(0.5),
    (-1, -1): 1.0,
}


def double_commutator_superop(A: np.ndarray) -> np.ndarray:
    """Matrix of rho -> [A^dag, [A, rho]] in the vec convention."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("double_commutator_superop expects a square matrix")
    n = A.shape[0]
    I = np.eye(n, dtype=complex)
    Ad = A.conj().T
    return (np.kron(I, Ad @ A) - np.kron(A.T, Ad)
            - np.kron(Ad.T, A) + np.kron((A @ Ad).T, I))


def _embed_pair(op2: np.ndarray, pair: tuple[int, int], n: int) -> np.ndarray:
    """Place a two-qubit operator on qubits pair=(i,j) (1-indexed) of n qubits."""
    i, j = pair
    if i == j:
        raise ValueError("pair indices must be distinct")
    if not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"pair {pair} out of range for {n} qubits")
    if i > j:
        # swap the tensor factors of op2 instead of the embedding order
        op2 = op2.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)
        i, j = j, i
    # expand op2 in the two-qubit Pauli basis and place the letters
    out = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for a in "1xyz":
        for b in "1xyz":
            basis = np.kron(SIGMA[a], SIGMA[b])
            coeff = np.trace(basis.conj().T @ op2) / 4.0
            if abs(coeff) < 1e-15:
                continue
            letters = ["1"] * n
            letters[i - 1], letters[j - 1] = a, b
            # pauli_operator carries a global 1/2; undo it for a faithful embed
            out += coeff * 2.0 * pauli_operator("".join(letters))
    return out


def product_tensor(m1: int, m2: int, pair: tuple[int, int] = (1, 2), n: int = 2) -> np.ndarray:
    """Product T_{1,m1} T_{1,m2} of single-spin rank-1 tensors on the given pair."""
    if m1 not in (-1, 0, 1) or m2 not in (-1, 0, 1):
        raise ValueError("rank-1 components take m in {-1, 0, 1}")
    return _embed_pair(np.kron(_T1[m1], _T1[m2]), pair, n)


def spherical_tensor_t2(pair: tuple[int, int], q: int, n: int) -> np.ndarray:
    """Irreducible rank-2 spherical tensor T_{2,q} on the given spin pair.

    Built by Clebsch-Gordan coupling of two rank-1 single-spin tensors; for
    q = 0 this equals (1/sqrt(6)) (3 I_z I_z - I.I).
    """
    if q not in range(-2, 3):
        raise ValueError("rank-2 components take q in -2..2")
    op2 = np.zeros((4, 4), dtype=complex)
    for (m1, m2), c in _CG2.items():
        if m1 + m2 == q:
            op2 += c * np.kron(_T1[m1], _T1[m2])
    return _embed_pair(op2, pair, n)


@dataclass
class RelaxationModel:
    """A fixed (time-independent) relaxation superoperator with its term list."""
    terms: list[tuple[np.ndarray, float]]    # (lindblad operator, rate weight 1/s)
    gamma: np.ndarray                        # 4^n x 4^n, vec convention
    calibration: dict = field(default_factory=dict)
    name: str = ""
    _eig: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.gamma.shape[0]

    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        """Ascending eigenvalues and eigenvectors of the (Hermitian PSD) gamma."""
        if self._eig is None:
            self._eig = eig_hermitian(self.gamma, tol=1e-8)
        return self._eig


@dataclass
class ModeClassification:
    slow: list[tuple[float, int]]
    medium: list[tuple[float, int]]
    fast: list[tuple[float, int]]
    thresholds: tuple[float, float]

    def sizes(self) -> tuple[int, int, int]:
        return len(self.slow), len(self.medium), len(self.fast)

    def indices(self, band: str) -> np.ndarray:
        return np.array([i for _, i in getattr(self, band)], dtype=int)


def _pairs(n: int) -> list[tuple[int, int]]:
    if n % 2:
        raise ValueError("pair relaxation models need an even qubit count")
    return [(2 * k + 1, 2 * k + 2) for k in range(n // 2)]


def gamma_pure_t2(n: int = 4) -> RelaxationModel:
    """Pure-T2 model: zz double commutators, nonzero rates exactly {4, 8} 1/s."""
    terms = []
    gamma = np.zeros((4 ** n, 4 ** n), dtype=complex)
    raw = []
    for pair in _pairs(n):
        letters = ["1"] * n
        letters[pair[0] - 1] = letters[pair[1] - 1] = "z"
        raw.append(pauli_operator("".join(letters)))
    # calibrate: one-pair decay (the medium band) sits at exactly 4/s
    probe = sum(double_commutator_superop(A) for A in raw)
    evals = np.linalg.eigvalsh((probe + probe.conj().T) / 2)
    distinct = sorted({round(v, 9) for v in evals if v > 1e-9})
    scale = 4.0 / distinct[0]
    for A in raw:
        w = scale  # rate weight per double commutator
        terms.append((np.sqrt(w) * A, w))
        gamma += w * double_commutator_superop(A)
    return RelaxationModel(terms=terms, gamma=gamma,
                           calibration={"scale": scale}, name="pure-t2")


def gamma_full(
    n: int = 4,
    secular_boost: float | None = None,
    terms: Literal["product", "irreducible"] = "product",
    t1_rate: float = T1_RATE,
) -> RelaxationModel:
    """Dipolar model: per pair, all nine T_{1,m1} T_{1,m2} double commutators.

    The secular (0,0) weight is calibrated so the secular-only medium
    eigenvalue is exactly 4/s.  By default the eight non-secular weights are
    then calibrated so the longitudinal single-spin rate equals `t1_rate`
    (0.024/s), placing the three bands inside [0, 0.05], [4.01, 4.05] and
    [8.02, 8.04] 1/s.  Passing `secular_boost` instead uses the literal rate
    ratio w_flip = w_secular / secular_boost.
    """
    pairs = _pairs(n)
    if terms == "product":
        secular = [product_tensor(0, 0, p, n) for p in pairs]
        flips = [product_tensor(m1, m2, p, n) for p in pairs
                 for m1 in (-1, 0, 1) for m2 in (-1, 0, 1) if (m1, m2) != (0, 0)]
    elif terms == "irreducible":
        secular = [spherical_tensor_t2(p, 0, n) for p in pairs]
        flips = [spherical_tensor_t2(p, q, n) for p in pairs
                 for q in (-2, -1, 1, 2)]
    else:
        raise ValueError(f"unknown term set {terms!r}")

    D_sec = sum(double_commutator_superop(A) for A in secular)
    D_flip = sum(double_commutator_superop(A) for A in flips)

    evals = np.linalg.eigvalsh((D_sec + D_sec.conj().T) / 2)
    distinct = sorted({round(v, 9) for v in evals if v > 1e-9})
    w_sec = 4.0 / distinct[0]

    if secular_boost is not None:
        w_flip = w_sec / secular_boost
    else:
        # longitudinal rate of a single-spin I_z mode under the flip terms
        letters = ["1"] * n
        letters[0] = "z"
        iz1 = vec(pauli_operator("".join(letters)))
        iz1 = iz1 / np.linalg.norm(iz1)
        r = float(np.real(iz1.conj() @ (D_flip @ iz1)))
        w_flip = t1_rate / r

    gamma = w_sec * D_sec + w_flip * D_flip
    term_list = [(np.sqrt(w_sec) * A, w_sec) for A in secular]
    term_list += [(np.sqrt(w_flip) * A, w_flip) for A in flips]
    return RelaxationModel(
        terms=term_list, gamma=gamma,
        calibration={"w_secular": w_sec, "w_flip": w_flip,
                     "effective_boost": w_sec / w_flip, "term_set": terms},
        name="full",
    )


def classify_modes(model: RelaxationModel, cuts: tuple[float, float] = DEFAULT_CUTS) -> ModeClassification:
    """Bin the gamma eigenvalues into slow / medium / fast bands."""
    lo, hi = cuts
    if not lo < hi:
        raise ValueError("cuts must be ascending")
    w, _ = model.eigensystem()
    slow, medium, fast = [], [], []
    for i, v in enumerate(w):
        (slow if v < lo else medium if v < hi else fast).append((float(v), i))
    return ModeClassification(slow=slow, medium=medium, fast=fast, thresholds=cuts)


def blocks_in_gamma_basis(S: np.ndarray, model: RelaxationModel,
                          classes: ModeClassification | None = None) -> np.ndarray:
    """3x3 table of Frobenius norms of S between the gamma eigenvalue bands."""
    S = np.asarray(S)
    if S.shape != model.gamma.shape:
        raise ValueError(f"dimension mismatch: {S.shape} vs {model.gamma.shape}")
    if classes is None:
        classes = classify_modes(model)
    _, V = model.eigensystem()
    St = V.conj().T @ S @ V
    idx = [classes.indices(b) for b in ("slow", "medium", "fast")]
    out = np.zeros((3, 3))
    for a in range(3):
        for b in range(3):
            out[a, b] = np.linalg.norm(St[np.ix_(idx[a], idx[b])])
    return out


def choi_matrix(F: np.ndarray) -> np.ndarray:
    """Choi matrix sum_kl F(E_kl) kron E_kl of a superoperator (vec convention).

    Positive semidefinite exactly when the map is completely positive.
    """
    d2 = F.shape[0]
    n = int(round(np.sqrt(d2)))
    F4 = F.reshape(n, n, n, n)       # F4[j, i, l, k] = F[i + n j, k + n l]
    C = F4.transpose(1, 3, 0, 2).reshape(d2, d2)
    return C
