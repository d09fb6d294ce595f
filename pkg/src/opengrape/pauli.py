"""Pauli-string operators, Liouville-space vectorization and the commutator /
conjugation superoperators.

Conventions, fixed package-wide:

* every Pauli string carries a single global factor 1/2, e.g. on two qubits
  ``zz`` is sigma_z (x) sigma_z / 2 and ``z1 - 1z`` is I_z(1) - I_z(2);
* vec() stacks columns, so vec(A rho B) = (B^T kron A) vec(rho), and hence
  ad_H = 1 kron H - H^T kron 1 and Ad_U = conj(U) kron U.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PauliString", "pauli_operator", "string_sum", "parse_string_sum",
    "vec", "unvec", "ad_superop", "adj_superop",
    "pauli_basis", "to_real_superop", "from_real_superop", "real_ad_generator",
]

SIGMA = {
    "1": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliString:
    """A label over {1,x,y,z} with a real coefficient; one letter per qubit."""
    label: str
    coefficient: float = 1.0

    def __post_init__(self):
        if not self.label:
            raise ValueError("empty Pauli label")
        bad = set(self.label) - set("1xyz")
        if bad:
            raise ValueError(f"invalid Pauli letters {sorted(bad)} in {self.label!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.label)


def pauli_operator(p: PauliString | str, coefficient: float | None = None) -> np.ndarray:
    """Dense operator for a Pauli string: coefficient * (1/2) * kron of sigmas."""
    if isinstance(p, str):
        p = PauliString(p, 1.0 if coefficient is None else coefficient)
    op = np.array([[1.0 + 0j]])
    for ch in p.label:
        op = np.kron(op, SIGMA[ch])
    return 0.5 * p.coefficient * op


def string_sum(terms) -> np.ndarray:
    """Sum of (coefficient, label) Pauli-string terms as a dense operator."""
    terms = list(terms)
    if not terms:
        raise ValueError("string_sum needs at least one term")
    return sum(pauli_operator(label, c) for c, label in terms)


_NUM_RE = re.compile(r"^((?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)([1xyz]*)$")
_LABEL_RE = re.compile(r"^[1xyz]+$")


def _parse_term(chunk: str) -> tuple[float, str]:
    sign = 1.0
    chunk = chunk.strip()
    while chunk and chunk[0] in "+-":
        if chunk[0] == "-":
            sign = -sign
        chunk = chunk[1:].strip()
    if "*" in chunk:
        num, _, label = chunk.partition("*")
        return sign * float(num), label.strip()
    tokens = chunk.split()
    if len(tokens) == 2:
        return sign * float(tokens[0]), tokens[1]
    if len(tokens) == 1:
        tok = tokens[0]
        # a token drawn entirely from {1,x,y,z} is a label ("1z11"), never a number
        if _LABEL_RE.match(tok):
            return sign, tok
        m = _NUM_RE.match(tok)
        if m and m.group(2):
            return sign * float(m.group(1)), m.group(2)
    raise ValueError(f"cannot parse Pauli term {chunk!r}")


def parse_string_sum(text: str) -> list[tuple[float, str]]:
    """Parse e.g. "2.0 * xx11 + 1.0 * 1zz1 - 1z11" into (coefficient, label) terms.

    Coefficients are separated from labels by '*' or whitespace; a bare token
    over {1,x,y,z} is always a label.
    """
    chunks = re.split(r"(?<=[1xyz\d.\s])\s*(?=[+-])", text.strip())
    terms = []
    for chunk in chunks:
        if not chunk.strip():
            continue
        coeff, label = _parse_term(chunk)
        if not _LABEL_RE.match(label):
            raise ValueError(f"invalid Pauli label {label!r}")
        terms.append((coeff, label))
    if not terms:
        raise ValueError(f"no terms found in {text!r}")
    n = len(terms[0][1])
    if any(len(lbl) != n for _, lbl in terms):
        raise ValueError("inconsistent qubit counts in Pauli sum")
    return terms


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("vec expects a square matrix")
    return rho.reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v).ravel()
    n = int(round(np.sqrt(v.size)))
    if n * n != v.size:
        raise ValueError(f"unvec: length {v.size} is not a perfect square")
    return v.reshape((n, n), order="F")


def ad_superop(H: np.ndarray) -> np.ndarray:
    """Matrix of rho -> [H, rho]: 1 kron H - H^T kron 1."""
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("ad_superop expects a square matrix")
    I = np.eye(H.shape[0], dtype=complex)
    return np.kron(I, H) - np.kron(H.T, I)


def adj_superop(U: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Matrix of rho -> U rho U^dag: conj(U) kron U.  U must be unitary."""
    U = np.asarray(U)
    n = U.shape[0]
    if np.linalg.norm(U.conj().T @ U - np.eye(n)) > tol * n:
        raise ValueError("adj_superop: input is not unitary within tolerance")
    return np.kron(U.conj(), U)


# ---------------------------------------------------------------------------
# Real representation.  In the orthonormal Hermitian basis of 1/2^(n/2)-scaled
# Pauli strings, -i*ad_H is a real antisymmetric matrix and any Hermiticity-
# preserving superoperator (Ad_U, Lindblad Gamma) is real.  The GRAPE hot loop
# runs in this basis: real 256x256 matmuls are ~4x cheaper than complex ones.

def pauli_basis(n: int) -> np.ndarray:
    """Columns vec(P_s) of the 4^n normalized Hermitian Pauli operators.

    P_s = (sigma-string)/2^(n/2) so tr(P_s P_t) = delta_st.  Returned as the
    unitary change-of-basis matrix Q (4^n x 4^n) from the real representation
    to the vec representation.
    """
    mats = [np.array([[1.0 + 0j]])]
    for _ in range(n):
        mats = [np.kron(m, SIGMA[ch]) for m in mats for ch in "1xyz"]
    scale = 2.0 ** (-n / 2)
    Q = np.stack([vec(scale * m) for m in mats], axis=1)
    return Q


def to_real_superop(S: np.ndarray, Q: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Transform a vec-representation superoperator into the Pauli basis.

    Raises if the result has an imaginary part beyond `tol` (i.e. S does not
    preserve Hermiticity).
    """
    R = Q.conj().T @ S @ Q
    im = np.abs(R.imag).max()
    if im > tol * max(1.0, np.abs(R.real).max()):
        raise ValueError(f"superoperator is not real in the Pauli basis (max imag {im:.2e})")
    return np.ascontiguousarray(R.real)


def from_real_superop(R: np.ndarray, Q: np.ndarray) -> np.ndarray:
    return Q @ R.astype(complex) @ Q.conj().T


def real_ad_generator(H: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Real matrix of rho -> -i[H, rho] in the Pauli basis (antisymmetric)."""
    return to_real_superop(-1j * ad_superop(H), Q)
