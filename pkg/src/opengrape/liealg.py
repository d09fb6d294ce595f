"""Numerical Lie-closure computation for controllability certification."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LieClosureResult", "lie_closure"]


@dataclass
class LieClosureResult:
    dimension: int
    basis: list[np.ndarray]          # trace-orthonormal anti-Hermitian matrices
    generations: int                 # commutator depth reached
    tolerance: float
    truncated: bool = False          # hit max_dim before closing

    def basis_norms(self) -> np.ndarray:
        return np.array([np.linalg.norm(B) for B in self.basis])


def lie_closure(generators: list[np.ndarray], tol: float = 1e-9,
                max_dim: int | None = None, hermitian: bool = True) -> LieClosureResult:
    """Real Lie algebra generated by {iH_k} under commutation.

    Generators are projected traceless (a global phase direction is dynamically
    irrelevant), multiplied by i when `hermitian`, then orthonormalized; new
    commutators are admitted whenever their residual after two passes of
    Gram-Schmidt exceeds `tol`.  With anti-Hermitian elements the HS pairing
    is automatically real, so the span is a real vector space.
    """
    if not generators:
        raise ValueError("need at least one generator")
    d = generators[0].shape[0]
    for G in generators:
        if G.shape != (d, d):
            raise ValueError("generator dimensions differ")
        if np.linalg.norm(G) < tol:
            raise ValueError("zero generator")
    if max_dim is None:
        max_dim = d * d
    basis: list[np.ndarray] = []

    def admit(X: np.ndarray) -> bool:
        X = X - (np.trace(X) / d) * np.eye(d, dtype=X.dtype)
        for _ in range(2):  # two MGS passes keep orthogonality near machine precision
            for B in basis:
                X = X - np.sum(B.conj() * X) * B
        nrm = np.linalg.norm(X)
        if nrm > tol:
            basis.append(X / nrm)
            return True
        return False

    truncated = False
    for G in generators:
        admit(1j * G if hermitian else np.asarray(G, dtype=complex))
        if len(basis) >= max_dim:
            truncated = True
            break

    generations = 0
    frontier = [] if truncated else list(range(len(basis)))
    while frontier and not truncated:
        generations += 1
        new_start = frontier[0]
        n_before = len(basis)
        # commute every pair with at least one member from the last generation;
        # candidates are formed in index order so admission is deterministic
        candidates = []
        for i in range(n_before):
            for j in range(max(i + 1, new_start), n_before):
                candidates.append(basis[i] @ basis[j] - basis[j] @ basis[i])
        frontier = []
        for C in candidates:
            if admit(C):
                frontier.append(len(basis) - 1)
                if len(basis) >= max_dim:
                    truncated = True
                    break
    return LieClosureResult(dimension=len(basis), basis=basis,
                            generations=generations, tolerance=tol,
                            truncated=truncated)
