"""Reduced and exact generalized eigenproblems for the Laplace-Beltrami pair.

The reduced problem projects (W, A) through the local basis U and is solved
densely (p is small); the exact solver is the small-mesh oracle and the
standard-ZoomOut baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .basis import LocalBasis
from .errors import ConvergenceError, IllConditionedError
from .mesh import LaplacianPair

EXACT_SOLVE_GUARD = 50_000


@dataclass
class ReducedSpectrum:
    """Eigenpairs of the projected pencil, plus the lifted eigenvectors."""

    A_bar: np.ndarray        # (p, p)
    W_bar: np.ndarray        # (p, p)
    eigenvalues: np.ndarray  # (K,)
    coeff_vectors: np.ndarray  # (p, K), A_bar-orthonormal
    lifted_vectors: np.ndarray | None = None  # (n, K), A-orthonormal

    @property
    def K(self) -> int:
        return len(self.eigenvalues)


@dataclass
class ExactSpectrum:
    eigenvalues: np.ndarray  # (K,)
    vectors: np.ndarray      # (n, K), A-orthonormal

    @property
    def K(self) -> int:
        return len(self.eigenvalues)


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """First entry with non-negligible magnitude made positive, per column."""
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        big = np.flatnonzero(np.abs(col) > 1e-8 * np.abs(col).max())
        if len(big) and col[big[0]] < 0:
            out[:, k] = -col
    return out


def reduce_operators(laplacian: LaplacianPair, basis: LocalBasis):
    """Dense p x p projections A_bar = U^T A U and W_bar = U^T W U."""
    U = basis.U
    a = laplacian.mass_diagonal
    A_bar = (U.T @ sp.dia_matrix((a, 0), shape=(len(a),) * 2) @ U).toarray()
    W_bar = (U.T @ laplacian.stiffness_W @ U).toarray()
    return 0.5 * (A_bar + A_bar.T), 0.5 * (W_bar + W_bar.T)


def solve_reduced(A_bar: np.ndarray, W_bar: np.ndarray, K: int) -> ReducedSpectrum:
    """K smallest eigenpairs of W_bar x = lam A_bar x, A_bar-orthonormal."""
    p = A_bar.shape[0]
    if K > p:
        raise ValueError(f"K={K} exceeds reduced dimension p={p}")
    a_eigs = scipy.linalg.eigvalsh(A_bar, subset_by_index=[0, 0])
    a_max = scipy.linalg.eigvalsh(A_bar, subset_by_index=[p - 1, p - 1])
    if a_eigs[0] < 1e-12 * a_max[0]:
        raise IllConditionedError(
            f"reduced mass matrix nearly singular: {a_eigs[0]:.3e} vs {a_max[0]:.3e}"
        )
    vals, vecs = scipy.linalg.eigh(W_bar, A_bar, subset_by_index=[0, K - 1])
    vals = np.maximum(vals, 0.0)
    vecs = _fix_signs(vecs)
    return ReducedSpectrum(A_bar, W_bar, vals, vecs)


def lift(basis: LocalBasis, coeff_vectors: np.ndarray) -> np.ndarray:
    """Express reduced eigenvectors on the dense mesh: U @ Phi."""
    return np.asarray(basis.U @ coeff_vectors)


def reduced_spectrum(laplacian: LaplacianPair, basis: LocalBasis,
                     K: int) -> ReducedSpectrum:
    """Convenience composition: project, solve, lift."""
    A_bar, W_bar = reduce_operators(laplacian, basis)
    spec = solve_reduced(A_bar, W_bar, K)
    spec.lifted_vectors = lift(basis, spec.coeff_vectors)
    return spec


def solve_exact(laplacian: LaplacianPair, K: int,
                allow_large: bool = False) -> ExactSpectrum:
    """K smallest eigenpairs of the dense-mesh pencil via shift-invert."""
    n = laplacian.stiffness_W.shape[0]
    if n > EXACT_SOLVE_GUARD and not allow_large:
        raise ValueError(
            f"n={n} exceeds the exact-solve guard ({EXACT_SOLVE_GUARD}); "
            "pass allow_large=True to override"
        )
    try:
        vals, vecs = spla.eigsh(
            laplacian.stiffness_W.tocsc(), k=K, M=laplacian.mass_A.tocsc(),
            sigma=-1e-8, which="LM",
        )
    except spla.ArpackNoConvergence as exc:
        raise ConvergenceError(f"eigensolver failed to converge: {exc}") from exc
    order = np.argsort(vals)
    vals = np.maximum(vals[order], 0.0)
    vecs = _fix_signs(vecs[:, order])
    return ExactSpectrum(vals, vecs)
