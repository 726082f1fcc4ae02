"""Refinement loops: standard ZoomOut, the sample-level scalable variant,
and dense pointwise recovery with optional guided search.

All nearest-neighbor searches break ties toward the lowest target index.
The sample-level loop touches only p- and k-sized arrays; dense data enters
only at the final conversion step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .basis import LocalBasis
from .errors import ScheduleError
from .fmap import FunctionalMap, MapKind, PointwiseMap, exact_fmap, restricted_fmap
from .spectral import ExactSpectrum, ReducedSpectrum

BRUTE_FORCE_PAIR_LIMIT = 30_000_000


@dataclass(frozen=True)
class ZoomOutSchedule:
    k_init: int = 20
    k_final: int = 100
    step: int = 1

    def ks(self):
        return range(self.k_init, self.k_final + 1, self.step)

    def validate(self, K_available: int):
        if not (1 <= self.k_init <= self.k_final):
            raise ScheduleError(f"invalid schedule {self}")
        if self.k_final > K_available:
            raise ScheduleError(
                f"k_final={self.k_final} exceeds available spectrum K={K_available}"
            )


@dataclass
class GuidedCandidates:
    """Per-source-vertex candidate target vertices, each a sorted int array."""

    sets: list

    def __len__(self) -> int:
        return len(self.sets)


def nearest_rows(targets: np.ndarray, queries: np.ndarray,
                 method: str = "auto") -> np.ndarray:
    """Index of the Euclidean-nearest target row for each query row.

    ``brute`` computes exact blocked distances with first-occurrence
    (lowest-index) tie-breaking; ``tree`` delegates to a k-d tree and is used
    for large instances where ties are vanishingly unlikely.
    """
    if method == "auto":
        method = "brute" if len(targets) * len(queries) <= BRUTE_FORCE_PAIR_LIMIT \
            else "tree"
    if method == "tree":
        tree = cKDTree(targets)
        _, idx = tree.query(queries, k=1, workers=-1)
        return np.asarray(idx, dtype=np.int64)
    t_sq = np.einsum("ij,ij->i", targets, targets)
    out = np.empty(len(queries), dtype=np.int64)
    block = max(1, BRUTE_FORCE_PAIR_LIMIT // max(1, len(targets)))
    for start in range(0, len(queries), block):
        q = queries[start:start + block]
        d2 = t_sq[None, :] - 2.0 * (q @ targets.T)
        out[start:start + block] = np.argmin(d2, axis=1)
    return out


def pointwise_from_fmap(E_M: np.ndarray, E_N: np.ndarray, C: np.ndarray,
                        method: str = "auto", level: str = "dense") -> PointwiseMap:
    """NN search of the mapped source embedding E_N @ C against E_M rows."""
    assignment = nearest_rows(E_M, E_N @ C, method=method)
    return PointwiseMap(assignment, level)


def standard_zoomout(spec_N: ExactSpectrum, spec_M: ExactSpectrum,
                     a_N: np.ndarray, pi_init: PointwiseMap,
                     schedule: ZoomOutSchedule, iteration_hook=None):
    """Classic alternating refinement on dense A-orthonormal bases."""
    schedule.validate(min(spec_N.K, spec_M.K))
    pi = pi_init
    C = None
    for k in schedule.ks():
        C = exact_fmap(spec_N.vectors[:, :k], a_N, pi, spec_M.vectors[:, :k])
        pi = pointwise_from_fmap(spec_M.vectors[:, :k], spec_N.vectors[:, :k], C.C)
        if iteration_hook is not None:
            iteration_hook(k, C.C, pi.assignment)
    return C, pi


def scalable_zoomout(spec_N: ReducedSpectrum, spec_M: ReducedSpectrum,
                     pi_bar_init: PointwiseMap, schedule: ZoomOutSchedule,
                     iteration_hook=None):
    """Alternating refinement entirely at sample level (p-sized objects)."""
    schedule.validate(min(spec_N.K, spec_M.K))
    pi_bar = pi_bar_init
    C = None
    phi_N, phi_M = spec_N.coeff_vectors, spec_M.coeff_vectors
    for k in schedule.ks():
        C = restricted_fmap(phi_N[:, :k], spec_N.A_bar, pi_bar, phi_M[:, :k])
        assignment = nearest_rows(phi_M[:, :k], phi_N[:, :k] @ C.C)
        pi_bar = PointwiseMap(assignment, "sample")
        if iteration_hook is not None:
            iteration_hook(k, C.C, pi_bar.assignment)
    return C, pi_bar


def build_guided_candidates(basis_N: LocalBasis, basis_M: LocalBasis,
                            pi_bar: PointwiseMap) -> GuidedCandidates:
    """Candidate images via column-support lookups of the two sparse bases."""
    rows_N = basis_N.row_matrix()
    supports_M = [basis_M.column_support(j) for j in range(basis_M.p)]
    sets = []
    for x in range(basis_N.n):
        js = rows_N.indices[rows_N.indptr[x]:rows_N.indptr[x + 1]]
        images = pi_bar.assignment[js]
        cand = np.unique(np.concatenate([supports_M[t] for t in images]))
        sets.append(cand)
    return GuidedCandidates(sets)


def dense_conversion(psi_bar_N: np.ndarray, psi_bar_M: np.ndarray,
                     C_star: FunctionalMap | np.ndarray,
                     guided: GuidedCandidates | None = None,
                     method: str = "auto") -> PointwiseMap:
    """Per-vertex nearest neighbor in the lifted spectral embedding."""
    C = C_star.C if isinstance(C_star, FunctionalMap) else C_star
    k = C.shape[0]
    queries = psi_bar_N[:, :k] @ C
    targets = psi_bar_M[:, :C.shape[1]]
    if guided is None:
        assignment = nearest_rows(targets, queries, method=method)
    else:
        assignment = np.empty(len(queries), dtype=np.int64)
        for x in range(len(queries)):
            cand = guided.sets[x]
            d2 = np.einsum("ij,ij->i", targets[cand] - queries[x],
                           targets[cand] - queries[x])
            assignment[x] = cand[np.argmin(d2)]
    return PointwiseMap(assignment, "dense")


def nearest_sample_baseline(basis_N: LocalBasis, basis_M: LocalBasis,
                            pi_bar: PointwiseMap) -> PointwiseMap:
    """Locally constant extension: each vertex copies its dominant sample's
    image sample vertex. This is the remesh-and-extend baseline the dense
    conversion is compared against."""
    rows_N = basis_N.row_matrix()
    dominant = np.asarray(rows_N.argmax(axis=1)).ravel()
    images = basis_M.sample_indices[pi_bar.assignment[dominant]]
    return PointwiseMap(images.astype(np.int64), "dense")
