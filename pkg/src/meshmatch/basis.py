"""Partition-of-unity local functions with the adaptive-radius scheme.

Each sample j carries a compactly supported profile chi(d / rho_j) of the
geodesic distance; row-normalizing the stacked columns gives interpolation
weights that sum to one at every vertex. The adaptation loop halves the
radius of the most influential neighbor of any sample whose self-weight is
below threshold, reusing the stored distances (no new Dijkstra sweeps).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import CoverageError, NonTerminationError
from .mesh import TriMesh
from .sampling import GeodesicRecord, SampleSet, add_sample


class ChiKind(enum.Enum):
    POLYNOMIAL = "poly"
    SMOOTH_BUMP = "bump"


@dataclass(frozen=True)
class ChiProfile:
    """Non-increasing profile on [0, inf) with chi(0)=1 and chi(t>=1)=0."""

    kind: ChiKind = ChiKind.POLYNOMIAL

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        out = np.zeros_like(t)
        inside = t < 1.0
        ti = t[inside]
        if self.kind is ChiKind.POLYNOMIAL:
            out[inside] = 1.0 - 3.0 * ti**2 + 2.0 * ti**3
        else:
            out[inside] = np.exp(1.0 - 1.0 / (1.0 - ti**2))
        return out


def eval_chi(profile: ChiProfile, t: float) -> float:
    return float(profile(np.array([t]))[0])


@dataclass
class LocalBasis:
    """Sparse n x p row-stochastic matrix of local functions."""

    U: sp.csc_matrix
    sample_indices: np.ndarray
    radii: np.ndarray
    self_weights: np.ndarray
    profile: ChiProfile

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @property
    def p(self) -> int:
        return self.U.shape[1]

    def column_support(self, j: int) -> np.ndarray:
        """Vertex ids where u_j is nonzero."""
        return self.U.indices[self.U.indptr[j]:self.U.indptr[j + 1]]

    def row_matrix(self) -> sp.csr_matrix:
        if not hasattr(self, "_csr"):
            self._csr = self.U.tocsr()
        return self._csr

    def interpolate(self, sample_values: np.ndarray) -> np.ndarray:
        """Blend per-sample values over the whole mesh: U @ values."""
        return self.U @ sample_values


def build_unnormalized(record: GeodesicRecord, radii: np.ndarray,
                       profile: ChiProfile) -> sp.csc_matrix:
    """Columns chi(d(., v_j)/rho_j), structural zeros outside the open ball."""
    cols_i, cols_j, vals = [], [], []
    for j in range(record.p):
        verts, dists = record.truncated(j, radii[j])
        cols_i.append(verts)
        cols_j.append(np.full(len(verts), j, dtype=np.int64))
        vals.append(profile(dists / radii[j]))
    return sp.csc_matrix(
        (np.concatenate(vals), (np.concatenate(cols_i), np.concatenate(cols_j))),
        shape=(record.n_vertices, record.p),
    )


def normalize_partition(u_tilde: sp.csc_matrix, samples: SampleSet,
                        profile: ChiProfile) -> LocalBasis:
    """Row-normalize so columns form a partition of unity."""
    row_sums = np.asarray(u_tilde.sum(axis=1)).ravel()
    if (row_sums <= 0).any():
        raise CoverageError(
            f"{int((row_sums <= 0).sum())} vertices covered by no local function"
        )
    inv = sp.dia_matrix((1.0 / row_sums, 0), shape=(len(row_sums),) * 2)
    U = (inv @ u_tilde).tocsc()
    sw = np.array([
        U[samples.sample_indices[j], j] for j in range(samples.p)
    ])
    return LocalBasis(U, samples.sample_indices.copy(), samples.radii.copy(),
                      sw, profile)


def _sample_submatrix(record: GeodesicRecord, samples: SampleSet,
                      profile: ChiProfile) -> np.ndarray:
    """Dense p x p matrix S[k, i] = u~_i(v_k) under current radii."""
    p = samples.p
    pos = {int(v): k for k, v in enumerate(samples.sample_indices)}
    S = np.zeros((p, p))
    for i in range(p):
        verts, dists = record.truncated(i, samples.radii[i])
        for v, d in zip(verts, dists):
            k = pos.get(int(v))
            if k is not None:
                S[k, i] = eval_chi(profile, d / samples.radii[i])
    return S


def _rebuild_sub_column(S: np.ndarray, record: GeodesicRecord,
                        samples: SampleSet, profile: ChiProfile, i: int) -> None:
    pos = {int(v): k for k, v in enumerate(samples.sample_indices)}
    S[:, i] = 0.0
    verts, dists = record.truncated(i, samples.radii[i])
    for v, d in zip(verts, dists):
        k = pos.get(int(v))
        if k is not None:
            S[k, i] = eval_chi(profile, d / samples.radii[i])


def adapt_radii(mesh: TriMesh, samples: SampleSet, record: GeodesicRecord,
                profile: ChiProfile | None = None, threshold: float = 0.3,
                max_rounds: int | None = None, round_hook=None) -> LocalBasis:
    """Adaptive-radius construction of the local basis.

    While some self-weight is below ``threshold``, the radius of its most
    influential neighbor is halved (ties to the lowest sample index), with a
    floor at the shortest edge incident to that neighbor. Samples whose
    self-weight cannot be raised past the floor are left as-is and reported
    via the return value's ``self_weights``. Vertices left uncovered by the
    shrinking are promoted to new samples at the end.
    """
    if profile is None:
        profile = ChiProfile()
    if max_rounds is None:
        max_rounds = 50 * samples.p
    min_edge = mesh.min_incident_edge()

    while True:  # restarts only when new samples are added for coverage
        S = _sample_submatrix(record, samples, profile)
        stuck = np.zeros(samples.p, dtype=bool)
        rounds = 0
        while True:
            row_sums = S.sum(axis=1)
            sw = 1.0 / row_sums  # diagonal entries of S are exactly chi(0)=1
            low = np.flatnonzero((sw < threshold) & ~stuck)
            if round_hook is not None:
                round_hook(rounds, sw.copy())
            if len(low) == 0:
                break
            rounds += 1
            if rounds > max_rounds:
                raise NonTerminationError(
                    f"adaptive radius exceeded {max_rounds} rounds; "
                    f"offending samples: {low[:10].tolist()}"
                )
            k = low[np.argmin(sw[low])]
            # most influential neighbor whose radius can still be halved
            influence = S[k].copy()
            influence[k] = -np.inf
            floor = min_edge[samples.sample_indices]
            influence[samples.radii / 2.0 < floor] = -np.inf
            if not np.isfinite(influence.max()) or influence.max() <= 0:
                stuck[k] = True
                continue
            j = int(np.argmax(influence))  # argmax takes the lowest index on ties
            samples.radii[j] /= 2.0
            _rebuild_sub_column(S, record, samples, profile, j)

        u_tilde = build_unnormalized(record, samples.radii, profile)
        uncovered = np.flatnonzero(np.asarray(u_tilde.sum(axis=1)).ravel() <= 0)
        if len(uncovered) == 0:
            return normalize_partition(u_tilde, samples, profile)
        for v in uncovered:
            add_sample(mesh, samples, record, int(v))
