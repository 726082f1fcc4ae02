"""Poisson-disk sampling and fixed-radius multi-source geodesic distances.

Geodesic distance means shortest path on the mesh edge graph (Dijkstra).
Per-sample runs are pruned to the Euclidean ball of the search radius,
which is valid because graph distance dominates the straight-line distance
between embedded vertices.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import SamplingError
from .mesh import TriMesh


@dataclass
class SampleSet:
    """Sample vertex ids with their (mutable during adaptation) ball radii."""

    sample_indices: np.ndarray  # (p,) int64, distinct
    radii: np.ndarray           # (p,) float64, 0 < rho_j <= rho_0
    initial_radius: float

    @property
    def p(self) -> int:
        return len(self.sample_indices)

    def copy(self) -> "SampleSet":
        return SampleSet(
            self.sample_indices.copy(), self.radii.copy(), self.initial_radius
        )


@dataclass
class GeodesicRecord:
    """Per-sample sorted (vertex, distance) lists within the initial radius.

    ``dijkstra_runs`` counts every shortest-path sweep; radius shrinking must
    never increment it (re-truncation is a binary search on the sorted lists).
    """

    n_vertices: int
    radius: float
    vertex_lists: list = field(default_factory=list)    # per sample: int64 array
    distance_lists: list = field(default_factory=list)  # per sample: ascending float64
    dijkstra_runs: int = 0

    @property
    def p(self) -> int:
        return len(self.vertex_lists)

    def truncated(self, j: int, rho: float):
        """Entries of sample j with distance < rho (support is the open ball)."""
        cut = np.searchsorted(self.distance_lists[j], rho, side="left")
        return self.vertex_lists[j][:cut], self.distance_lists[j][:cut]

    def reached_mask(self, radii: np.ndarray | None = None) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        for j in range(self.p):
            rho = self.radius if radii is None else radii[j]
            verts, _ = self.truncated(j, rho)
            mask[verts] = True
        return mask


def initial_radius(mesh: TriMesh, p: int) -> float:
    """Ball radius giving each of p samples three times its fair-share disk."""
    return 3.0 * np.sqrt(mesh.total_area / (p * np.pi))


class _Graph:
    """CSR adjacency unpacked for fast heapq Dijkstra."""

    def __init__(self, mesh: TriMesh):
        g = mesh.edge_graph()
        self.indptr = g.indptr
        self.indices = g.indices
        self.data = g.data
        self.points = mesh.vertices
        self.tree = cKDTree(mesh.vertices)


def _dijkstra_ball(graph: _Graph, source: int, radius: float,
                   stop_set: np.ndarray | None = None):
    """Distances from ``source`` to vertices within graph distance ``radius``.

    The frontier is restricted to the Euclidean ball around the source. When
    ``stop_set`` (bool mask) is given, the search aborts as soon as any
    flagged vertex is settled, returning that vertex id.
    """
    allowed = graph.tree.query_ball_point(graph.points[source], radius)
    in_ball = np.zeros(len(graph.points), dtype=bool)
    in_ball[allowed] = True
    dist = {source: 0.0}
    done = set()
    heap = [(0.0, source)]
    indptr, indices, data = graph.indptr, graph.indices, graph.data
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if stop_set is not None and stop_set[u]:
            return None, u
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            if not in_ball[v]:
                continue
            nd = d + data[k]
            if nd <= radius and nd < dist.get(v, np.inf):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    if stop_set is not None:
        return None, -1
    verts = np.fromiter(done, dtype=np.int64)
    dists = np.array([dist[v] for v in verts])
    order = np.argsort(dists, kind="stable")
    return verts[order], dists[order]


def poisson_disk_sample(mesh: TriMesh, target_count: int, seed: int) -> SampleSet:
    """Greedy dart throwing over a seeded vertex permutation.

    Vertices are accepted when no previously accepted sample lies within the
    separation radius (geodesic). The separation starts at the fair-share disk
    radius sqrt(Area / (target * pi)) and shrinks if the candidate pool runs
    out before 0.8x the target is reached.
    """
    n = mesh.n_vertices
    if target_count > n or target_count < 1:
        raise SamplingError(f"cannot draw {target_count} samples from {n} vertices")
    graph = _Graph(mesh)
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    sep = np.sqrt(mesh.total_area / (target_count * np.pi))
    while True:
        accepted_mask = np.zeros(n, dtype=bool)
        accepted: list[int] = []
        for cand in order:
            _, hit = _dijkstra_ball(graph, int(cand), sep, stop_set=accepted_mask)
            if hit < 0:
                accepted.append(int(cand))
                accepted_mask[cand] = True
                if len(accepted) >= target_count:
                    break
        if len(accepted) >= 0.8 * target_count:
            break
        sep *= 0.7
    idx = np.array(sorted(accepted), dtype=np.int64)
    rho0 = initial_radius(mesh, len(idx))
    return SampleSet(idx, np.full(len(idx), rho0), rho0)


def local_dijkstra(mesh: TriMesh, samples: SampleSet,
                   graph: _Graph | None = None) -> GeodesicRecord:
    """Per-sample pruned Dijkstra up to the initial radius."""
    if graph is None:
        graph = _Graph(mesh)
    record = GeodesicRecord(mesh.n_vertices, samples.initial_radius)
    record._graph = graph  # kept for later sample additions
    for s in samples.sample_indices:
        verts, dists = _dijkstra_ball(graph, int(s), samples.initial_radius)
        record.vertex_lists.append(verts)
        record.distance_lists.append(dists)
        record.dijkstra_runs += 1
    return record


def add_sample(mesh: TriMesh, samples: SampleSet, record: GeodesicRecord,
               vertex: int) -> None:
    """Append ``vertex`` as a new sample with the initial radius."""
    graph = getattr(record, "_graph", None)
    if graph is None:
        graph = _Graph(mesh)
        record._graph = graph
    samples.sample_indices = np.append(samples.sample_indices, vertex)
    samples.radii = np.append(samples.radii, samples.initial_radius)
    verts, dists = _dijkstra_ball(graph, int(vertex), samples.initial_radius)
    record.vertex_lists.append(verts)
    record.distance_lists.append(dists)
    record.dijkstra_runs += 1


def cover_unreached(mesh: TriMesh, samples: SampleSet,
                    record: GeodesicRecord) -> tuple[SampleSet, GeodesicRecord]:
    """Promote unreached vertices to samples until every vertex is covered."""
    while True:
        unreached = np.flatnonzero(~record.reached_mask(samples.radii))
        if len(unreached) == 0:
            return samples, record
        add_sample(mesh, samples, record, int(unreached[0]))
