"""Triangle mesh container, file loading and Laplace-Beltrami assembly.

The discretization is the cotangent stiffness matrix with a barycentric
(1/3-area) lumped mass matrix, so the mass matrix is diagonal. Obtuse
triangles keep their negative cotangent weights: clamping would alter the
spectrum that the rest of the pipeline reasons about.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateTriangleError, ParseError, TopologyError


@dataclass(frozen=True)
class TriMesh:
    """Immutable triangle mesh with per-vertex lumped areas.

    Isolated (unreferenced) vertices are dropped at load time;
    ``original_indices[i]`` maps compact vertex ``i`` back to its index
    in the source file.
    """

    vertices: np.ndarray       # (n, 3) float64
    triangles: np.ndarray      # (m, 3) int64
    original_indices: np.ndarray = field(default=None)  # (n,) int64

    def __post_init__(self):
        v = np.ascontiguousarray(self.vertices, dtype=np.float64)
        t = np.ascontiguousarray(self.triangles, dtype=np.int64)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        if self.original_indices is None:
            object.__setattr__(self, "original_indices", np.arange(len(v)))
        areas = triangle_areas(v, t)
        pva = np.zeros(len(v))
        for c in range(3):
            np.add.at(pva, t[:, c], areas / 3.0)
        object.__setattr__(self, "_per_vertex_area", pva)
        object.__setattr__(self, "_tri_areas", areas)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def per_vertex_area(self) -> np.ndarray:
        return self._per_vertex_area

    @property
    def total_area(self) -> float:
        return float(self._tri_areas.sum())

    def edges(self) -> np.ndarray:
        """Unique undirected edges, (e, 2) with first index smaller."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)

    def edge_graph(self) -> sp.csr_matrix:
        """Symmetric sparse adjacency weighted by Euclidean edge length."""
        e = self.edges()
        w = np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1)
        i = np.concatenate([e[:, 0], e[:, 1]])
        j = np.concatenate([e[:, 1], e[:, 0]])
        n = self.n_vertices
        return sp.csr_matrix((np.concatenate([w, w]), (i, j)), shape=(n, n))

    def min_incident_edge(self) -> np.ndarray:
        """Per-vertex length of the shortest incident edge."""
        e = self.edges()
        w = np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1)
        out = np.full(self.n_vertices, np.inf)
        np.minimum.at(out, e[:, 0], w)
        np.minimum.at(out, e[:, 1], w)
        return out


@dataclass(frozen=True)
class LaplacianPair:
    """Cotangent stiffness and diagonal lumped mass of a mesh."""

    stiffness_W: sp.csr_matrix
    mass_A: sp.dia_matrix

    @property
    def mass_diagonal(self) -> np.ndarray:
        return self.mass_A.diagonal()


def triangle_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    a = vertices[triangles[:, 1]] - vertices[triangles[:, 0]]
    b = vertices[triangles[:, 2]] - vertices[triangles[:, 0]]
    return 0.5 * np.linalg.norm(np.cross(a, b), axis=1)


def _validate(vertices: np.ndarray, triangles: np.ndarray):
    n = len(vertices)
    if n < 4 or len(triangles) < 1:
        raise ParseError(f"mesh too small: {n} vertices, {len(triangles)} triangles")
    if triangles.min() < 0 or triangles.max() >= n:
        raise TopologyError(
            f"triangle index {triangles.max()} out of range for {n} vertices"
        )
    for t in triangles:
        if len(set(int(x) for x in t)) != 3:
            raise TopologyError(f"degenerate triangle with repeated vertex: {t}")
    # edge-manifold: no edge shared by more than two triangles
    e = np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])
    e.sort(axis=1)
    _, counts = np.unique(e, axis=0, return_counts=True)
    if counts.max() > 2:
        raise TopologyError("non-manifold edge shared by more than two triangles")


def _drop_isolated(vertices, triangles):
    referenced = np.zeros(len(vertices), dtype=bool)
    referenced[triangles.ravel()] = True
    if referenced.all():
        return vertices, triangles, np.arange(len(vertices))
    remap = -np.ones(len(vertices), dtype=np.int64)
    keep = np.flatnonzero(referenced)
    remap[keep] = np.arange(len(keep))
    return vertices[keep], remap[triangles], keep


def _parse_off(lines):
    it = iter(lines)
    header = next(it).strip()
    if not header.startswith("OFF"):
        raise ParseError("missing OFF header")
    rest = header[3:].split()
    counts = rest if rest else next(it).split()
    nv, nf = int(counts[0]), int(counts[1])
    verts = np.array([next(it).split()[:3] for _ in range(nv)], dtype=np.float64)
    tris = []
    for _ in range(nf):
        row = next(it).split()
        if int(row[0]) != 3:
            raise ParseError("only triangular faces are supported")
        tris.append(row[1:4])
    return verts, np.array(tris, dtype=np.int64)


def _parse_obj(lines):
    verts, tris = [], []
    for line in lines:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append(parts[1:4])
        elif parts[0] == "f":
            if len(parts) != 4:
                raise ParseError("only triangular faces are supported")
            # 1-based, possibly v/vt/vn
            tris.append([int(p.split("/")[0]) - 1 for p in parts[1:4]])
    return np.array(verts, dtype=np.float64), np.array(tris, dtype=np.int64)


def _parse_ply(lines):
    it = iter(lines)
    if next(it).strip() != "ply":
        raise ParseError("missing ply header")
    nv = nf = None
    fmt = None
    while True:
        line = next(it).strip()
        if line.startswith("format"):
            fmt = line.split()[1]
        elif line.startswith("element vertex"):
            nv = int(line.split()[-1])
        elif line.startswith("element face"):
            nf = int(line.split()[-1])
        elif line == "end_header":
            break
    if fmt != "ascii":
        raise ParseError("only ASCII PLY is supported")
    if nv is None or nf is None:
        raise ParseError("PLY header missing vertex or face element")
    verts = np.array([next(it).split()[:3] for _ in range(nv)], dtype=np.float64)
    tris = []
    for _ in range(nf):
        row = next(it).split()
        if int(row[0]) != 3:
            raise ParseError("only triangular faces are supported")
        tris.append(row[1:4])
    return verts, np.array(tris, dtype=np.int64)


_PARSERS = {"off": _parse_off, "obj": _parse_obj, "ply": _parse_ply}


def load_mesh(path: str, fmt: str | None = None) -> TriMesh:
    """Load an OFF / OBJ / ASCII-PLY triangle mesh and validate it."""
    if fmt is None:
        fmt = os.path.splitext(path)[1].lstrip(".").lower()
    if fmt not in _PARSERS:
        raise ParseError(f"unsupported mesh format: {fmt!r}")
    with open(path) as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    try:
        verts, tris = _PARSERS[fmt](lines)
    except (StopIteration, ValueError, IndexError) as exc:
        raise ParseError(f"malformed {fmt} file {path}: {exc}") from exc
    if verts.ndim != 2 or verts.shape[1] != 3 or tris.size == 0:
        raise ParseError(f"malformed {fmt} file {path}")
    _validate(verts, tris)
    verts, tris, keep = _drop_isolated(verts, tris)
    mesh = TriMesh(verts, tris, keep)
    if mesh.per_vertex_area.min() <= 0:
        raise TopologyError("vertex with non-positive lumped area")
    return mesh


def assemble_laplacian(mesh: TriMesh) -> LaplacianPair:
    """Cotangent stiffness + barycentric lumped mass of a mesh.

    W is PSD with the constant vector in its kernel; boundary edges get the
    natural (Neumann) one-sided cotangent weight.
    """
    areas = triangle_areas(mesh.vertices, mesh.triangles)
    mean_area = areas.mean()
    if (areas < 1e-12 * mean_area).any():
        raise DegenerateTriangleError(
            f"{int((areas < 1e-12 * mean_area).sum())} near-zero-area triangles"
        )
    v, t = mesh.vertices, mesh.triangles
    n = mesh.n_vertices
    rows, cols, vals = [], [], []
    for k in range(3):
        i, j, o = t[:, k], t[:, (k + 1) % 3], t[:, (k + 2) % 3]
        # cotangent of the angle at o, opposite edge (i, j)
        e1 = v[i] - v[o]
        e2 = v[j] - v[o]
        cos = np.einsum("ij,ij->i", e1, e2)
        sin = np.linalg.norm(np.cross(e1, e2), axis=1)
        w = 0.5 * cos / sin
        rows.extend([i, j])
        cols.extend([j, i])
        vals.extend([-w, -w])
        rows.extend([i, j])
        cols.extend([i, j])
        vals.extend([w, w])
    W = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )
    W = (W + W.T) * 0.5  # exact symmetry regardless of summation order
    A = sp.dia_matrix((mesh.per_vertex_area, 0), shape=(n, n))
    return LaplacianPair(W.tocsr(), A)


def normalize_area(mesh: TriMesh) -> TriMesh:
    """Uniformly rescale vertices so that the total surface area is 1."""
    scale = 1.0 / np.sqrt(mesh.total_area)
    return TriMesh(mesh.vertices * scale, mesh.triangles, mesh.original_indices)
