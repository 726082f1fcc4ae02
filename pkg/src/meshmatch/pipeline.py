"""End-to-end pipeline stages shared by the CLI and the experiment scripts.

Stages mirror the timing decomposition: Preprocess (sampling, geodesics,
local basis), LBO (reduced eigenproblem), ZoomOut (sample-level refinement),
Conversion (dense pointwise recovery).
"""

from __future__ import annotations

import hashlib
import logging
import os
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import serial
from .basis import ChiKind, ChiProfile, LocalBasis, adapt_radii
from .errors import InitMapError, MeshMatchError
from .fmap import PointwiseMap
from .mesh import TriMesh, assemble_laplacian, load_mesh, normalize_area
from .sampling import SampleSet, cover_unreached, local_dijkstra, poisson_disk_sample
from .spectral import ReducedSpectrum, lift, reduced_spectrum
from .zoomout import (ZoomOutSchedule, build_guided_candidates, dense_conversion,
                      scalable_zoomout)

log = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    p_target: int = 3000
    k_init: int = 20
    k_final: int = 100
    self_weight_min: float = 0.3
    chi: str = "poly"
    seed: int = 0
    guided: str = "auto"          # auto | on | off
    guided_threshold: int = 100_000
    step: int = 1
    cache_dir: str | None = None
    normalize: bool = True

    def profile(self) -> ChiProfile:
        return ChiProfile(ChiKind.POLYNOMIAL if self.chi == "poly"
                          else ChiKind.SMOOTH_BUMP)

    def schedule(self) -> ZoomOutSchedule:
        return ZoomOutSchedule(self.k_init, self.k_final, self.step)

    def basis_key(self, mesh_path: str) -> str:
        h = hashlib.sha256()
        with open(mesh_path, "rb") as fh:
            h.update(fh.read())
        tag = (f"p={self.p_target};sw={self.self_weight_min};chi={self.chi};"
               f"seed={self.seed};K={self.k_final};norm={self.normalize}")
        h.update(tag.encode())
        return h.hexdigest()[:16]


@dataclass
class ShapeData:
    mesh: TriMesh
    samples: SampleSet
    basis: LocalBasis
    spectrum: ReducedSpectrum
    timings: dict = field(default_factory=dict)
    cached: bool = False


def prepare_shape(mesh_path: str, config: PipelineConfig) -> ShapeData:
    """Load, sample, build the local basis and reduced spectrum; cache-aware."""
    t0 = time.perf_counter()
    mesh = load_mesh(mesh_path)
    if config.normalize:
        mesh = normalize_area(mesh)

    cache = None
    if config.cache_dir:
        os.makedirs(config.cache_dir, exist_ok=True)
        key = config.basis_key(mesh_path)
        cache = {
            "samples": os.path.join(config.cache_dir, f"{key}.samples.txt"),
            "basis": os.path.join(config.cache_dir, f"{key}.basis.bin"),
            "spectrum": os.path.join(config.cache_dir, f"{key}.spec.bin"),
        }
        if all(os.path.exists(p) for p in cache.values()):
            try:
                samples = serial.load_samples(cache["samples"])
                basis, _ = serial.load_basis(cache["basis"])
                spectrum, _ = serial.load_spectrum(cache["spectrum"])
                spectrum.lifted_vectors = lift(basis, spectrum.coeff_vectors)
                return ShapeData(mesh, samples, basis, spectrum, cached=True)
            except (MeshMatchError, OSError, ValueError) as exc:
                log.warning("corrupt cache for %s (%s); recomputing", mesh_path, exc)

    samples = poisson_disk_sample(mesh, min(config.p_target, mesh.n_vertices),
                                  config.seed)
    record = local_dijkstra(mesh, samples)
    samples, record = cover_unreached(mesh, samples, record)
    basis = adapt_radii(mesh, samples, record, config.profile(),
                        threshold=config.self_weight_min)
    t_pre = time.perf_counter()

    laplacian = assemble_laplacian(mesh)
    K = min(config.k_final, samples.p)
    spectrum = reduced_spectrum(laplacian, basis, K)
    t_lbo = time.perf_counter()

    if cache:
        serial.save_samples(cache["samples"], samples)
        serial.save_basis(cache["basis"], basis, config.self_weight_min)
        serial.save_spectrum(cache["spectrum"], spectrum, mesh.n_vertices)

    data = ShapeData(mesh, samples, basis, spectrum)
    data.timings = {"Preprocess": t_pre - t0, "LBO": t_lbo - t_pre}
    data._record = record
    return data


def restrict_init_map(init: PointwiseMap, shape_N: ShapeData,
                      shape_M: ShapeData) -> PointwiseMap:
    """Sample-level initialization from a dense init: each N-sample's image
    vertex is snapped to the Euclidean-nearest M-sample."""
    if len(init.assignment) != shape_N.mesh.n_vertices:
        raise InitMapError(
            f"init map has {len(init.assignment)} rows, "
            f"expected {shape_N.mesh.n_vertices}"
        )
    if init.assignment.min() < 0 or init.assignment.max() >= shape_M.mesh.n_vertices:
        raise InitMapError("init map index out of range")
    image_verts = init.assignment[shape_N.samples.sample_indices]
    tree = cKDTree(shape_M.mesh.vertices[shape_M.samples.sample_indices])
    _, nearest = tree.query(shape_M.mesh.vertices[image_verts])
    return PointwiseMap(np.asarray(nearest, dtype=np.int64), "sample")


def match_pair(shape_N: ShapeData, shape_M: ShapeData, init: PointwiseMap,
               config: PipelineConfig):
    """Scalable ZoomOut + dense conversion. Returns (C_hat, sample map,
    dense map, timings)."""
    pi_bar = restrict_init_map(init, shape_N, shape_M)
    schedule = ZoomOutSchedule(config.k_init,
                               min(config.k_final,
                                   shape_N.spectrum.K, shape_M.spectrum.K),
                               config.step)
    t0 = time.perf_counter()
    C_hat, pi_bar = scalable_zoomout(shape_N.spectrum, shape_M.spectrum,
                                     pi_bar, schedule)
    t_zo = time.perf_counter()

    use_guided = config.guided == "on" or (
        config.guided == "auto"
        and shape_M.mesh.n_vertices > config.guided_threshold
    )
    guided = None
    if use_guided:
        guided = build_guided_candidates(shape_N.basis, shape_M.basis, pi_bar)
    dense = dense_conversion(shape_N.spectrum.lifted_vectors,
                             shape_M.spectrum.lifted_vectors, C_hat, guided)
    t_conv = time.perf_counter()
    timings = {"ZoomOut": t_zo - t0, "Conversion": t_conv - t_zo}
    return C_hat, pi_bar, dense, timings


def timing_line(stages: dict) -> str:
    """One-line stage report in the four-column order."""
    cols = ["Preprocess", "LBO", "ZoomOut", "Conversion"]
    parts = [f"{c}: {stages.get(c, float('nan')):.2f}s" for c in cols]
    total = sum(v for v in stages.values() if v == v)
    return " | ".join(parts) + f" | Total: {total:.2f}s"
