#!/usr/bin/env python3
"""Refinement cost versus mesh resolution at a fixed sample count.

Runs the sample-level refinement loop on planar grids of growing
resolution while keeping the same p samples (coarse grid points carried
to each finer grid), then reports the per-iteration wall time. The loop
touches only p- and K-sized objects, so the time should be flat while
the vertex count grows 4x per row.
"""

import argparse
import time

import numpy as np

from common import grid
from meshmatch import (PointwiseMap, adapt_radii, assemble_laplacian,
                       cover_unreached, local_dijkstra, normalize_area,
                       poisson_disk_sample, reduced_spectrum, scalable_zoomout)
from meshmatch.sampling import SampleSet, initial_radius
from meshmatch.zoomout import ZoomOutSchedule


def build(mesh, sample_indices, K):
    rho0 = initial_radius(mesh, len(sample_indices))
    samples = SampleSet(sample_indices.astype(np.int64),
                        np.full(len(sample_indices), rho0), rho0)
    record = local_dijkstra(mesh, samples)
    samples, record = cover_unreached(mesh, samples, record)
    basis = adapt_radii(mesh, samples, record, threshold=0.3)
    return samples, reduced_spectrum(assemble_laplacian(mesh), basis, K)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=int, default=1000)
    ap.add_argument("--nx", type=int, default=59)
    ap.add_argument("--ny", type=int, default=25)
    ap.add_argument("--levels", type=int, default=3,
                    help="number of resolutions (each 4x the previous)")
    ap.add_argument("--k-init", type=int, default=20)
    ap.add_argument("--k-final", type=int, default=60)
    ap.add_argument("--seed", type=int, default=5)
    args = ap.parse_args()

    coarse = normalize_area(grid(args.nx, args.ny))
    base = poisson_disk_sample(coarse, args.p, args.seed)
    ci, cj = np.divmod(base.sample_indices, args.ny)
    schedule = ZoomOutSchedule(args.k_init, args.k_final, 2)

    header = f"{'vertices':>9} {'p':>6} {'build [s]':>10} {'per-iter [ms]':>14}"
    print(header)
    print("-" * len(header))
    for level in range(args.levels):
        scale = 2 ** level
        nx = scale * (args.nx - 1) + 1
        ny = scale * (args.ny - 1) + 1
        mesh = normalize_area(grid(nx, ny))
        indices = scale * ci * ny + scale * cj
        t0 = time.perf_counter()
        samples, spectrum = build(mesh, indices, args.k_final)
        t_build = time.perf_counter() - t0
        stamps = [time.perf_counter()]
        pi_bar = PointwiseMap(np.arange(samples.p), "sample")
        scalable_zoomout(
            spectrum, spectrum, pi_bar, schedule,
            iteration_hook=lambda k, C, a: stamps.append(time.perf_counter()))
        per_iter = 1e3 * float(np.median(np.diff(stamps)))
        print(f"{mesh.n_vertices:>9} {samples.p:>6} {t_build:10.2f} "
              f"{per_iter:14.2f}")


if __name__ == "__main__":
    main()
