#!/usr/bin/env python3
"""Benchmark sample-level refinement against the dense baseline.

Builds an exactly isometric strip pair (or loads two user meshes with a
shared vertex numbering), corrupts the identity initialization, and compares:

  * the corrupted init itself,
  * classic ZoomOut on dense eigenbases (exact eigensolve),
  * sample-level ZoomOut plus dense conversion (the scalable pipeline),

reporting mean geodesic error (x1e3), coverage, Dirichlet smoothness and
per-stage wall time.
"""

import argparse
import time

import numpy as np

from common import flat_strip, rolled_strip
from meshmatch import (PointwiseMap, assemble_laplacian, coverage,
                       dense_conversion, load_mesh, normalize_area,
                       scalable_zoomout, smoothness, solve_exact,
                       standard_zoomout)
from meshmatch.metrics import GeodesicCache, accuracy
from meshmatch.pipeline import PipelineConfig, prepare_shape, restrict_init_map
from meshmatch.zoomout import ZoomOutSchedule


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--source", help="source mesh (default: synthetic flat strip)")
    ap.add_argument("--target", help="target mesh (default: rolled strip)")
    ap.add_argument("--p", type=int, default=1200, help="sample count")
    ap.add_argument("--k-init", type=int, default=20)
    ap.add_argument("--k-final", type=int, default=60)
    ap.add_argument("--step", type=int, default=2)
    ap.add_argument("--corruption", type=float, default=0.2,
                    help="fraction of init entries replaced by random vertices")
    ap.add_argument("--eval-size", type=int, default=300,
                    help="number of evaluation source vertices")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--skip-standard", action="store_true",
                    help="skip the dense baseline (for large meshes)")
    return ap.parse_args()


def main():
    args = parse_args()
    import os
    import tempfile

    from common import write_off

    tmp = tempfile.mkdtemp(prefix="meshmatch_bench_")
    if args.source:
        src_path, tgt_path = args.source, args.target
    else:
        src_path = os.path.join(tmp, "flat.off")
        tgt_path = os.path.join(tmp, "rolled.off")
        write_off(src_path, flat_strip())
        write_off(tgt_path, rolled_strip())

    src_mesh = normalize_area(load_mesh(src_path))
    tgt_mesh = normalize_area(load_mesh(tgt_path))
    n = src_mesh.n_vertices
    if tgt_mesh.n_vertices != n:
        raise SystemExit("benchmark assumes a shared vertex numbering")

    rng = np.random.default_rng(args.seed)
    init = np.arange(n)
    bad = rng.choice(n, int(args.corruption * n), replace=False)
    init[bad] = rng.integers(0, n, len(bad))
    gt = PointwiseMap(np.arange(n))
    subset = rng.choice(n, min(args.eval_size, n), replace=False)
    schedule = ZoomOutSchedule(args.k_init, args.k_final, args.step)

    lap_src = assemble_laplacian(src_mesh)
    lap_tgt = assemble_laplacian(tgt_mesh)
    cache = GeodesicCache(tgt_mesh)

    rows = []

    def report(name, pmap, seconds):
        err = accuracy(pmap, gt, tgt_mesh, subset, cache)[0]
        rows.append((name, 1e3 * err, coverage(pmap, tgt_mesh),
                     smoothness(pmap, lap_src, tgt_mesh), seconds))

    report("corrupted init", PointwiseMap(init), 0.0)

    if not args.skip_standard:
        t0 = time.perf_counter()
        spec_src = solve_exact(lap_src, args.k_final)
        spec_tgt = solve_exact(lap_tgt, args.k_final)
        _, pi_std = standard_zoomout(spec_src, spec_tgt, lap_tgt.mass_diagonal,
                                     PointwiseMap(init), schedule)
        report("dense-basis refinement", pi_std, time.perf_counter() - t0)

    t0 = time.perf_counter()
    # distinct sampling seeds: identical seeds on an isometric pair with
    # shared connectivity would give identical sample sets and an
    # unrealistically easy problem
    config = PipelineConfig(p_target=args.p, k_init=args.k_init,
                            k_final=args.k_final, step=args.step,
                            seed=args.seed)
    config_tgt = PipelineConfig(p_target=args.p, k_init=args.k_init,
                                k_final=args.k_final, step=args.step,
                                seed=args.seed + 1)
    shape_src = prepare_shape(src_path, config)
    shape_tgt = prepare_shape(tgt_path, config_tgt)
    pi_bar = restrict_init_map(PointwiseMap(init), shape_src, shape_tgt)
    C_hat, pi_bar = scalable_zoomout(shape_src.spectrum, shape_tgt.spectrum,
                                     pi_bar, schedule)
    dense = dense_conversion(shape_src.spectrum.lifted_vectors,
                             shape_tgt.spectrum.lifted_vectors, C_hat)
    report("sample-level + conversion", dense, time.perf_counter() - t0)

    print(f"pair: {src_path} -> {tgt_path}  (n={n}, p={shape_src.samples.p}, "
          f"K={args.k_final})")
    header = f"{'method':<26} {'err x1e3':>9} {'coverage':>9} " \
             f"{'smoothness':>11} {'time [s]':>9}"
    print(header)
    print("-" * len(header))
    for name, err, cov, smooth, seconds in rows:
        print(f"{name:<26} {err:9.2f} {cov:9.3f} {smooth:11.3f} {seconds:9.2f}")


if __name__ == "__main__":
    main()
