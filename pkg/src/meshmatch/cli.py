"""Command-line pipeline driver with cacheable stages."""

from __future__ import annotations

import sys

import click
import numpy as np

from . import bounds as bounds_mod
from . import serial
from .errors import MeshMatchError
from .fmap import exact_fmap, reduced_fmap
from .mesh import assemble_laplacian
from .metrics import estimation_delta, evaluate
from .pipeline import (PipelineConfig, match_pair, prepare_shape, restrict_init_map,
                       timing_line)
from .spectral import EXACT_SOLVE_GUARD, solve_exact

EXIT_VALIDATION = 2
EXIT_BOUND_VIOLATION = 3


def _config_options(fn):
    opts = [
        click.option("--samples", "p_target", default=3000, show_default=True,
                     help="Target Poisson-disk sample count per shape."),
        click.option("--k-init", default=20, show_default=True),
        click.option("--k-final", default=100, show_default=True),
        click.option("--self-weight-min", default=0.3, show_default=True),
        click.option("--chi", type=click.Choice(["poly", "bump"]), default="poly",
                     show_default=True),
        click.option("--seed", default=0, show_default=True),
        click.option("--guided", type=click.Choice(["auto", "on", "off"]),
                     default="auto", show_default=True),
        click.option("--cache-dir", default=None),
        click.option("--timing", is_flag=True, help="Print per-stage wall times."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _build_config(p_target, k_init, k_final, self_weight_min, chi, seed,
                  guided, cache_dir) -> PipelineConfig:
    return PipelineConfig(p_target=p_target, k_init=k_init, k_final=k_final,
                          self_weight_min=self_weight_min, chi=chi, seed=seed,
                          guided=guided, cache_dir=cache_dir)


@click.group()
def main():
    """Scalable functional-map correspondence between dense triangle meshes."""


@main.command("basis")
@click.argument("mesh_path", type=click.Path(exists=True))
@_config_options
def cmd_basis(mesh_path, timing, **cfg):
    """Build (and cache) samples, local basis and reduced spectrum."""
    config = _build_config(**cfg)
    if config.cache_dir is None:
        raise click.UsageError("basis caching requires --cache-dir")
    try:
        shape = prepare_shape(mesh_path, config)
    except MeshMatchError as exc:
        click.echo(f"error [basis]: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    if shape.cached:
        click.echo("cached")
    else:
        click.echo(
            f"built basis: p={shape.samples.p}, K={shape.spectrum.K}, "
            f"min self-weight {shape.basis.self_weights.min():.3f}"
        )
        if timing:
            click.echo(timing_line(shape.timings))


@main.command("match")
@click.argument("source_mesh", type=click.Path(exists=True))
@click.argument("target_mesh", type=click.Path(exists=True))
@click.argument("init_map", type=click.Path(exists=True))
@click.option("--out-prefix", default="match", show_default=True)
@_config_options
def cmd_match(source_mesh, target_mesh, init_map, out_prefix, timing, **cfg):
    """Match SOURCE_MESH to TARGET_MESH starting from INIT_MAP (one 0-based
    target vertex index per line). Writes dense map, sample map, sample index
    table and the final functional map."""
    config = _build_config(**cfg)
    try:
        shape_N = prepare_shape(source_mesh, config)
        shape_M = prepare_shape(target_mesh, config)
        init = serial.load_pointwise_map(init_map, shape_M.mesh.n_vertices)
        C_hat, pi_bar, dense, zo_timings = match_pair(shape_N, shape_M, init, config)
    except MeshMatchError as exc:
        click.echo(f"error [match]: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    serial.save_pointwise_map(f"{out_prefix}.dense.map", dense)
    serial.save_pointwise_map(f"{out_prefix}.sample.map", pi_bar)
    np.savetxt(f"{out_prefix}.samples_src.txt",
               shape_N.samples.sample_indices, fmt="%d")
    np.savetxt(f"{out_prefix}.samples_tgt.txt",
               shape_M.samples.sample_indices, fmt="%d")
    serial.save_matrix_text(f"{out_prefix}.fmap.txt", C_hat.C)
    serial.save_matrix_binary(f"{out_prefix}.fmap.bin", C_hat.C)
    click.echo(f"wrote {out_prefix}.dense.map ({len(dense.assignment)} vertices)")
    if timing:
        stages = dict(shape_N.timings)
        for key, val in shape_M.timings.items():
            stages[key] = stages.get(key, 0.0) + val
        stages.update(zo_timings)
        click.echo(timing_line(stages))


@main.command("eval")
@click.argument("map_file", type=click.Path(exists=True))
@click.argument("gt_file", type=click.Path(exists=True))
@click.argument("source_mesh", type=click.Path(exists=True))
@click.argument("target_mesh", type=click.Path(exists=True))
@click.option("--subset", default=None, type=click.Path(exists=True),
              help="Optional file of evaluation vertex indices.")
@click.option("--out", default="eval.json", show_default=True)
@_config_options
def cmd_eval(map_file, gt_file, source_mesh, target_mesh, subset, out,
             timing, **cfg):
    """Accuracy / coverage / smoothness report for a computed map."""
    config = _build_config(**cfg)
    try:
        from .mesh import load_mesh, normalize_area
        mesh_N = load_mesh(source_mesh)
        mesh_M = load_mesh(target_mesh)
        if config.normalize:
            mesh_N, mesh_M = normalize_area(mesh_N), normalize_area(mesh_M)
        pred = serial.load_pointwise_map(map_file, mesh_M.n_vertices)
        gt = serial.load_pointwise_map(gt_file, mesh_M.n_vertices)
        idx = np.loadtxt(subset, dtype=np.int64, ndmin=1) if subset else None
        lap_N = assemble_laplacian(mesh_N)
        report = evaluate(pred, gt, lap_N, mesh_M, idx)
    except MeshMatchError as exc:
        click.echo(f"error [eval]: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    serial.save_eval_report(out, report, curve_path=out + ".curve")
    # printed errors use the x1000 convention; stored values stay raw
    click.echo(f"accuracy (x1e3): {report.mean_geodesic_error * 1e3:.3f}")
    click.echo(f"coverage: {report.coverage_ratio * 100:.1f}%")
    click.echo(f"smoothness: {report.dirichlet_energy:.4f}")


@main.command("bounds")
@click.argument("source_mesh", type=click.Path(exists=True))
@click.argument("target_mesh", type=click.Path(exists=True))
@click.argument("map_file", type=click.Path(exists=True))
@click.option("--out", default="bounds.txt", show_default=True)
@_config_options
def cmd_bounds(source_mesh, target_mesh, map_file, out, timing, **cfg):
    """Empirical verification of the approximation bounds for a dense map."""
    config = _build_config(**cfg)
    try:
        shape_N = prepare_shape(source_mesh, config)
        shape_M = prepare_shape(target_mesh, config)
        pi = serial.load_pointwise_map(map_file, shape_M.mesh.n_vertices)
        report = run_bounds(shape_N, shape_M, pi, config)
    except MeshMatchError as exc:
        click.echo(f"error [bounds]: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    serial.save_bound_report(out, report)
    for check in report.checks:
        click.echo(f"{check.name}: lhs={check.lhs:.4e} rhs={check.rhs:.4e} "
                   f"{'OK' if check.satisfied else 'VIOLATED'}")
    if not report.all_satisfied:
        sys.exit(EXIT_BOUND_VIOLATION)


def run_bounds(shape_N, shape_M, pi, config: PipelineConfig,
               n_trials: int = 20):
    """Measure (B_T, epsilon, alpha) and evaluate every verifiable bound."""
    K = min(shape_N.spectrum.K, shape_M.spectrum.K)
    a_N = shape_N.mesh.per_vertex_area
    a_M = shape_M.mesh.per_vertex_area
    trials = bounds_mod.random_band_limited(
        shape_M.spectrum.lifted_vectors[:, :K], n_trials, seed=config.seed)
    report = bounds_mod.BoundReport()
    report.B_T_hat = bounds_mod.estimate_BT(pi, a_N, a_M, trials)
    record_M = getattr(shape_M, "_record", None)
    if record_M is not None:
        report.epsilon_eig = bounds_mod.measure_epsilon_eig(
            shape_M.spectrum, shape_M.samples, record_M, K)
    report.alpha = float(shape_N.basis.self_weights.min())

    # sample-level map implied by the dense map (restriction hypothesis)
    from .fmap import PointwiseMap
    restricted = pi.assignment[shape_N.samples.sample_indices]
    tgt_pos = {int(v): j for j, v in enumerate(shape_M.samples.sample_indices)}
    if all(int(v) in tgt_pos for v in restricted) and record_M is not None:
        pi_bar = PointwiseMap(
            np.array([tgt_pos[int(v)] for v in restricted]), "sample")
        report.checks.append(bounds_mod.check_prop2(
            pi, pi_bar, shape_N.basis, shape_M.spectrum, a_N,
            report.epsilon_eig, report.alpha, report.B_T_hat, K,
            shape_N.samples, shape_M.samples))

    if max(shape_N.mesh.n_vertices, shape_M.mesh.n_vertices) <= EXACT_SOLVE_GUARD:
        lap_N = assemble_laplacian(shape_N.mesh)
        lap_M = assemble_laplacian(shape_M.mesh)
        exact_N = solve_exact(lap_N, K)
        exact_M = solve_exact(lap_M, K)
        gap_N = bounds_mod.sup_norm_gap(exact_N.vectors,
                                        shape_N.spectrum.lifted_vectors[:, :K])
        gap_M = bounds_mod.sup_norm_gap(exact_M.vectors,
                                        shape_M.spectrum.lifted_vectors[:, :K])
        report.epsilon_sup = max(gap_N, gap_M)
        C = exact_fmap(exact_N.vectors, a_N, pi, exact_M.vectors).C
        C_bar = reduced_fmap(shape_N.spectrum.lifted_vectors[:, :K], a_N, pi,
                             shape_M.spectrum.lifted_vectors[:, :K]).C
        report.checks.append(bounds_mod.check_prop1(
            C, C_bar, report.epsilon_sup, report.B_T_hat, K))

    record_N = getattr(shape_N, "_record", None)
    if record_N is not None:
        f = shape_N.mesh.vertices[:, 0]
        gcheck, scheck, _ = bounds_mod.check_interpolation_prop(
            shape_N.basis, shape_N.samples, record_N, f)
        report.checks.extend([gcheck, scheck])

    rng = np.random.default_rng(config.seed)
    betas = rng.standard_normal((shape_N.basis.p, 100))
    lemma_ok = bounds_mod.check_lemma3(shape_N.basis, a_N, betas)
    report.checks.append(bounds_mod.BoundCheck(
        "interpolation_norm_contraction", 0.0 if lemma_ok else 1.0, 0.5))
    return report


if __name__ == "__main__":
    main()
