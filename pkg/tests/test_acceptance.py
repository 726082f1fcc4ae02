"""End-to-end acceptance suite.

One test per shipped guarantee; each prints a single pass/fail line via
pytest -v. Fixtures are small meshes, but every assertion exercises the
full pipeline path a user would hit.
"""

import time

import numpy as np
import pytest
from click.testing import CliRunner
from scipy.spatial import cKDTree

import meshgen
from conftest import build_shape
from meshmatch import (PointwiseMap, adapt_radii, assemble_laplacian,
                       build_guided_candidates, check_interpolation_prop,
                       check_lemma3, check_prop1, check_prop2, cover_unreached,
                       dense_conversion, estimate_BT, exact_fmap, fast_ls_fmap,
                       local_dijkstra, measure_epsilon_eig,
                       nearest_sample_baseline, normalize_area,
                       poisson_disk_sample, reduced_fmap, reduced_spectrum,
                       restricted_fmap, scalable_zoomout, smoothness,
                       solve_exact, standard_zoomout, sup_norm_gap)
from meshmatch.basis import ChiProfile, build_unnormalized, normalize_partition
from meshmatch.bounds import random_band_limited
from meshmatch.cli import main
from meshmatch.metrics import GeodesicCache, accuracy
from meshmatch.sampling import SampleSet, initial_radius
from meshmatch.zoomout import ZoomOutSchedule


@pytest.fixture(scope="module")
def all_shapes(sphere_shape, grid_shape, strip_shapes):
    return {
        "sphere": sphere_shape,
        "grid": grid_shape,
        "strip_flat": strip_shapes[0],
        "strip_rolled": strip_shapes[1],
    }


FIXTURE_MESHES = {
    "sphere": lambda: meshgen.icosphere(3),
    "grid": lambda: meshgen.grid(33, 33),
    "strip_flat": meshgen.flat_strip,
    "strip_rolled": meshgen.rolled_strip,
}


# 1. Partition of unity holds at every adaptation round, on every fixture.
def test_partition_of_unity_every_round():
    profile = ChiProfile()
    start = time.perf_counter()
    for name, make in FIXTURE_MESHES.items():
        mesh = normalize_area(make())
        samples = poisson_disk_sample(mesh, 120, seed=1)
        record = local_dijkstra(mesh, samples)
        samples, record = cover_unreached(mesh, samples, record)
        worst = []

        def hook(round_idx, sw):
            u = build_unnormalized(record, samples.radii, profile)
            row_sums = np.asarray(u.sum(axis=1)).ravel()
            U = u.multiply(1.0 / row_sums[:, None])
            worst.append(np.abs(np.asarray(U.sum(axis=1)).ravel() - 1.0).max())

        adapt_radii(mesh, samples, record, round_hook=hook)
        assert len(worst) >= 1, name
        assert max(worst) <= 1e-10, f"{name}: max row-sum deviation {max(worst)}"
    assert time.perf_counter() - start < 5.0


# 2. Both eigenbases are orthonormal in their respective inner products.
def test_orthonormality_k50(all_shapes):
    K = 50
    for name, shape in all_shapes.items():
        spec = shape["spectrum"]
        phi = spec.coeff_vectors[:, :K]
        psi = spec.lifted_vectors[:, :K]
        gram_phi = phi.T @ spec.A_bar @ phi
        a = shape["laplacian"].mass_diagonal
        gram_psi = psi.T @ (a[:, None] * psi)
        eye = np.eye(K)
        assert np.abs(gram_phi - eye).max() <= 1e-8, name
        assert np.abs(gram_psi - eye).max() <= 1e-8, name


# 3. Reduced eigenvalues dominate the exact ones (variational upper bounds).
def test_rayleigh_ritz_domination(sphere_shape, grid_shape):
    for shape in (sphere_shape, grid_shape):
        exact = solve_exact(shape["laplacian"], 20)
        reduced = shape["spectrum"].eigenvalues[:20]
        assert (reduced >= exact.eigenvalues - 1e-8).all()


def _cluster_sizes(vals, gap):
    sizes, count = [], 1
    for a, b in zip(vals, vals[1:]):
        if b - a > gap:
            sizes.append(count)
            count = 1
        else:
            count += 1
    sizes.append(count)
    return sizes


# 4. Analytic spectra: square Neumann values and sphere multiplicities.
def test_analytic_spectra(sphere_shape, grid_shape):
    exact = solve_exact(grid_shape["laplacian"], 8).eigenvalues
    pi2 = np.pi**2
    analytic = np.sort(
        [pi2 * (j * j + k * k) for j in range(4) for k in range(4)]
    )[1:6]
    rel = np.abs(exact[1:6] - analytic) / analytic
    assert rel.max() < 0.05, rel

    for vals in (solve_exact(sphere_shape["laplacian"], 9).eigenvalues,
                 sphere_shape["spectrum"].eigenvalues[:9]):
        assert _cluster_sizes(vals, gap=10.0) == [1, 3, 5]


# 5. Adaptation raises every self-weight past the threshold, monotonically,
#    without any additional shortest-path sweeps.
def test_self_weight_guarantee():
    for name, make in FIXTURE_MESHES.items():
        mesh = normalize_area(make())
        samples = poisson_disk_sample(mesh, 120, seed=1)
        record = local_dijkstra(mesh, samples)
        samples, record = cover_unreached(mesh, samples, record)
        runs_before = record.dijkstra_runs
        history = []
        basis = adapt_radii(mesh, samples, record,
                            round_hook=lambda r, sw: history.append(sw))
        assert record.dijkstra_runs == runs_before, name
        assert basis.self_weights.min() >= 0.3 - 1e-12, name
        for prev, nxt in zip(history, history[1:]):
            assert (nxt >= prev - 1e-12).all(), name


def _clustered_samples(mesh, seed, center_vertex, p_base=15, n_extra=135):
    """Sparse background sampling plus a dense cluster, shared fixed radius."""
    base = poisson_disk_sample(mesh, p_base, seed)
    center = mesh.vertices[center_vertex]
    order = np.argsort(np.linalg.norm(mesh.vertices - center, axis=1))
    taken = set(base.sample_indices)
    extra = [v for v in order[: n_extra * 3] if v not in taken][:n_extra]
    idx = np.unique(np.concatenate([base.sample_indices, extra]))
    return SampleSet(idx, np.full(len(idx), base.initial_radius),
                     base.initial_radius)


# 6. Adaptive radii shrink the gap between the vertex-level and sample-level
#    functional maps by at least 5x on a clustered sampling of the strip pair.
def test_adaptive_radius_estimation_gap(strip_pair):
    profile = ChiProfile()
    flat, rolled = (normalize_area(m) for m in strip_pair)
    n = flat.n_vertices
    grid_idx = np.arange(n).reshape(60, 25)
    K = 20
    deltas = {}
    ss_n = _clustered_samples(flat, 11, grid_idx[10, 5])
    ss_m = _clustered_samples(rolled, 13, grid_idx[45, 18])
    rec_n = local_dijkstra(flat, ss_n)
    ss_n, rec_n = cover_unreached(flat, ss_n, rec_n)
    rec_m = local_dijkstra(rolled, ss_m)
    ss_m, rec_m = cover_unreached(rolled, ss_m, rec_m)
    lap_n, lap_m = assemble_laplacian(flat), assemble_laplacian(rolled)
    for adaptive in (False, True):
        def build(mesh, ss, rec, lap):
            if adaptive:
                b = adapt_radii(mesh, ss.copy(), rec, profile, threshold=0.3)
            else:
                b = normalize_partition(
                    build_unnormalized(rec, ss.radii, profile), ss, profile)
            return b, reduced_spectrum(lap, b, K)

        b_n, sp_n = build(flat, ss_n, rec_n, lap_n)
        b_m, sp_m = build(rolled, ss_m, rec_m, lap_m)
        pi = PointwiseMap(np.arange(n))
        images = rolled.vertices[b_n.sample_indices]
        tree = cKDTree(rolled.vertices[b_m.sample_indices])
        pi_bar = PointwiseMap(tree.query(images)[1].astype(np.int64), "sample")
        C_bar = reduced_fmap(sp_n.lifted_vectors, lap_n.mass_diagonal, pi,
                             sp_m.lifted_vectors).C
        C_hat = restricted_fmap(sp_n.coeff_vectors, sp_n.A_bar, pi_bar,
                                sp_m.coeff_vectors).C
        deltas[adaptive] = np.linalg.norm(C_bar - C_hat)
    assert deltas[True] <= 0.2 * deltas[False], deltas


def _neighbor_shift(mesh):
    g = mesh.edge_graph()
    return np.array([g.indices[g.indptr[i]] for i in range(mesh.n_vertices)])


# 7. Every proved inequality holds with measured constants on every fixture.
def test_bound_satisfaction(all_shapes):
    rng = np.random.default_rng(7)
    for name, shape in all_shapes.items():
        lap, spec = shape["laplacian"], shape["spectrum"]
        a = lap.mass_diagonal
        K = 20

        betas = rng.standard_normal((shape["samples"].p, 50))
        assert check_lemma3(shape["basis"], a, betas), name

        exact = solve_exact(lap, K)
        psi_bar = spec.lifted_vectors[:, :K]
        eps_sup = sup_norm_gap(exact.vectors, psi_bar)
        pi = PointwiseMap(_neighbor_shift(shape["mesh"]))
        trials = random_band_limited(exact.vectors, 20, seed=1)
        bt = estimate_BT(pi, a, a, trials)
        C = exact_fmap(exact.vectors, a, pi, exact.vectors).C
        C_bar = exact_fmap(psi_bar, a, pi, psi_bar).C
        assert check_prop1(C, C_bar, eps_sup, bt, K).satisfied, name

        pi_bar = PointwiseMap(np.arange(shape["samples"].p), "sample")
        pi_c = nearest_sample_baseline(shape["basis"], shape["basis"], pi_bar)
        eps = measure_epsilon_eig(spec, shape["samples"], shape["record"], K)
        alpha = shape["basis"].self_weights.min()
        trials = random_band_limited(psi_bar, 20, seed=2)
        bt = estimate_BT(pi_c, a, a, trials)
        assert check_prop2(pi_c, pi_bar, shape["basis"], spec, a, eps, alpha,
                           bt, K, shape["samples"],
                           shape["samples"]).satisfied, name

        f = random_band_limited(spec.lifted_vectors[:, :10], 1, seed=3).ravel()
        gcheck, scheck, _ = check_interpolation_prop(
            shape["basis"], shape["samples"], shape["record"], f)
        assert gcheck.satisfied and scheck.satisfied, name


# 8. Sample-level refinement plus dense conversion matches the dense-basis
#    refinement on an isometric pair with a 20%-corrupted initial map.
def test_zoomout_parity(strip_pair):
    start = time.perf_counter()
    flat_m, rolled_m = strip_pair
    n = flat_m.n_vertices
    rng = np.random.default_rng(0)
    init = np.arange(n)
    bad = rng.choice(n, int(0.2 * n), replace=False)
    init[bad] = rng.integers(0, n, len(bad))
    gt = PointwiseMap(np.arange(n))
    subset = rng.choice(n, 300, replace=False)
    schedule = ZoomOutSchedule(20, 60, 2)

    lap_f = assemble_laplacian(flat_m)
    lap_r = assemble_laplacian(rolled_m)
    cache = GeodesicCache(rolled_m)
    err_init = accuracy(PointwiseMap(init), gt, rolled_m, subset, cache)[0]

    spec_f = solve_exact(lap_f, 60)
    spec_r = solve_exact(lap_r, 60)
    _, pi_std = standard_zoomout(spec_f, spec_r, lap_r.mass_diagonal,
                                 PointwiseMap(init), schedule)
    err_std = accuracy(pi_std, gt, rolled_m, subset, cache)[0]

    flat = build_shape(flat_m, 1200, seed=3, K=60)
    rolled = build_shape(rolled_m, 1200, seed=4, K=60)
    images = rolled["mesh"].vertices[init[flat["samples"].sample_indices]]
    tree = cKDTree(rolled["mesh"].vertices[rolled["samples"].sample_indices])
    pi_bar0 = PointwiseMap(tree.query(images)[1].astype(np.int64), "sample")
    C_hat, _ = scalable_zoomout(flat["spectrum"], rolled["spectrum"], pi_bar0,
                                schedule)
    dense = dense_conversion(flat["spectrum"].lifted_vectors,
                             rolled["spectrum"].lifted_vectors, C_hat)
    err_sc = accuracy(dense, gt, rolled["mesh"], subset, cache)[0]

    assert err_sc <= 1.15 * err_std, (err_sc, err_std)
    assert err_init >= 2.0 * err_std
    assert err_init >= 2.0 * err_sc
    assert time.perf_counter() - start < 60.0


def _refined_strip_pair(strip_shapes):
    flat, rolled = strip_shapes
    images = rolled["mesh"].vertices[flat["samples"].sample_indices]
    tree = cKDTree(rolled["mesh"].vertices[rolled["samples"].sample_indices])
    pi_bar0 = PointwiseMap(tree.query(images)[1].astype(np.int64), "sample")
    C_hat, pi_bar = scalable_zoomout(flat["spectrum"], rolled["spectrum"],
                                     pi_bar0, ZoomOutSchedule(20, 60, 2))
    return flat, rolled, C_hat, pi_bar


# 9. Dense conversion resolves below the sample scale: more distinct images
#    than samples and a smoother map than the locally constant baseline.
def test_sub_sample_accuracy(strip_shapes):
    flat, rolled, C_hat, pi_bar = _refined_strip_pair(strip_shapes)
    dense = dense_conversion(flat["spectrum"].lifted_vectors,
                             rolled["spectrum"].lifted_vectors, C_hat)
    baseline = nearest_sample_baseline(flat["basis"], rolled["basis"], pi_bar)
    assert len(np.unique(dense.assignment)) > flat["samples"].p
    e_dense = smoothness(dense, flat["laplacian"], rolled["mesh"])
    e_base = smoothness(baseline, flat["laplacian"], rolled["mesh"])
    assert e_dense < e_base


def _timed_self_refinement(mesh, sample_indices, schedule):
    samples = SampleSet(
        sample_indices.astype(np.int64),
        np.full(len(sample_indices), initial_radius(mesh, len(sample_indices))),
        initial_radius(mesh, len(sample_indices)))
    record = local_dijkstra(mesh, samples)
    samples, record = cover_unreached(mesh, samples, record)
    basis = adapt_radii(mesh, samples, record, threshold=0.3)
    spec = reduced_spectrum(assemble_laplacian(mesh), basis, 60)
    stamps = [time.perf_counter()]
    pi_bar = PointwiseMap(np.arange(samples.p), "sample")
    C, pi_bar = scalable_zoomout(
        spec, spec, pi_bar, schedule,
        iteration_hook=lambda k, C, a: stamps.append(time.perf_counter()))
    return basis, spec, C, pi_bar, float(np.median(np.diff(stamps)))


# 10. Refinement cost depends on the sample count, not the vertex count,
#     and guided dense conversion reproduces the brute-force assignment.
def test_scalability_contract():
    coarse = normalize_area(meshgen.grid(59, 25))
    fine = normalize_area(meshgen.grid(117, 49))  # 4x subdivision
    base = poisson_disk_sample(coarse, 1000, seed=5)
    ci, cj = np.divmod(base.sample_indices, 25)
    fine_indices = 2 * ci * 49 + 2 * cj  # same points on the finer mesh
    schedule = ZoomOutSchedule(20, 60, 2)
    *_, t_coarse = _timed_self_refinement(coarse, base.sample_indices, schedule)
    basis, spec, C, pi_bar, t_fine = _timed_self_refinement(
        fine, fine_indices, schedule)
    assert abs(t_fine - t_coarse) / t_coarse < 0.20, (t_coarse, t_fine)

    candidates = build_guided_candidates(basis, basis, pi_bar)
    guided = dense_conversion(spec.lifted_vectors, spec.lifted_vectors, C,
                              guided=candidates)
    brute = dense_conversion(spec.lifted_vectors, spec.lifted_vectors, C)
    assert np.mean(guided.assignment == brute.assignment) >= 0.99


# 11. The unweighted least-squares estimator drifts from the mass-weighted
#     functional map once vertex areas are strongly non-uniform.
def test_unweighted_estimator_nonuniform_divergence():
    uniform = normalize_area(meshgen.icosphere(2))
    skewed = normalize_area(meshgen.skewed_grid(25, 25, ratio=100.0))
    n_sk = skewed.n_vertices
    cases = {
        "uniform": (uniform, _neighbor_shift(uniform)),
        "skewed": (skewed, np.minimum(np.arange(n_sk) + 25, n_sk - 1)),
    }
    gaps = {}
    for name, (mesh, shift) in cases.items():
        lap = assemble_laplacian(mesh)
        spec = solve_exact(lap, 12)
        pi = PointwiseMap(shift)
        C_exact = exact_fmap(spec.vectors, lap.mass_diagonal, pi,
                             spec.vectors).C
        C_ls = fast_ls_fmap(spec.vectors, shift, spec.vectors).C
        gaps[name] = np.linalg.norm(C_ls - C_exact)
    assert gaps["skewed"] > 10 * gaps["uniform"], gaps


# 12. The match command is bit-for-bit reproducible under a fixed seed.
def test_match_determinism(tmp_path):
    meshgen.write_off(tmp_path / "flat.off", meshgen.flat_strip())
    meshgen.write_off(tmp_path / "rolled.off", meshgen.rolled_strip())
    n = meshgen.flat_strip().n_vertices
    np.savetxt(tmp_path / "init.map", np.arange(n), fmt="%d")
    runner = CliRunner()
    for prefix in ("a", "b"):
        result = runner.invoke(main, [
            "match", str(tmp_path / "flat.off"), str(tmp_path / "rolled.off"),
            str(tmp_path / "init.map"),
            "--out-prefix", str(tmp_path / prefix),
            "--samples", "120", "--k-init", "10", "--k-final", "40",
            "--seed", "0"])
        assert result.exit_code == 0, result.output
    for suffix in (".dense.map", ".sample.map", ".fmap.bin", ".fmap.txt"):
        assert (tmp_path / ("a" + suffix)).read_bytes() == \
            (tmp_path / ("b" + suffix)).read_bytes(), suffix
