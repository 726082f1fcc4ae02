import json

import numpy as np
import pytest
from click.testing import CliRunner

import meshgen
from meshmatch.cli import (EXIT_BOUND_VIOLATION, EXIT_VALIDATION, main,
                           run_bounds)


COMMON = ["--samples", "120", "--k-init", "10", "--k-final", "40",
          "--seed", "0"]


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """Mesh pair on disk plus an identity init map."""
    d = tmp_path_factory.mktemp("cli")
    flat, rolled = meshgen.flat_strip(), meshgen.rolled_strip()
    meshgen.write_off(d / "flat.off", flat)
    meshgen.write_off(d / "rolled.off", rolled)
    n = flat.n_vertices
    np.savetxt(d / "identity.map", np.arange(n), fmt="%d")
    bad = np.arange(n)
    bad[0] = n + 7
    np.savetxt(d / "bad.map", bad, fmt="%d")
    return d


@pytest.fixture()
def runner():
    return CliRunner()


def test_basis_requires_cache_dir(runner, workdir):
    res = runner.invoke(main, ["basis", str(workdir / "flat.off")] + COMMON)
    assert res.exit_code != 0


def test_basis_build_then_cached(runner, workdir, tmp_path):
    args = ["basis", str(workdir / "flat.off"),
            "--cache-dir", str(tmp_path)] + COMMON
    res = runner.invoke(main, args)
    assert res.exit_code == 0, res.output
    assert "built basis" in res.output
    res2 = runner.invoke(main, args)
    assert res2.exit_code == 0
    assert "cached" in res2.output


def test_basis_corrupt_cache_recomputes(runner, workdir, tmp_path):
    args = ["basis", str(workdir / "flat.off"),
            "--cache-dir", str(tmp_path)] + COMMON
    assert runner.invoke(main, args).exit_code == 0
    for f in tmp_path.iterdir():
        if f.suffix == ".bin" and "basis" in f.name:
            f.write_bytes(b"garbage")
    res = runner.invoke(main, args)
    assert res.exit_code == 0
    assert "built basis" in res.output  # recomputed, not loaded


def test_basis_bad_mesh_exit_code(runner, tmp_path):
    bad = tmp_path / "bad.off"
    bad.write_text("OFF\nnot a mesh\n")
    res = runner.invoke(main, ["basis", str(bad),
                               "--cache-dir", str(tmp_path)] + COMMON)
    assert res.exit_code == EXIT_VALIDATION


def run_match(runner, workdir, out_prefix, extra=()):
    return runner.invoke(main, [
        "match", str(workdir / "flat.off"), str(workdir / "rolled.off"),
        str(workdir / "identity.map"), "--out-prefix", str(out_prefix),
        *extra] + COMMON)


def test_match_writes_outputs(runner, workdir, tmp_path):
    prefix = tmp_path / "m"
    res = run_match(runner, workdir, prefix, extra=["--timing"])
    assert res.exit_code == 0, res.output
    for suffix in (".dense.map", ".sample.map", ".samples_src.txt",
                   ".samples_tgt.txt", ".fmap.txt", ".fmap.bin"):
        assert (tmp_path / ("m" + suffix)).exists()
    assert "Preprocess" in res.output and "Total" in res.output
    dense = np.loadtxt(prefix.with_suffix(".dense.map"))
    n = meshgen.flat_strip().n_vertices
    assert len(np.loadtxt(f"{prefix}.dense.map", dtype=np.int64)) == n


def test_match_deterministic(runner, workdir, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_match(runner, workdir, a).exit_code == 0
    assert run_match(runner, workdir, b).exit_code == 0
    for suffix in (".dense.map", ".sample.map", ".fmap.bin"):
        assert (tmp_path / ("a" + suffix)).read_bytes() == \
            (tmp_path / ("b" + suffix)).read_bytes()


def test_match_guided_matches_full(runner, workdir, tmp_path):
    full, guided = tmp_path / "full", tmp_path / "guided"
    assert run_match(runner, workdir, full, ["--guided", "off"]).exit_code == 0
    assert run_match(runner, workdir, guided, ["--guided", "on"]).exit_code == 0
    a = np.loadtxt(f"{full}.dense.map", dtype=np.int64)
    b = np.loadtxt(f"{guided}.dense.map", dtype=np.int64)
    assert np.mean(a == b) >= 0.99


def test_match_bad_init_map(runner, workdir, tmp_path):
    res = runner.invoke(main, [
        "match", str(workdir / "flat.off"), str(workdir / "rolled.off"),
        str(workdir / "bad.map"), "--out-prefix", str(tmp_path / "x")] + COMMON)
    assert res.exit_code == EXIT_VALIDATION


def test_eval_identity_map(runner, workdir, tmp_path):
    out = tmp_path / "eval.json"
    res = runner.invoke(main, [
        "eval", str(workdir / "identity.map"), str(workdir / "identity.map"),
        str(workdir / "flat.off"), str(workdir / "rolled.off"),
        "--out", str(out)] + COMMON)
    assert res.exit_code == 0, res.output
    assert "accuracy (x1e3): 0.000" in res.output
    payload = json.loads(out.read_text())
    assert payload["mean_geodesic_error"] == 0.0
    assert payload["coverage_ratio"] == pytest.approx(1.0)
    assert (tmp_path / "eval.json.curve").exists()


def test_eval_computed_map_beats_nothing(runner, workdir, tmp_path):
    prefix = tmp_path / "m"
    assert run_match(runner, workdir, prefix).exit_code == 0
    out = tmp_path / "eval.json"
    res = runner.invoke(main, [
        "eval", f"{prefix}.dense.map", str(workdir / "identity.map"),
        str(workdir / "flat.off"), str(workdir / "rolled.off"),
        "--out", str(out)] + COMMON)
    assert res.exit_code == 0, res.output
    payload = json.loads(out.read_text())
    assert payload["mean_geodesic_error"] < 0.2  # area-normalized units


def test_bounds_all_satisfied(runner, workdir, tmp_path):
    out = tmp_path / "bounds.txt"
    res = runner.invoke(main, [
        "bounds", str(workdir / "flat.off"), str(workdir / "rolled.off"),
        str(workdir / "identity.map"), "--out", str(out)] + COMMON)
    assert res.exit_code == 0, res.output
    text = out.read_text()
    assert "satisfied True" in text
    assert "satisfied False" not in text
    assert "VIOLATED" not in res.output


def test_exit_code_constants():
    assert EXIT_VALIDATION == 2
    assert EXIT_BOUND_VIOLATION == 3
