import numpy as np
import pytest

import meshgen
from meshmatch import (adapt_radii, assemble_laplacian, cover_unreached,
                       local_dijkstra, normalize_area, poisson_disk_sample,
                       reduced_spectrum)


@pytest.fixture(scope="session")
def tetra():
    return meshgen.tetrahedron()


@pytest.fixture(scope="session")
def icosphere():
    return meshgen.icosphere(3)


@pytest.fixture(scope="session")
def small_sphere():
    return meshgen.icosphere(2)


@pytest.fixture(scope="session")
def flat_grid():
    return meshgen.grid(33, 33)


@pytest.fixture(scope="session")
def strip_pair():
    """Exactly isometric pair: flat strip and its rolled copy, identity GT."""
    return meshgen.flat_strip(), meshgen.rolled_strip()


def build_shape(mesh, p, seed=0, threshold=0.3, normalize=True, K=None):
    """Full single-shape pipeline; returns a dict of every intermediate."""
    if normalize:
        mesh = normalize_area(mesh)
    samples = poisson_disk_sample(mesh, p, seed)
    record = local_dijkstra(mesh, samples)
    samples, record = cover_unreached(mesh, samples, record)
    basis = adapt_radii(mesh, samples, record, threshold=threshold)
    lap = assemble_laplacian(mesh)
    spec = reduced_spectrum(lap, basis, K or min(50, samples.p))
    return dict(mesh=mesh, samples=samples, record=record, basis=basis,
                laplacian=lap, spectrum=spec)


@pytest.fixture(scope="session")
def sphere_shape(icosphere):
    return build_shape(icosphere, 120, seed=1)


@pytest.fixture(scope="session")
def grid_shape(flat_grid):
    return build_shape(flat_grid, 150, seed=2)


@pytest.fixture(scope="session")
def strip_shapes(strip_pair):
    flat, rolled = strip_pair
    return (build_shape(flat, 150, seed=3, K=60),
            build_shape(rolled, 150, seed=4, K=60))


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
