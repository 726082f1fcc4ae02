"""Synthetic shapes shared by the experiment scripts."""

import numpy as np

from meshmatch.mesh import TriMesh


def grid(nx=33, ny=33, lx=1.0, ly=1.0, x_coords=None) -> TriMesh:
    xs = np.linspace(0, lx, nx) if x_coords is None else np.asarray(x_coords)
    ys = np.linspace(0, ly, ny)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    v = np.column_stack([X.ravel(), Y.ravel(), np.zeros(nx * ny)])
    tris = []
    for i in range(nx - 1):
        for j in range(ny - 1):
            a = i * ny + j
            b = (i + 1) * ny + j
            tris += [(a, b, a + 1), (b, b + 1, a + 1)]
    return TriMesh(v, np.array(tris))


def flat_strip(nx=60, ny=25, lx=2.0, ly=0.8) -> TriMesh:
    return grid(nx, ny, lx, ly)


def rolled_strip(nx=60, ny=25, lx=2.0, ly=0.8, angle=2.5) -> TriMesh:
    flat = grid(nx, ny, lx, ly)
    r = lx / angle
    x, y = flat.vertices[:, 0], flat.vertices[:, 1]
    v = np.column_stack([r * np.sin(x / r), y, r * (1.0 - np.cos(x / r))])
    return TriMesh(v, flat.triangles)


def write_off(path, mesh: TriMesh) -> None:
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{mesh.n_vertices} {mesh.n_triangles} 0\n")
        for v in mesh.vertices:
            fh.write(f"{float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
        for t in mesh.triangles:
            fh.write(f"3 {t[0]} {t[1]} {t[2]}\n")
