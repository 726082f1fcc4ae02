"""On-disk formats for cacheable pipeline stages and CLI outputs.

Binary payloads are little-endian float64 throughout; map files are plain
text with one 0-based target index per line.
"""

from __future__ import annotations

import json
import struct

import numpy as np
import scipy.sparse as sp

from .basis import ChiKind, ChiProfile, LocalBasis
from .errors import IndexRangeError, ParseError
from .fmap import PointwiseMap
from .metrics import EvalReport
from .sampling import SampleSet
from .spectral import ReducedSpectrum

_BASIS_MAGIC = b"MMBASIS1"
_SPEC_MAGIC = b"MMSPEC1\x00"


def save_samples(path, samples: SampleSet) -> None:
    with open(path, "w") as fh:
        fh.write(f"# samples p={samples.p} rho0={float(samples.initial_radius)!r}\n")
        for idx, rho in zip(samples.sample_indices, samples.radii):
            fh.write(f"{int(idx)} {float(rho)!r}\n")


def load_samples(path) -> SampleSet:
    with open(path) as fh:
        header = fh.readline().split()
        rho0 = float(header[-1].split("=")[1])
        rows = [line.split() for line in fh if line.strip()]
    idx = np.array([int(r[0]) for r in rows], dtype=np.int64)
    radii = np.array([float(r[1]) for r in rows])
    return SampleSet(idx, radii, rho0)


def save_basis(path, basis: LocalBasis, threshold: float) -> None:
    U = basis.U.tocsc()
    with open(path, "wb") as fh:
        fh.write(_BASIS_MAGIC)
        kind = 0 if basis.profile.kind is ChiKind.POLYNOMIAL else 1
        fh.write(struct.pack("<qqdq", basis.n, basis.p, threshold, kind))
        fh.write(struct.pack("<q", U.nnz))
        coo = U.tocoo()
        fh.write(coo.row.astype("<i8").tobytes())
        fh.write(coo.col.astype("<i8").tobytes())
        fh.write(coo.data.astype("<f8").tobytes())
        fh.write(basis.sample_indices.astype("<i8").tobytes())
        fh.write(basis.radii.astype("<f8").tobytes())
        fh.write(basis.self_weights.astype("<f8").tobytes())


def load_basis(path) -> tuple[LocalBasis, float]:
    with open(path, "rb") as fh:
        if fh.read(8) != _BASIS_MAGIC:
            raise ParseError(f"{path}: not a basis cache file")
        n, p, threshold, kind = struct.unpack("<qqdq", fh.read(32))
        (nnz,) = struct.unpack("<q", fh.read(8))
        rows = np.frombuffer(fh.read(8 * nnz), dtype="<i8")
        cols = np.frombuffer(fh.read(8 * nnz), dtype="<i8")
        data = np.frombuffer(fh.read(8 * nnz), dtype="<f8")
        sample_indices = np.frombuffer(fh.read(8 * p), dtype="<i8")
        radii = np.frombuffer(fh.read(8 * p), dtype="<f8")
        self_weights = np.frombuffer(fh.read(8 * p), dtype="<f8")
        if len(self_weights) != p:
            raise ParseError(f"{path}: truncated basis cache")
    U = sp.csc_matrix((data, (rows, cols)), shape=(n, p))
    profile = ChiProfile(ChiKind.POLYNOMIAL if kind == 0 else ChiKind.SMOOTH_BUMP)
    basis = LocalBasis(U, sample_indices.copy(), radii.copy(),
                       self_weights.copy(), profile)
    return basis, threshold


def save_spectrum(path, spectrum: ReducedSpectrum, n: int) -> None:
    p, K = spectrum.coeff_vectors.shape
    with open(path, "wb") as fh:
        fh.write(_SPEC_MAGIC)
        fh.write(struct.pack("<qqq", n, p, K))
        fh.write(spectrum.eigenvalues.astype("<f8").tobytes())
        fh.write(spectrum.coeff_vectors.astype("<f8").tobytes())
        fh.write(spectrum.A_bar.astype("<f8").tobytes())
        fh.write(spectrum.W_bar.astype("<f8").tobytes())


def load_spectrum(path) -> tuple[ReducedSpectrum, int]:
    with open(path, "rb") as fh:
        if fh.read(8) != _SPEC_MAGIC:
            raise ParseError(f"{path}: not a spectrum cache file")
        n, p, K = struct.unpack("<qqq", fh.read(24))
        vals = np.frombuffer(fh.read(8 * K), dtype="<f8")
        phi = np.frombuffer(fh.read(8 * p * K), dtype="<f8").reshape(p, K)
        A_bar = np.frombuffer(fh.read(8 * p * p), dtype="<f8").reshape(p, p)
        W_bar = np.frombuffer(fh.read(8 * p * p), dtype="<f8").reshape(p, p)
        if W_bar.shape != (p, p):
            raise ParseError(f"{path}: truncated spectrum cache")
    return ReducedSpectrum(A_bar.copy(), W_bar.copy(), vals.copy(), phi.copy()), n


def save_pointwise_map(path, pmap: PointwiseMap) -> None:
    with open(path, "w") as fh:
        for idx in pmap.assignment:
            fh.write(f"{int(idx)}\n")


def load_pointwise_map(path, n_target: int | None = None,
                       level: str = "dense") -> PointwiseMap:
    with open(path) as fh:
        vals = [int(line) for line in fh if line.strip()]
    assignment = np.array(vals, dtype=np.int64)
    if n_target is not None and (
        assignment.min(initial=0) < 0 or assignment.max(initial=-1) >= n_target
    ):
        raise IndexRangeError(f"{path}: map index out of range [0, {n_target})")
    return PointwiseMap(assignment, level)


def save_matrix_text(path, M: np.ndarray) -> None:
    np.savetxt(path, M)


def save_matrix_binary(path, M: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(struct.pack("<qq", *M.shape))
        fh.write(M.astype("<f8").tobytes())


def load_matrix_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        r, c = struct.unpack("<qq", fh.read(16))
        return np.frombuffer(fh.read(8 * r * c), dtype="<f8").reshape(r, c).copy()


def save_eval_report(path, report: EvalReport, curve_path=None,
                     scale_errors: float = 1.0) -> None:
    payload = {
        "mean_geodesic_error": report.mean_geodesic_error * scale_errors,
        "coverage_ratio": report.coverage_ratio,
        "dirichlet_energy": report.dirichlet_energy,
        "distinct_image_count": report.distinct_image_count,
        "n_evaluated": int(len(report.per_vertex_errors)),
    }
    payload.update(report.extra)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    if curve_path is not None:
        with open(curve_path, "w") as fh:
            for t, f in zip(report.curve_thresholds, report.curve_fractions):
                fh.write(f"{float(t)!r} {float(f)!r}\n")


def save_bound_report(path, report) -> None:
    with open(path, "w") as fh:
        fh.write(f"epsilon_eig {float(report.epsilon_eig)!r}\n")
        fh.write(f"epsilon_sup {float(report.epsilon_sup)!r}\n")
        fh.write(f"alpha {float(report.alpha)!r}\n")
        fh.write(f"B_T_hat {float(report.B_T_hat)!r}\n")
        for check in report.checks:
            fh.write(
                f"{check.name} lhs {float(check.lhs)!r} rhs {float(check.rhs)!r} "
                f"satisfied {check.satisfied}\n"
            )
