"""Functional map constructions.

Orientation convention (the classic trap): the matrix maps functions from M
to N, while pointwise maps run N -> M. A pointwise map is stored as an
integer assignment array, never as a dense binary matrix; applying it is a
row gather.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from .errors import RankDeficientError

log = logging.getLogger(__name__)


class MapKind(enum.Enum):
    EXACT = "exact"
    REDUCED = "reduced"
    RESTRICTED = "restricted"
    FAST_LS = "fast_ls"
    RESTRICTED_REWEIGHTED = "restricted_reweighted"


@dataclass
class FunctionalMap:
    C: np.ndarray  # (K_N, K_M): functions on M -> functions on N
    kind: MapKind


@dataclass
class PointwiseMap:
    """Total assignment of source entries to target indices (N -> M)."""

    assignment: np.ndarray  # (q,) int64
    level: str = "dense"    # "dense" (vertices) or "sample"

    def __len__(self) -> int:
        return len(self.assignment)


def exact_fmap(psi_N: np.ndarray, a_N: np.ndarray, pi: PointwiseMap,
               psi_M: np.ndarray) -> FunctionalMap:
    """C = Psi_N^T A_N gather(Psi_M) for A-orthonormal dense bases."""
    gathered = psi_M[pi.assignment]
    C = psi_N.T @ (a_N[:, None] * gathered)
    return FunctionalMap(C, MapKind.EXACT)


def reduced_fmap(psi_bar_N: np.ndarray, a_N: np.ndarray, pi: PointwiseMap,
                 psi_bar_M: np.ndarray) -> FunctionalMap:
    """Same formula with lifted approximate bases."""
    gathered = psi_bar_M[pi.assignment]
    C = psi_bar_N.T @ (a_N[:, None] * gathered)
    return FunctionalMap(C, MapKind.REDUCED)


def restricted_fmap(phi_bar_N: np.ndarray, A_bar_N: np.ndarray,
                    pi_bar: PointwiseMap, phi_bar_M: np.ndarray) -> FunctionalMap:
    """Sample-level map: all operands are p- or K-sized."""
    gathered = phi_bar_M[pi_bar.assignment]
    C = phi_bar_N.T @ (A_bar_N @ gathered)
    return FunctionalMap(C, MapKind.RESTRICTED)


def restricted_fmap_reweighted(phi_bar_N: np.ndarray, A_bar_N: np.ndarray,
                               pi_bar: PointwiseMap,
                               psi_bar_M_at_samples: np.ndarray) -> FunctionalMap:
    """Variant transporting pointwise values instead of coefficients."""
    gathered = psi_bar_M_at_samples[pi_bar.assignment]
    C = phi_bar_N.T @ (A_bar_N @ gathered)
    return FunctionalMap(C, MapKind.RESTRICTED_REWEIGHTED)


def fast_ls_fmap(psi_N_rows: np.ndarray, pi_rows: np.ndarray,
                 psi_M_rows: np.ndarray) -> FunctionalMap:
    """Unweighted least-squares estimator over selected rows.

    Solves argmin_X || G X - H || with G the selected source-basis rows and
    H the target-basis rows gathered by the map; normal equations carry a
    1e-10 * trace Tikhonov guard that is only engaged (and logged) when the
    system is ill-conditioned.
    """
    G = psi_N_rows
    H = psi_M_rows[pi_rows]
    s = np.linalg.svd(G, compute_uv=False)
    if s[-1] <= 1e-12 * s[0]:
        raise RankDeficientError(
            f"selected rows are rank deficient (sigma ratio {s[-1]/s[0]:.2e})"
        )
    GtG = G.T @ G
    if s[-1] < 1e-6 * s[0]:
        guard = 1e-10 * np.trace(GtG) / GtG.shape[0]
        log.warning("fast_ls_fmap: Tikhonov guard %g active", guard)
        GtG = GtG + guard * np.eye(GtG.shape[0])
    C = np.linalg.solve(GtG, G.T @ H)
    return FunctionalMap(C, MapKind.FAST_LS)
