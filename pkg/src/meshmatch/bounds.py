"""Empirical verification of the approximation bounds.

The inequalities themselves are proven; this module measures the quantities
they depend on (Lipschitz pull-back constant, eigenvector moduli of
continuity, minimum self-weight) and checks that the implementation's
numbers satisfy them. A violation indicates an implementation bug, not a
math problem.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import LocalBasis
from .errors import HypothesisError
from .fmap import PointwiseMap
from .sampling import GeodesicRecord, SampleSet
from .spectral import ReducedSpectrum

BT_SAFETY = 1.1


@dataclass
class BoundCheck:
    name: str
    lhs: float
    rhs: float

    @property
    def satisfied(self) -> bool:
        return self.lhs <= self.rhs

    @property
    def slack_ratio(self) -> float:
        return self.rhs / self.lhs if self.lhs > 0 else float("inf")


@dataclass
class BoundReport:
    epsilon_eig: float = float("nan")
    epsilon_sup: float = float("nan")
    alpha: float = float("nan")
    B_T_hat: float = float("nan")
    checks: list = field(default_factory=list)

    @property
    def all_satisfied(self) -> bool:
        return all(c.satisfied for c in self.checks)


def random_band_limited(psi: np.ndarray, r: int, seed: int = 0) -> np.ndarray:
    """r random unit-coefficient combinations of the given basis columns."""
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal((psi.shape[1], r))
    coeffs /= np.linalg.norm(coeffs, axis=0)
    return psi @ coeffs


def estimate_BT(pi: PointwiseMap, a_N: np.ndarray, a_M: np.ndarray,
                trial_functions: np.ndarray) -> float:
    """Empirical Lipschitz estimate of the pull-back: max-ratio over trials,
    inflated by a safety factor (it is only a lower estimate of the sup)."""
    pulled = trial_functions[pi.assignment]  # (n_N, r)
    num = np.sqrt(np.einsum("i,ir->r", a_N, pulled**2))
    den = np.sqrt(np.einsum("i,ir->r", a_M, trial_functions**2))
    return float(np.max(num / den) * BT_SAFETY)


def measure_epsilon_eig(spectrum: ReducedSpectrum, samples: SampleSet,
                        record: GeodesicRecord, K: int) -> float:
    """Max variation of lifted eigenvectors and coefficient vectors over
    sample pairs within the current ball radii."""
    psi = spectrum.lifted_vectors[:, :K]
    phi = spectrum.coeff_vectors[:, :K]
    pos = {int(v): k for k, v in enumerate(samples.sample_indices)}
    eps = 0.0
    for j in range(samples.p):
        verts, _ = record.truncated(j, samples.radii[j])
        vj = samples.sample_indices[j]
        for v in verts:
            i = pos.get(int(v))
            if i is None or i == j:
                continue
            eps = max(eps, float(np.abs(psi[v] - psi[vj]).max()))
            eps = max(eps, float(np.abs(phi[i] - phi[j]).max()))
    return eps


def sup_norm_gap(psi_exact: np.ndarray, psi_approx: np.ndarray) -> float:
    """max_j ||psi_j - psi_bar_j||_inf with per-column sign alignment."""
    signs = np.sign(np.einsum("ij,ij->j", psi_exact, psi_approx))
    signs[signs == 0] = 1.0
    return float(np.abs(psi_exact - psi_approx * signs).max())


def check_prop1(C: np.ndarray, C_bar: np.ndarray, epsilon_sup: float,
                B_T_hat: float, K: int) -> BoundCheck:
    lhs = float(np.linalg.norm(C - C_bar) ** 2) / K
    rhs = epsilon_sup**2 * (1.0 + B_T_hat**2)
    return BoundCheck("exact_vs_reduced_fmap", lhs, rhs)


def check_prop2(pi: PointwiseMap, pi_bar: PointwiseMap, basis_N: LocalBasis,
                spectrum_M: ReducedSpectrum, a_N: np.ndarray,
                epsilon_eig: float, alpha: float, B_T_hat: float,
                K: int, samples_N: SampleSet,
                samples_M: SampleSet) -> BoundCheck:
    """Estimation-error bound for replacing the dense transfer by the
    sample-level one."""
    restricted = pi.assignment[samples_N.sample_indices]
    implied = samples_M.sample_indices[pi_bar.assignment]
    if not np.array_equal(restricted, implied):
        raise HypothesisError(
            "dense map restricted to samples disagrees with the sample-level map"
        )
    psi_M = spectrum_M.lifted_vectors[:, :K]
    phi_M = spectrum_M.coeff_vectors[:, :K]
    dense_side = psi_M[pi.assignment]                      # Pi Psi_bar^M
    sample_side = basis_N.U @ phi_M[pi_bar.assignment]     # U^N Pi_bar Phi_bar^M
    diff = dense_side - sample_side
    lhs = float(np.einsum("i,ik->", a_N, diff**2)) / K
    rhs = epsilon_eig**2 * (1.0 - alpha) + epsilon_eig**2 * B_T_hat**2
    return BoundCheck("restricted_transfer", lhs, rhs)


def measure_modulus(f: np.ndarray, samples: SampleSet,
                    record: GeodesicRecord) -> float:
    """Max |f(x) - f(v_j)| over vertices x inside sample j's ball."""
    eps = 0.0
    for j in range(samples.p):
        verts, _ = record.truncated(j, samples.radii[j])
        if len(verts):
            fj = f[samples.sample_indices[j]]
            eps = max(eps, float(np.abs(f[verts] - fj).max()))
    return eps


def check_interpolation_prop(basis: LocalBasis, samples: SampleSet,
                             record: GeodesicRecord, f: np.ndarray):
    """Interpolation-operator error bounds for a scalar test function.

    Returns (global check, per-sample check) where the per-sample bound is
    eps * (1 - self_weight)."""
    eps = measure_modulus(f, samples, record)
    f_tilde = basis.interpolate(f[basis.sample_indices])
    global_err = float(np.abs(f_tilde - f).max())
    at_samples = np.abs(f_tilde[basis.sample_indices] - f[basis.sample_indices])
    sample_bounds = eps * (1.0 - basis.self_weights)
    tol = 1e-10 * max(1.0, eps)
    global_check = BoundCheck("interpolation_global", global_err, eps + tol)
    sample_check = BoundCheck(
        "interpolation_at_samples",
        float((at_samples - sample_bounds).max()), tol,
    )
    return global_check, sample_check, at_samples


def check_lemma3(basis: LocalBasis, a_N: np.ndarray,
                 betas: np.ndarray) -> bool:
    """||U beta||_A <= ||beta||_2 for every trial column (unit total area)."""
    lifted = basis.U @ betas
    lhs = np.einsum("i,ir->r", a_N, lifted**2)
    rhs = np.einsum("ir,ir->r", betas, betas)
    return bool(np.all(lhs <= rhs * (1.0 + 1e-12) + 1e-12))
