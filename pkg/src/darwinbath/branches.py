"""Two-branch pure-state algebra.

The global state is a superposition ``G (a |A> + b |B>)`` of two product
branches whose per-site factors are coherent states with opposite amplitudes
(or, for qubit fixtures, any pair of states with a prescribed real overlap in
``[0, 1]``).  Every reduced density matrix then has rank at most two and is
fully described by a 2x2 coefficient matrix together with the overlap of the
two branch vectors restricted to the kept sites.  Entropies and mutual
informations follow from the eigenvalues of that pair.

Per-site overlaps are carried in log space: products over hundreds of sites
reach ``exp(-2 |alpha0|^2)`` and below, where direct products underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalError
from .model import ModeAmplitudes

__all__ = [
    "BranchState",
    "Rank2Spec",
    "coherent_overlap",
    "cat_normalization",
    "branch_subset_overlap",
    "reduced_state",
    "entropy",
    "mutual_information",
    "subset_entropy",
]


def coherent_overlap(mu: complex, nu: complex) -> complex:
    """Inner product ``<mu|nu>`` of two coherent states."""
    return np.exp(-0.5 * abs(mu) ** 2 - 0.5 * abs(nu) ** 2 + np.conj(mu) * nu)


def cat_normalization(a: complex, b: complex, alpha0: complex) -> float:
    """Normalization ``G`` of ``a |alpha0> + b |-alpha0>``."""
    if a == 0 and b == 0:
        raise ConfigError("cat coefficients (a, b) must not both vanish")
    overlap = coherent_overlap(-alpha0, alpha0)
    norm_sq = abs(a) ** 2 + abs(b) ** 2 + 2.0 * (a * np.conj(b) * overlap).real
    if norm_sq <= 0:
        raise ConfigError(f"state not normalizable: squared norm {norm_sq}")
    return float(norm_sq**-0.5)


@dataclass(frozen=True)
class BranchState:
    """Global two-branch state at one instant.

    ``per_site_overlap[j]`` is the overlap between the two branches' factors
    at site ``j`` (site 0 is the system, sites 1..N the bath modes); for
    coherent branches it equals ``exp(-2 |amplitude_j|^2)``.  ``log_overlap``
    holds the logs (``-inf`` for orthogonal sites) and is the quantity all
    reductions actually consume.
    """

    coeff_a: complex
    coeff_b: complex
    norm_G: float
    per_site_overlap: np.ndarray
    log_overlap: np.ndarray
    amplitudes: ModeAmplitudes | None = None

    @classmethod
    def from_amplitudes(
        cls, a: complex, b: complex, amplitudes: ModeAmplitudes
    ) -> "BranchState":
        """Coherent-branch state: branch A carries ``(+alpha, +lambda_k)``."""
        site_sq = np.concatenate(
            ([abs(amplitudes.alpha) ** 2], np.abs(amplitudes.lambdas) ** 2)
        )
        log_overlap = -2.0 * site_sq
        return cls(
            coeff_a=complex(a),
            coeff_b=complex(b),
            norm_G=_norm_from_log_overlap(a, b, float(log_overlap.sum())),
            per_site_overlap=np.exp(log_overlap),
            log_overlap=log_overlap,
            amplitudes=amplitudes,
        )

    @classmethod
    def from_overlaps(
        cls, a: complex, b: complex, per_site_overlap: np.ndarray
    ) -> "BranchState":
        """Fixture constructor from explicit per-site overlaps in [0, 1]."""
        overlap = np.asarray(per_site_overlap, dtype=float)
        if np.any(overlap < 0) or np.any(overlap > 1):
            raise ConfigError("per-site overlaps must lie in [0, 1]")
        with np.errstate(divide="ignore"):
            log_overlap = np.log(overlap)
        total = float(log_overlap.sum())
        return cls(
            coeff_a=complex(a),
            coeff_b=complex(b),
            norm_G=_norm_from_log_overlap(a, b, total),
            per_site_overlap=overlap,
            log_overlap=log_overlap,
        )

    @property
    def n_sites(self) -> int:
        return self.per_site_overlap.size

    @property
    def n_env(self) -> int:
        return self.n_sites - 1

    @property
    def total_log_overlap(self) -> float:
        """Log of the global branch overlap (conserved under evolution)."""
        return float(self.log_overlap.sum())

    def subset_log_overlap(self, subset) -> float:
        idx = _as_index_array(subset, self.n_sites)
        return float(self.log_overlap[idx].sum()) if idx.size else 0.0


def _norm_from_log_overlap(a: complex, b: complex, total_log: float) -> float:
    if a == 0 and b == 0:
        raise ConfigError("branch coefficients (a, b) must not both vanish")
    overlap = math.exp(total_log) if total_log > -745.0 else 0.0
    norm_sq = abs(a) ** 2 + abs(b) ** 2 + 2.0 * (a * np.conj(b)).real * overlap
    if norm_sq <= 0:
        raise ConfigError(f"state not normalizable: squared norm {norm_sq}")
    return norm_sq**-0.5


def _as_index_array(subset, n_sites: int) -> np.ndarray:
    idx = np.asarray(sorted(subset), dtype=np.intp)
    if idx.size and (idx[0] < 0 or idx[-1] >= n_sites):
        raise ConfigError(f"subset indices must lie in [0, {n_sites - 1}]")
    if idx.size != np.unique(idx).size:
        raise ConfigError("subset indices must be distinct")
    return idx


def branch_subset_overlap(state: BranchState, subset) -> float:
    """Product of per-site branch overlaps over ``subset`` (log-space)."""
    return math.exp(state.subset_log_overlap(subset))


@dataclass(frozen=True)
class Rank2Spec:
    """Rank-2 reduced density matrix in the (nonorthogonal) branch basis.

    The matrix is ``M = [[weight_pp, cross], [conj(cross), weight_mm]]`` with
    basis Gram matrix ``S = [[1, s], [conj(s), 1]]`` for ``s =
    internal_overlap``; its spectrum is that of ``S^(1/2) M S^(1/2)``.
    """

    weight_pp: float
    weight_mm: float
    cross: complex
    internal_overlap: complex

    def eigenvalues(self) -> tuple[float, float]:
        s = self.internal_overlap
        trace = self.weight_pp + self.weight_mm + 2.0 * (self.cross * np.conj(s)).real
        det = (self.weight_pp * self.weight_mm - abs(self.cross) ** 2) * (
            1.0 - abs(s) ** 2
        )
        disc = 0.25 * trace * trace - det
        root = math.sqrt(disc) if disc > 0 else 0.0
        return (0.5 * trace + root, 0.5 * trace - root)


def reduced_state(state: BranchState, subset) -> Rank2Spec:
    """Reduced density matrix of the sites in ``subset`` as a :class:`Rank2Spec`."""
    idx = _as_index_array(subset, state.n_sites)
    log_inside = float(state.log_overlap[idx].sum()) if idx.size else 0.0
    # complement summed directly: subtraction is ill-defined for orthogonal sites
    keep = np.ones(state.n_sites, dtype=bool)
    keep[idx] = False
    log_outside = float(state.log_overlap[keep].sum())
    g_sq = state.norm_G**2
    outside = math.exp(log_outside) if log_outside > -745.0 else 0.0
    inside = math.exp(log_inside) if log_inside > -745.0 else 0.0
    # overlaps are real here, so conjugating the complement factor is inert
    return Rank2Spec(
        weight_pp=g_sq * abs(state.coeff_a) ** 2,
        weight_mm=g_sq * abs(state.coeff_b) ** 2,
        cross=g_sq * state.coeff_a * np.conj(state.coeff_b) * outside,
        internal_overlap=inside,
    )


_EIGENVALUE_SLACK = 1e-8


def entropy(spec: Rank2Spec) -> float:
    """Von Neumann entropy (nats) of a rank-2 reduced state."""
    lam = spec.eigenvalues()
    for value in lam:
        if value < -_EIGENVALUE_SLACK or value > 1.0 + _EIGENVALUE_SLACK:
            raise NumericalError(
                f"reduced-state eigenvalue {value!r} outside [0, 1] beyond slack"
            )
    out = 0.0
    for value in lam:
        value = min(max(value, 0.0), 1.0)
        if value > 0.0:
            out -= value * math.log(value)
    return out


def mutual_information(state: BranchState, fragment) -> float:
    """``I(S:F) = H(S) + H(F) - H(SF)`` for a bath fragment ``F``.

    ``fragment`` holds bath site indices in ``1..n_env``; the system (site 0)
    is excluded by contract.
    """
    idx = _as_index_array(fragment, state.n_sites)
    if idx.size and idx[0] == 0:
        raise ConfigError("fragments are bath subsets; site 0 is the system")
    h_s = entropy(reduced_state(state, [0]))
    h_f = entropy(reduced_state(state, idx))
    h_sf = entropy(reduced_state(state, np.concatenate(([0], idx))))
    return h_s + h_f - h_sf


def subset_entropy(
    state: BranchState, subset_log_overlap, complement_log_overlap=None
) -> np.ndarray:
    """Entropies of reduced states, vectorized over subset log-overlaps.

    For a normalized two-branch state the reduced spectrum depends on the
    subset only through its branch overlap ``s = exp(subset_log_overlap)``
    and the complement's, so batches of fragments cost one vectorized
    evaluation.  The complement defaults to the conserved total minus the
    subset; pass it explicitly when sites can be exactly orthogonal
    (``-inf`` logs make the subtraction ill-defined).  Matches
    ``entropy(reduced_state(...))`` to float precision.
    """
    log_s = np.asarray(subset_log_overlap, dtype=float)
    if complement_log_overlap is None:
        log_c = state.total_log_overlap - log_s
    else:
        log_c = np.asarray(complement_log_overlap, dtype=float)
    s_sq = np.exp(2.0 * log_s)
    c_sq = np.exp(2.0 * log_c)
    g_sq = state.norm_G**2
    det = (g_sq**2 * abs(state.coeff_a) ** 2 * abs(state.coeff_b) ** 2) * (
        1.0 - c_sq
    ) * (1.0 - s_sq)
    # trace of the reduced 2x2 problem is exactly 1 by normalization
    disc = np.maximum(0.25 - det, 0.0)
    root = np.sqrt(disc)
    lam_hi = np.clip(0.5 + root, 0.0, 1.0)
    lam_lo = np.clip(0.5 - root, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ent = -np.where(lam_hi > 0, lam_hi * np.log(lam_hi), 0.0) - np.where(
            lam_lo > 0, lam_lo * np.log(lam_lo), 0.0
        )
    return ent + 0.0  # normalizes -0.0
