"""Fragment-side diagnostics: induced-map coefficients, cross term, and the
deviation from an ideal measure-and-prepare channel.

Tracing out the system and the rest of the bath maps the initial cat state
onto a fragment state supported on the two branch products.  The map is an
exact measure-and-prepare channel up to the cross coefficient ``D``; the
deviation is measured on the shared 2x2 branch span, where both the exact and
the idealized outputs live.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .branches import BranchState
from .darwinism import sample_fragments
from .errors import ConfigError

__all__ = ["BphReport", "DistinguishabilityCurve", "bph_report", "distinguishability_curve"]


@dataclass(frozen=True)
class BphReport:
    """Map diagnostics for one fragment at one instant.

    ``p_plus``/``p_minus`` are the branch weights ``G^2 |a|^2`` and
    ``G^2 |b|^2`` (the Born weights of the branch projectors up to the
    exponentially small branch overlap); ``cross_d`` is ``|D(t)|``;
    ``distinguishability`` is ``1 - prod_F <lambda|-lambda>``;
    ``mp_deviation`` is the largest-magnitude eigenvalue of the difference
    between the exact fragment state and the measure-and-prepare output,
    restricted to the branch span.
    """

    time: float
    fragment: tuple[int, ...]
    p_plus: float
    p_minus: float
    cross_d: float
    distinguishability: float
    mp_deviation: float


def _exp(log_value: float) -> float:
    return math.exp(log_value) if log_value > -745.0 else 0.0


def bph_report(state: BranchState, fragment) -> BphReport:
    """Diagnostics of the induced map on ``fragment`` (bath site indices)."""
    idx = np.asarray(sorted(fragment), dtype=np.intp)
    if idx.size and (idx[0] < 1 or idx[-1] > state.n_env):
        raise ConfigError("fragment indices must lie in [1, n_env]")
    if idx.size != np.unique(idx).size:
        raise ConfigError("fragment indices must be distinct")

    a, b = state.coeff_a, state.coeff_b
    g_sq = state.norm_G**2
    log_total = state.total_log_overlap
    log_frag = float(state.log_overlap[idx].sum()) if idx.size else 0.0
    log_sys = float(state.log_overlap[0])
    rest = np.ones(state.n_sites, dtype=bool)
    rest[idx] = False
    rest[0] = False
    log_rest = float(state.log_overlap[rest].sum())

    s_frag = _exp(log_frag)
    cross = g_sq * a * np.conj(b) * _exp(log_sys + log_rest)
    g0 = _exp(log_total)
    w_plus = g_sq * abs(a + b * g0) ** 2
    w_minus = g_sq * abs(a * g0 + b) ** 2

    # exact-minus-ideal coefficient matrix on the branch span
    d00 = g_sq * abs(a) ** 2 - w_plus
    d11 = g_sq * abs(b) ** 2 - w_minus
    trace = d00 + d11 + 2.0 * (cross * s_frag).real
    det = (d00 * d11 - abs(cross) ** 2) * (1.0 - s_frag**2)
    root = math.sqrt(max(0.25 * trace * trace - det, 0.0))
    mp_deviation = max(abs(0.5 * trace + root), abs(0.5 * trace - root))

    time = state.amplitudes.time if state.amplitudes is not None else float("nan")
    return BphReport(
        time=time,
        fragment=tuple(int(j) for j in idx),
        p_plus=g_sq * abs(a) ** 2,
        p_minus=g_sq * abs(b) ** 2,
        cross_d=float(abs(cross)),
        distinguishability=1.0 - s_frag,
        mp_deviation=float(mp_deviation),
    )


@dataclass(frozen=True)
class DistinguishabilityCurve:
    fractions: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray


def distinguishability_curve(
    state: BranchState, fractions, samples: int, seed: int
) -> DistinguishabilityCurve:
    """Mean branch distinguishability per fraction over sampled fragments.

    Meaningful in the settled regime where essentially all excitations sit in
    the bath (caller's responsibility).
    """
    n = state.n_env
    env_log = state.log_overlap[1:]
    fractions = np.asarray(fractions, dtype=float)
    means = np.empty(fractions.size)
    errs = np.zeros(fractions.size)
    for pos, f in enumerate(fractions):
        size = int(round(f * n))
        if not (1 <= size <= n):
            raise ConfigError(f"fraction {f} maps to invalid fragment size {size}")
        frags = sample_fragments(n, size, samples, _fragment_seed(seed, size))
        log_f = np.array([env_log[frag - 1].sum() for frag in frags])
        vals = 1.0 - np.exp(log_f)
        means[pos] = vals.mean()
        if len(frags) > 1 and math.comb(n, size) > samples:
            errs[pos] = vals.std(ddof=1) / math.sqrt(len(frags))
    return DistinguishabilityCurve(fractions=fractions, mean=means, stderr=errs)


def _fragment_seed(seed: int, size: int) -> int:
    mixed = np.random.SeedSequence((int(seed) & (2**64 - 1), int(size)))
    return int(mixed.generate_state(1, np.uint64)[0])
