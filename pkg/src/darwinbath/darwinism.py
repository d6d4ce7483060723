"""Partial information plots by fragment sampling, and redundancy metrics.

For a two-branch global state the mutual information between the system and a
bath fragment depends on the fragment only through the fragment's branch
overlap, so a batch of sampled fragments reduces to cumulative sums over
random permutations: one permutation yields nested fragments of every size at
the cost of a single pass.  Per-time seeds derive from
``(master_seed, t_index)``, which keeps traces bit-identical regardless of
scheduling or worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .branches import BranchState, subset_entropy
from .errors import ConfigError
from .model import ModelConfig, Propagator, evolve_many

__all__ = [
    "PipCurve",
    "RedundancyTrace",
    "fraction_sizes",
    "sample_fragments",
    "pip_at_time",
    "pip_trace",
    "normalized_pip",
    "f_delta",
    "redundancy_trace",
    "averaged_relative_redundancy",
    "non_monotonicity",
]

_COARSE_GRID_POINTS = 90


def fraction_sizes(n_env: int, mode: str = "coarse") -> np.ndarray:
    """Fragment sizes for the PIP grid.

    ``coarse`` uses up to 90 log-spaced distinct sizes from 1 to ``n_env``
    (always including ``n_env``); ``full`` uses every size.
    """
    if mode == "full" or n_env <= _COARSE_GRID_POINTS:
        return np.arange(1, n_env + 1)
    if mode != "coarse":
        raise ConfigError(f"unknown fraction grid mode {mode!r}")
    raw = np.logspace(0.0, math.log10(n_env), _COARSE_GRID_POINTS)
    sizes = np.unique(np.rint(raw).astype(int))
    if sizes[-1] != n_env:
        sizes = np.append(sizes, n_env)
    return sizes


def sample_fragments(n_env: int, size: int, count: int, seed: int) -> list[np.ndarray]:
    """``count`` uniform random ``size``-subsets of the bath sites ``{1..n_env}``.

    Deterministic for a given ``seed``.  When there are at most ``count``
    distinct subsets, all of them are returned instead (enumeration branch).
    """
    if not (1 <= size <= n_env):
        raise ConfigError(f"fragment size must lie in [1, {n_env}], got {size}")
    if count < 1:
        raise ConfigError("count must be >= 1")
    if math.comb(n_env, size) <= count:
        return [np.array(c, dtype=np.intp) for c in _combinations(n_env, size)]
    rng = np.random.default_rng(np.random.SeedSequence(int(seed) & (2**64 - 1)))
    return [
        np.sort(rng.choice(n_env, size=size, replace=False)) + 1 for _ in range(count)
    ]


def _combinations(n_env: int, size: int):
    import itertools

    return itertools.combinations(range(1, n_env + 1), size)


@dataclass(frozen=True)
class PipCurve:
    """Averaged mutual information versus environment fraction at one time."""

    time: float
    sizes: np.ndarray
    fractions: np.ndarray
    mean_mi: np.ndarray
    stderr_mi: np.ndarray
    h_system: float
    mi_full: float


def _seed_sequence(config: ModelConfig, t_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence((int(config.master_seed) & (2**64 - 1), int(t_index)))


def pip_at_time(
    state: BranchState,
    config: ModelConfig,
    *,
    t_index: int = 0,
    sizes: np.ndarray | None = None,
) -> PipCurve:
    """PIP at one instant by Monte-Carlo fragment averaging.

    One random permutation of the bath per sample yields a nested fragment of
    every size via a cumulative sum of per-site log-overlaps, so all grid
    fractions share ``config.mc_samples`` samples.  Sizes whose subset count
    does not exceed ``mc_samples`` are enumerated exactly (standard error 0);
    the full fraction is always exact.
    """
    n = state.n_env
    if n != config.n_env:
        raise ConfigError(f"state has {n} bath sites, config expects {config.n_env}")
    if sizes is None:
        sizes = fraction_sizes(n)
    sizes = np.asarray(sizes, dtype=int)
    count = config.mc_samples

    log_sys = float(state.log_overlap[0])
    env_log = state.log_overlap[1:]
    log_env_total = float(env_log.sum())
    h_system = float(subset_entropy(state, log_sys, log_env_total))
    mi_full = (
        h_system
        + float(subset_entropy(state, log_env_total, log_sys))
        - float(subset_entropy(state, log_sys + log_env_total, 0.0))
    )

    exact = np.array([math.comb(n, int(m)) <= count for m in sizes])
    mean_mi = np.empty(sizes.size)
    stderr_mi = np.zeros(sizes.size)

    if np.any(~exact):
        rng = np.random.default_rng(_seed_sequence(config, t_index))
        perms = rng.permuted(np.tile(np.arange(n), (count, 1)), axis=1)
        permuted_log = env_log[perms]
        cum = np.cumsum(permuted_log, axis=1)
        # suffix sums give the complement without ill-defined inf arithmetic
        suffix = np.zeros((count, n + 1))
        suffix[:, :-1] = np.cumsum(permuted_log[:, ::-1], axis=1)[:, ::-1]
        cols = sizes[~exact] - 1
        log_f = cum[:, cols]
        log_rest = suffix[:, cols + 1]
        mi = (
            h_system
            + subset_entropy(state, log_f, log_sys + log_rest)
            - subset_entropy(state, log_sys + log_f, log_rest)
        )
        mean_mi[~exact] = mi.mean(axis=0)
        stderr_mi[~exact] = mi.std(axis=0, ddof=1) / math.sqrt(count)

    for pos in np.nonzero(exact)[0]:
        m = int(sizes[pos])
        log_f = []
        log_rest = []
        for combo in _combinations(n, m):
            inside = np.zeros(n, dtype=bool)
            inside[np.array(combo, dtype=np.intp) - 1] = True
            log_f.append(env_log[inside].sum())
            log_rest.append(env_log[~inside].sum())
        log_f = np.array(log_f)
        log_rest = np.array(log_rest)
        mi = (
            h_system
            + subset_entropy(state, log_f, log_sys + log_rest)
            - subset_entropy(state, log_sys + log_f, log_rest)
        )
        mean_mi[pos] = mi.mean()

    time = state.amplitudes.time if state.amplitudes is not None else float("nan")
    return PipCurve(
        time=time,
        sizes=sizes,
        fractions=sizes / n,
        mean_mi=mean_mi,
        stderr_mi=stderr_mi,
        h_system=h_system,
        mi_full=mi_full,
    )


_DEGENERATE_MI = 1e-12
_DEGENERATE_ENTROPY = 1e-9


def normalized_pip(curve: PipCurve) -> np.ndarray | None:
    """PIP rescaled by its full-environment value; ``None`` when degenerate."""
    if curve.mi_full <= _DEGENERATE_MI:
        return None
    full = curve.mean_mi[curve.sizes == curve.sizes.max()][-1]
    if full <= _DEGENERATE_MI:
        return None
    return curve.mean_mi / full

def f_delta(curve: PipCurve, delta: float) -> float | None:
    """Smallest grid fraction whose averaged MI reaches ``(1 - delta) H(S)``.

    ``None`` when the system entropy is negligible (no information to find).
    The threshold comparison is inclusive, so a curve that exactly touches
    the level counts.
    """
    if not (0.0 < delta < 1.0):
        raise ConfigError(f"delta must lie in (0, 1), got {delta}")
    if curve.h_system <= _DEGENERATE_ENTROPY:
        return None
    above = np.nonzero(curve.mean_mi >= (1.0 - delta) * curve.h_system)[0]
    if above.size == 0:
        return None
    return float(curve.fractions[above[0]])


@dataclass(frozen=True)
class RedundancyTrace:
    """Time series of entropy, total MI, and redundancy metrics.

    ``f_delta`` and ``r_delta`` carry NaN where undefined; ``r_rel`` is 0
    there (no information, no redundancy).
    """

    times: np.ndarray
    gamma_times: np.ndarray
    h_system: np.ndarray
    mi_full: np.ndarray
    f_delta: np.ndarray
    r_delta: np.ndarray
    r_rel: np.ndarray


def pip_trace(
    propagator: Propagator,
    config: ModelConfig,
    *,
    sizes: np.ndarray | None = None,
    threads: int | None = None,
) -> list[PipCurve]:
    """PIP at every point of the config's time grid."""
    from .branches import BranchState

    times = config.times
    amplitudes = evolve_many(propagator, config.alpha0, times)

    def one(t_index: int) -> PipCurve:
        from .model import ModeAmplitudes

        row = amplitudes[t_index]
        amps = ModeAmplitudes(
            time=float(times[t_index]), alpha=complex(row[0]), lambdas=row[1:]
        )
        state = BranchState.from_amplitudes(config.branch_a, config.branch_b, amps)
        return pip_at_time(state, config, t_index=t_index, sizes=sizes)

    indices = range(times.size)
    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, indices))
    return [one(i) for i in indices]


def redundancy_trace(
    propagator: Propagator,
    config: ModelConfig,
    *,
    sizes: np.ndarray | None = None,
    threads: int | None = None,
) -> RedundancyTrace:
    """Redundancy metrics over the config's time grid (delta from the config)."""
    curves = pip_trace(propagator, config, sizes=sizes, threads=threads)
    times = config.times
    n_t = times.size
    h_sys = np.array([c.h_system for c in curves])
    mi_full = np.array([c.mi_full for c in curves])
    f_del = np.full(n_t, np.nan)
    for i, curve in enumerate(curves):
        value = f_delta(curve, config.delta)
        if value is not None:
            f_del[i] = value
    with np.errstate(invalid="ignore", divide="ignore"):
        r_del = 1.0 / f_del
    r_rel = np.where(np.isnan(f_del), 0.0, r_del * mi_full)
    return RedundancyTrace(
        times=times,
        gamma_times=times * config.decay_rate,
        h_system=h_sys,
        mi_full=mi_full,
        f_delta=f_del,
        r_delta=r_del,
        r_rel=r_rel,
    )


def averaged_relative_redundancy(
    trace: RedundancyTrace, t_min: float, t_max: float
) -> float:
    """Trapezoidal time average of the relative redundancy over ``[t_min, t_max]``."""
    if t_max <= t_min:
        raise ConfigError("need t_max > t_min")
    times = trace.times
    if t_min < times[0] - 1e-12 or t_max > times[-1] + 1e-12:
        raise ConfigError("averaging window must lie within the trace range")
    mask = (times >= t_min - 1e-12) & (times <= t_max + 1e-12)
    if mask.sum() < 2:
        raise ConfigError("averaging window contains fewer than two grid points")
    return float(
        np.trapezoid(trace.r_rel[mask], times[mask]) / (t_max - t_min)
    )


def non_monotonicity(trace: RedundancyTrace) -> float | None:
    """Accumulated positive variation of ``f_delta`` over the trace.

    Only adjacent grid points where ``f_delta`` is defined on both sides
    contribute; gaps are skipped.  ``None`` with fewer than two defined points.
    """
    f = trace.f_delta
    defined = ~np.isnan(f)
    if defined.sum() < 2:
        return None
    both = defined[:-1] & defined[1:]
    diffs = f[1:][both] - f[:-1][both]
    return float(np.sum(np.maximum(diffs, 0.0)))
