"""Continuum-limit closed forms, fragment-sum concentration statistics, and a
truncated-Fock brute-force oracle.

The closed forms are asymptotic idealizations of the finite bath with
documented validity windows; the Fock oracle is an exact (up to truncation)
independent evolution in the occupation-number basis, used to cross-check the
coherent-branch formalism at small bath sizes.

Convention note: ``ContinuumParams.Gamma`` defaults to the nominal constant
``4*pi*gamma^2*rho``.  The golden-rule decay rate of the system excitation
number for this exchange coupling is half that, so the closed forms reproduce
the finite-grid numerics when evaluated on ``params.calibrated()`` (Gamma
halved).  Evaluated on the nominal params they keep the nominal peak values
but double the decay constants and linewidths.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .branches import cat_normalization
from .errors import ConfigError, NumericalError
from .model import ModelConfig, build_coupling_matrix

__all__ = [
    "ContinuumParams",
    "alpha_markov",
    "lambda_markov",
    "lambda_markov_settled",
    "asymptotic_density",
    "alpha_nonmarkov",
    "lambda0_nonmarkov",
    "lambda_nonmarkov",
    "asymptotic_density_split",
    "ConcentrationStats",
    "concentration_stats",
    "rectangular_profile",
    "two_rectangle_profile",
    "FockOracle",
]


@dataclass(frozen=True)
class ContinuumParams:
    """Parameters of the continuum-limit solution.

    ``Gamma`` defaults to the nominal ``4*pi*gamma^2*rho_density``; ``Omega``
    is ``sqrt((Gamma/4)^2 - gamma_bar^2)``, purely imaginary whenever
    ``gamma_bar > Gamma/4`` (the oscillatory regime).
    """

    gamma: float
    rho_density: float
    gamma_bar: float
    omega0: float = 1.0
    Gamma: float = 0.0

    def __post_init__(self) -> None:
        if self.Gamma == 0.0:
            object.__setattr__(
                self, "Gamma", 4.0 * math.pi * self.gamma**2 * self.rho_density
            )
        if self.Gamma <= 0:
            raise ConfigError("Gamma must be positive")

    @classmethod
    def from_config(cls, config: ModelConfig) -> "ContinuumParams":
        return cls(
            gamma=config.gamma,
            rho_density=config.mode_density,
            gamma_bar=config.coupling_gamma_bar,
            omega0=config.omega0,
        )

    def calibrated(self) -> "ContinuumParams":
        """Copy with ``Gamma`` halved.

        The exchange coupling's golden-rule excitation decay rate is
        ``2*pi*gamma^2*rho``; closed forms evaluated on this copy match the
        exact finite-grid dynamics.
        """
        return replace(self, Gamma=self.Gamma / 2.0)

    @property
    def Omega(self) -> complex:
        return complex(
            np.lib.scimath.sqrt((self.Gamma / 4.0) ** 2 - self.gamma_bar**2)
        )


def alpha_markov(params: ContinuumParams, alpha0: complex, t) -> np.ndarray | complex:
    """Constant-coupling system amplitude envelope ``alpha0 * exp(-Gamma t / 2)``."""
    return alpha0 * np.exp(-0.5 * params.Gamma * np.asarray(t, dtype=float))


def lambda_markov(params: ContinuumParams, alpha0: complex, omega: float, t):
    """Constant-coupling bath amplitude, transient form.

    Valid asymptotically (``Gamma t >~ 1``); at t=0 it does not vanish, an
    artifact of dropping the charging term.
    """
    d_omega = params.omega0 - omega
    denom = 0.5 * params.Gamma + 1j * d_omega
    exponent = (-0.5 * params.Gamma + 1j * d_omega) * np.asarray(t, dtype=float)
    return 1j * alpha0 * params.gamma * np.exp(exponent) / denom


def lambda_markov_settled(params: ContinuumParams, alpha0: complex, omega: float):
    """Settled (t -> infinity) bath amplitude ``-i alpha0 gamma / (Gamma/2 + i d_omega)``."""
    d_omega = params.omega0 - omega
    return -1j * alpha0 * params.gamma / (0.5 * params.Gamma + 1j * d_omega)


def asymptotic_density(params: ContinuumParams, alpha0: complex, omega):
    """Settled excitation density: Lorentzian of HWHM ``Gamma/2`` at ``omega0``.

    Equals ``|lambda_markov_settled|^2 * rho`` identically; it integrates to
    ``|alpha0|^2`` exactly when ``Gamma`` is the golden-rule rate
    ``2*pi*gamma^2*rho`` (``params.calibrated()``).
    """
    half = 0.5 * params.Gamma
    d_omega = np.asarray(omega, dtype=float) - params.omega0
    scale = params.gamma**2 * params.rho_density
    return abs(alpha0) ** 2 * scale / (half**2 + d_omega**2)


def _omega_terms(params: ContinuumParams, t):
    om = params.Omega
    t = np.asarray(t, dtype=float)
    if om == 0:
        return t, None, None
    return t, np.cosh(om * t), np.sinh(om * t)


def alpha_nonmarkov(params: ContinuumParams, alpha0: complex, t):
    """Resonantly-coupled system amplitude.

    ``alpha0 exp(-Gamma t/4) [cosh(Omega t) - (Gamma/(4 Omega)) sinh(Omega t)]``;
    for imaginary ``Omega`` this is a decaying oscillation at ``|Omega|``.  The
    degenerate ``Omega = 0`` case uses the analytic limit.
    """
    t, co, si = _omega_terms(params, t)
    envelope = np.exp(-0.25 * params.Gamma * t)
    if co is None:
        # continuity limit of the two-pole form as Omega -> 0
        return alpha0 * envelope * (1.0 - 0.25 * params.Gamma * t)
    om = params.Omega
    return alpha0 * envelope * (co - (0.25 * params.Gamma / om) * si)


def lambda0_nonmarkov(params: ContinuumParams, alpha0: complex, t):
    """Resonant-mode amplitude ``-i gamma_bar alpha0 exp(-Gamma t/4) sinh(Omega t)/Omega``."""
    t, _, si = _omega_terms(params, t)
    envelope = np.exp(-0.25 * params.Gamma * t)
    if si is None:
        return -1j * params.gamma_bar * alpha0 * t * envelope
    return -1j * params.gamma_bar * alpha0 * envelope * si / params.Omega


def lambda_nonmarkov(params: ContinuumParams, alpha0: complex, omega: float, t):
    """Off-resonant bath amplitude for the resonantly-coupled case (two-pole form)."""
    om = params.Omega
    if om == 0:
        raise NumericalError("lambda_nonmarkov is undefined at Omega = 0")
    t = np.asarray(t, dtype=float)
    quarter = 0.25 * params.Gamma
    d_omega = params.omega0 - omega
    pole_p = quarter + 1j * d_omega + om
    pole_m = quarter + 1j * d_omega - om
    term_p = (quarter + om) * (1.0 - np.exp(-pole_p * t)) / pole_p
    term_m = (quarter - om) * (1.0 - np.exp(-pole_m * t)) / (-pole_m)
    return (-1j * alpha0 * params.gamma / (2.0 * om)) * (term_p + term_m)


def asymptotic_density_split(params: ContinuumParams, alpha0: complex, omega):
    """Settled excitation density in the oscillatory regime.

    Two Lorentzians of HWHM ``Gamma/4`` centered at ``omega0 +- gamma_bar``;
    valid for ``gamma_bar >> Gamma``, with each peak carrying half of
    ``|alpha0|^2`` on ``params.calibrated()``.
    """
    quarter = 0.25 * params.Gamma
    scale = 0.25 * params.gamma**2 * params.rho_density
    omega = np.asarray(omega, dtype=float)
    out = 0.0
    for sign in (+1.0, -1.0):
        d = omega - (params.omega0 + sign * params.gamma_bar)
        out = out + scale / (quarter**2 + d**2)
    return abs(alpha0) ** 2 * out


# ---------------------------------------------------------------------------
# Fragment-sum concentration


@dataclass(frozen=True)
class ConcentrationStats:
    mean: float
    variance: float
    max_dev: float
    expected: float


def concentration_stats(
    p_profile: np.ndarray, f: float, samples: int, seed: int
) -> ConcentrationStats:
    """Sample statistics of ``X(F) = sum_{k in F} p_k`` over random fragments.

    Fragments have exactly ``f * N`` members (``f * N`` must be integral) and
    are drawn uniformly without replacement.  ``expected`` is ``f * sum(p)``,
    which is the exact mean over all fragments regardless of the profile
    shape.
    """
    profile = np.asarray(p_profile, dtype=float)
    if profile.ndim != 1 or profile.size < 1:
        raise ConfigError("p_profile must be a nonempty 1-D array")
    if np.any(profile < 0):
        raise ConfigError("p_profile must be nonnegative")
    n = profile.size
    size_f = f * n
    size = int(round(size_f))
    if abs(size_f - size) > 1e-9 or size < 1 or size > n:
        raise ConfigError(f"f*N must be an integer in [1, {n}], got {size_f}")
    if samples < 1:
        raise ConfigError("samples must be >= 1")

    rng = np.random.default_rng(np.random.SeedSequence(int(seed) & (2**64 - 1)))
    keys = rng.random((samples, n))
    picks = np.argpartition(keys, size - 1, axis=1)[:, :size]
    x = profile[picks].sum(axis=1)
    total = float(profile.sum())
    expected = total * size / n
    return ConcentrationStats(
        mean=float(x.mean()),
        variance=float(x.var(ddof=1)) if samples > 1 else 0.0,
        max_dev=float(np.max(np.abs(x - expected))),
        expected=expected,
    )


def _block(profile: np.ndarray, center: float, count: int, height: float) -> None:
    start = int(round(center - count / 2.0))
    profile[start : start + count] = height


def rectangular_profile(n: int, width: float, total: float) -> np.ndarray:
    """Rectangle of relative width ``width`` centered mid-grid, height ``total/(n*width)``."""
    if not (0.0 < width < 1.0):
        raise ConfigError("width must lie in (0, 1)")
    count = int(round(n * width))
    profile = np.zeros(n)
    _block(profile, n / 2.0, count, total / count)
    return profile


def two_rectangle_profile(n: int, width: float, total: float) -> np.ndarray:
    """Two rectangles of relative width ``width/2`` centered at n/4 and 3n/4."""
    if not (0.0 < width < 1.0):
        raise ConfigError("width must lie in (0, 1)")
    count = int(round(n * width / 2.0))
    profile = np.zeros(n)
    _block(profile, n / 4.0, count, total / (2 * count))
    _block(profile, 3.0 * n / 4.0, count, total / (2 * count))
    return profile


# ---------------------------------------------------------------------------
# Truncated-Fock oracle


def _coherent_coeffs(alpha: complex, cutoff: int) -> np.ndarray:
    """Number-basis coefficients of |alpha> up to ``cutoff`` quanta."""
    n = np.arange(cutoff + 1)
    log_fact = np.cumsum(np.concatenate(([0.0], np.log(np.arange(1, cutoff + 1)))))
    mag = np.exp(-0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * log_fact) \
        if alpha != 0 else np.where(n == 0, 1.0, 0.0)
    if alpha == 0:
        return mag.astype(complex)
    phase = np.exp(1j * np.angle(alpha) * n)
    return mag * phase


class FockOracle:
    """Exact cat-state evolution on the total-excitation-truncated Fock space.

    The Hamiltonian conserves total excitation number, so the basis is the
    union of fixed-total sectors up to ``cutoff``; each sector is
    diagonalized densely once.  Intended for ``n_env <= 3`` and ``|alpha0| <= 1``
    (the truncation leak grows with ``|alpha0|^2``).  Memory-heavy relative to
    the branch formalism; run one instance at a time.
    """

    def __init__(self, config: ModelConfig, cutoff: int | None = None,
                 norm_tol: float = 1e-8):
        if config.n_env > 3:
            raise ConfigError("FockOracle supports n_env <= 3")
        self.config = config
        matrix = build_coupling_matrix(config)
        self.site_freqs = matrix.diagonal
        self.couplings = matrix.border
        self.n_sites = config.n_env + 1
        if cutoff is None:
            cutoff = self._choose_cutoff(config, target=1e-12)
        self.cutoff = int(cutoff)

        self.basis: list[tuple[int, ...]] = []
        self.index: dict[tuple[int, ...], int] = {}
        self.sectors: list[list[int]] = [[] for _ in range(self.cutoff + 1)]
        for total in range(self.cutoff + 1):
            for occ in _occupations(self.n_sites, total):
                self.index[occ] = len(self.basis)
                self.sectors[total].append(len(self.basis))
                self.basis.append(occ)

        self._eigs = [self._diagonalize_sector(idx) for idx in self.sectors]
        self._psi0 = self._initial_state(norm_tol)
        self._partitions: dict[tuple[int, ...], tuple[int, list]] = {}

    @staticmethod
    def _choose_cutoff(config: ModelConfig, target: float) -> int:
        # Poisson tail of the total-excitation distribution of the cat state
        mean = abs(config.alpha0) ** 2
        scale = (abs(config.branch_a) + abs(config.branch_b)) ** 2
        cutoff, mass, term = 0, 0.0, math.exp(-mean)
        while scale * (1.0 - mass) > target and cutoff < 200:
            mass += term
            cutoff += 1
            term *= mean / cutoff
        return max(cutoff + 2, 4)

    def _diagonalize_sector(self, idx: list[int]):
        dim = len(idx)
        h = np.zeros((dim, dim))
        local = {g: i for i, g in enumerate(idx)}
        for i, g in enumerate(idx):
            occ = self.basis[g]
            h[i, i] = float(np.dot(self.site_freqs, occ))
            for k in range(1, self.n_sites):
                if occ[k] == 0:
                    continue
                hopped = list(occ)
                hopped[0] += 1
                hopped[k] -= 1
                j = local[self.index[tuple(hopped)]]
                h[i, j] = h[j, i] = self.couplings[k - 1] * math.sqrt(
                    (occ[0] + 1) * occ[k]
                )
        try:
            evals, evecs = np.linalg.eigh(h)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"sector eigensolver failed: {exc}") from exc
        return evals, evecs

    def _initial_state(self, norm_tol: float) -> np.ndarray:
        cfg = self.config
        g = cat_normalization(cfg.branch_a, cfg.branch_b, cfg.alpha0)
        plus = _coherent_coeffs(cfg.alpha0, self.cutoff)
        minus = _coherent_coeffs(-cfg.alpha0, self.cutoff)
        psi = np.zeros(len(self.basis), dtype=complex)
        vacuum_env = (0,) * (self.n_sites - 1)
        for n in range(self.cutoff + 1):
            psi[self.index[(n,) + vacuum_env]] = g * (
                cfg.branch_a * plus[n] + cfg.branch_b * minus[n]
            )
        leak = abs(1.0 - float(np.vdot(psi, psi).real))
        if leak > norm_tol:
            raise NumericalError(
                f"Fock cutoff {self.cutoff} leaks {leak:.3e} of the norm "
                f"(> {norm_tol:.1e}); raise the cutoff"
            )
        self.norm_leak = leak
        return psi

    def state_at(self, t: float) -> np.ndarray:
        psi = np.zeros_like(self._psi0)
        for idx, (evals, evecs) in zip(self.sectors, self._eigs):
            if not idx:
                continue
            block = self._psi0[idx]
            psi[idx] = evecs @ (np.exp(-1j * evals * t) * (evecs.conj().T @ block))
        return psi

    def _partition(self, subset: tuple[int, ...]):
        """Group basis indices by complement occupation; cached per subset."""
        if subset in self._partitions:
            return self._partitions[subset]
        rest = tuple(j for j in range(self.n_sites) if j not in subset)
        kept_index: dict[tuple[int, ...], int] = {}
        groups: dict[tuple[int, ...], list[tuple[int, int]]] = {}
        for g, occ in enumerate(self.basis):
            kept = tuple(occ[j] for j in subset)
            if kept not in kept_index:
                kept_index[kept] = len(kept_index)
            groups.setdefault(tuple(occ[j] for j in rest), []).append(
                (kept_index[kept], g)
            )
        packed = [
            (
                np.array([m[0] for m in members], dtype=np.intp),
                np.array([m[1] for m in members], dtype=np.intp),
            )
            for members in groups.values()
        ]
        self._partitions[subset] = (len(kept_index), packed)
        return self._partitions[subset]

    def reduced_density(self, subset, t: float) -> np.ndarray:
        """Reduced density matrix of the sites in ``subset`` at time ``t``."""
        subset = tuple(sorted(subset))
        if any(s < 0 or s >= self.n_sites for s in subset):
            raise ConfigError("subset indices out of range")
        psi = self.state_at(t)
        dim, packed = self._partition(subset)
        rho = np.zeros((dim, dim), dtype=complex)
        for rows, globals_ in packed:
            amps = psi[globals_]
            rho[np.ix_(rows, rows)] += np.outer(amps, amps.conj())
        return rho

    def entropy(self, subset, t: float) -> float:
        """Von Neumann entropy (nats) of the reduced state on ``subset``."""
        subset = tuple(sorted(subset))
        if len(subset) == 0:
            return 0.0
        if len(subset) == self.n_sites:
            # no sites traced out: the state is |psi><psi| by construction
            p = float(np.vdot(self._psi0, self._psi0).real)
            return float(-p * math.log(p)) if 0.0 < p < 1.0 else 0.0
        evals = np.linalg.eigvalsh(self.reduced_density(subset, t))
        evals = np.clip(evals.real, 0.0, None)
        total = evals.sum()
        if total > 0:
            evals = evals / total
        nz = evals[evals > 1e-300]
        return float(-(nz * np.log(nz)).sum())

    def mutual_information(self, fragment, t: float) -> float:
        fragment = tuple(sorted(fragment))
        if 0 in fragment:
            raise ConfigError("fragments are bath subsets; site 0 is the system")
        return (
            self.entropy((0,), t)
            + self.entropy(fragment, t)
            - self.entropy((0,) + fragment, t)
        )

    def amplitude_expectation(self, site: int, t: float) -> complex:
        """Coherent amplitude ``<a_site>`` extracted from the evolved state."""
        psi = self.state_at(t)
        out = 0.0 + 0.0j
        for g, occ in enumerate(self.basis):
            if occ[site] == 0:
                continue
            lowered = list(occ)
            lowered[site] -= 1
            out += np.conj(psi[self.index[tuple(lowered)]]) * math.sqrt(occ[site]) * psi[g]
        return complex(out)

    def subset_entropies(self, t: float) -> dict[tuple[int, ...], float]:
        """Entropies of every nonempty subsystem subset at time ``t``."""
        out = {}
        for r in range(1, self.n_sites + 1):
            for subset in itertools.combinations(range(self.n_sites), r):
                out[subset] = self.entropy(subset, t)
        return out


def _occupations(n_sites: int, total: int):
    """All occupation tuples of ``n_sites`` sites summing to ``total``."""
    if n_sites == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _occupations(n_sites - 1, total - head):
            yield (head,) + tail
