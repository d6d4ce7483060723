"""Oscillator-bath model: coupling matrix, spectral propagator, coherent amplitudes.

A single harmonic oscillator (frequency ``omega0``) is linearly coupled to
``n_env`` bath oscillators with frequencies on a uniform grid.  With a
rotating-wave exchange coupling the coherent-state amplitudes
``v = (alpha, lambda_1, ..., lambda_N)`` obey ``i dv/dt = M v`` where ``M`` is
the real symmetric arrowhead matrix built here.  One eigendecomposition of
``M`` therefore evolves the state exactly to any time.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalError

__all__ = [
    "ModelConfig",
    "CouplingMatrix",
    "Propagator",
    "ModeAmplitudes",
    "ExcitationProfile",
    "build_coupling_matrix",
    "diagonalize",
    "evolve",
    "evolve_many",
    "excitation_profile",
]


@dataclass(frozen=True)
class ModelConfig:
    """All physical and numerical parameters of one simulation run.

    ``gamma_bar`` is the coupling of the single bath oscillator whose grid
    frequency lies nearest to ``omega0``; ``None`` means uniform coupling.
    The default time grid has ``n_times`` uniform points covering
    ``decay_rate * t`` in ``[0, t_max_gamma]``.
    """

    n_env: int = 900
    omega0: float = 1.0
    omega_min: float = 0.1
    omega_max: float = 1.9
    gamma: float = 0.1 / 30
    gamma_bar: float | None = None
    alpha0: complex = 3.0 + 0.0j
    branch_a: complex = 1.0 + 0.0j
    branch_b: complex = 1.0 + 0.0j
    delta: float = 0.05
    t_max_gamma: float = 10.0
    n_times: int = 600
    time_grid: tuple[float, ...] | None = None
    mc_samples: int = 100
    master_seed: int = 1729

    def __post_init__(self) -> None:
        if self.n_env < 1:
            raise ConfigError(f"n_env must be >= 1, got {self.n_env}")
        if not (self.omega_min < self.omega0 < self.omega_max):
            raise ConfigError(
                f"need omega_min < omega0 < omega_max, got "
                f"{self.omega_min}, {self.omega0}, {self.omega_max}"
            )
        if self.gamma <= 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma}")
        if self.gamma_bar is not None and self.gamma_bar <= 0:
            raise ConfigError(f"gamma_bar must be positive, got {self.gamma_bar}")
        if not (0.0 < self.delta < 1.0):
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if self.mc_samples < 1:
            raise ConfigError(f"mc_samples must be >= 1, got {self.mc_samples}")
        if self.n_times < 2:
            raise ConfigError(f"n_times must be >= 2, got {self.n_times}")
        if self.t_max_gamma <= 0:
            raise ConfigError(f"t_max_gamma must be positive, got {self.t_max_gamma}")
        if not (-(2**63) <= int(self.master_seed) < 2**64):
            raise ConfigError("master_seed must fit in 64 bits")
        if self.time_grid is not None:
            grid = np.asarray(self.time_grid, dtype=float)
            if grid.ndim != 1 or grid.size < 2:
                raise ConfigError("time_grid must hold at least two times")
            if grid[0] != 0.0:
                raise ConfigError("time_grid must start at 0")
            if not np.all(np.diff(grid) > 0):
                raise ConfigError("time_grid must be strictly increasing")
        if self.n_env > 1 and self.times[-1] > 0.5 * self.recurrence_time:
            warnings.warn(
                f"time grid reaches {self.times[-1]:.1f}, beyond half the bath "
                f"recurrence time {self.recurrence_time:.1f}; the finite bath "
                f"departs from the continuum limit there",
                stacklevel=2,
            )

    @property
    def coupling_gamma_bar(self) -> float:
        return self.gamma if self.gamma_bar is None else self.gamma_bar

    @property
    def mode_density(self) -> float:
        """Bath oscillators per unit frequency, N / (omega_max - omega_min)."""
        return self.n_env / (self.omega_max - self.omega_min)

    @property
    def decay_rate(self) -> float:
        """Golden-rule decay rate of the system excitation number.

        This is 2*pi*gamma^2*rho, the rate at which ``|alpha(t)|^2`` falls in
        the uniform-coupling case; it fixes the dimensionless time axis
        ``decay_rate * t`` used throughout.  The companion closed forms in
        :mod:`darwinbath.analytic` carry a nominal constant equal to twice
        this rate (see ``ContinuumParams``).
        """
        return 2.0 * np.pi * self.gamma**2 * self.mode_density

    @property
    def recurrence_time(self) -> float:
        """Finite-bath recurrence scale: 2*pi over the frequency spacing."""
        if self.n_env < 2:
            return math.inf
        spacing = (self.omega_max - self.omega_min) / (self.n_env - 1)
        return 2.0 * math.pi / spacing

    @property
    def times(self) -> np.ndarray:
        if self.time_grid is not None:
            return np.asarray(self.time_grid, dtype=float)
        return np.linspace(0.0, self.t_max_gamma / self.decay_rate, self.n_times)

    def environment_frequencies(self) -> np.ndarray:
        return np.linspace(self.omega_min, self.omega_max, self.n_env)


@dataclass(frozen=True)
class CouplingMatrix:
    """Symmetric arrowhead matrix of the one-excitation sector.

    ``diagonal`` holds ``(omega0, omega_1, ..., omega_N)``; ``border`` holds
    the couplings ``(gamma_1, ..., gamma_N)`` along the first row/column.
    """

    diagonal: np.ndarray
    border: np.ndarray

    def __post_init__(self) -> None:
        diag = np.asarray(self.diagonal, dtype=float)
        bord = np.asarray(self.border, dtype=float)
        if diag.ndim != 1 or bord.ndim != 1 or diag.size != bord.size + 1:
            raise ConfigError("need len(diagonal) == len(border) + 1")
        object.__setattr__(self, "diagonal", diag)
        object.__setattr__(self, "border", bord)

    @property
    def dimension(self) -> int:
        return self.diagonal.size

    def dense(self) -> np.ndarray:
        n = self.dimension
        m = np.zeros((n, n))
        m[np.arange(n), np.arange(n)] = self.diagonal
        m[0, 1:] = self.border
        m[1:, 0] = self.border
        return m

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(self.diagonal.tobytes())
        h.update(self.border.tobytes())
        return h.hexdigest()


def build_coupling_matrix(config: ModelConfig) -> CouplingMatrix:
    """Build the arrowhead matrix for ``config``.

    All bath modes couple with ``gamma`` except the one whose grid frequency
    is nearest to ``omega0`` (ties broken toward the lower index), which
    couples with ``gamma_bar``.
    """
    omegas = config.environment_frequencies()
    border = np.full(config.n_env, config.gamma)
    resonant = int(np.argmin(np.abs(omegas - config.omega0)))
    border[resonant] = config.coupling_gamma_bar
    diagonal = np.concatenate(([config.omega0], omegas))
    return CouplingMatrix(diagonal=diagonal, border=border)


@dataclass(frozen=True)
class Propagator:
    """Spectral decomposition of a coupling matrix; evolves amplitudes exactly."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    source_hash: str = ""

    @property
    def dimension(self) -> int:
        return self.eigenvalues.size

    def evolution_weights(self, t: float | np.ndarray) -> np.ndarray:
        """Phase factors ``exp(-i * eigenvalues * t)`` (vectorized over t)."""
        t = np.asarray(t, dtype=float)
        return np.exp(-1j * np.multiply.outer(t, self.eigenvalues))


_RECONSTRUCTION_TOL = 1e-10
_ORTHOGONALITY_TOL = 1e-10


def diagonalize(matrix: CouplingMatrix) -> Propagator:
    """Eigendecompose the (symmetric) coupling matrix.

    Raises :class:`NumericalError` if the eigensolver fails to converge or the
    spectral factors do not reproduce the matrix to 1e-10 (max-abs entry).
    """
    dense = matrix.dense()
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(dense)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed to converge: {exc}") from exc

    gram_err = np.max(np.abs(eigenvectors.T @ eigenvectors - np.eye(matrix.dimension)))
    if gram_err > _ORTHOGONALITY_TOL:
        raise NumericalError(f"eigenvector orthogonality error {gram_err:.3e} > 1e-10")
    recon = (eigenvectors * eigenvalues) @ eigenvectors.T
    recon_err = np.max(np.abs(recon - dense))
    if recon_err > _RECONSTRUCTION_TOL:
        raise NumericalError(f"spectral reconstruction error {recon_err:.3e} > 1e-10")

    return Propagator(
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
        source_hash=matrix.content_hash(),
    )


@dataclass(frozen=True)
class ModeAmplitudes:
    """Coherent amplitudes ``alpha(t)`` and ``lambda_k(t)`` at one time."""

    time: float
    alpha: complex
    lambdas: np.ndarray

    def total_excitation(self) -> float:
        return float(abs(self.alpha) ** 2 + np.sum(np.abs(self.lambdas) ** 2))


@dataclass(frozen=True)
class ExcitationProfile:
    system: float
    env_total: float
    per_mode: np.ndarray


def evolve(propagator: Propagator, alpha0: complex, t: float) -> ModeAmplitudes:
    """Amplitudes at time ``t`` from the initial vector ``(alpha0, 0, ..., 0)``."""
    q = propagator.eigenvectors
    phases = np.exp(-1j * propagator.eigenvalues * float(t))
    v = q @ (phases * q[0]) * alpha0
    return ModeAmplitudes(time=float(t), alpha=complex(v[0]), lambdas=v[1:])


def evolve_many(propagator: Propagator, alpha0: complex, times: np.ndarray) -> np.ndarray:
    """Amplitude matrix of shape ``(len(times), dimension)``; column 0 is alpha(t)."""
    q = propagator.eigenvectors
    phases = propagator.evolution_weights(np.asarray(times, dtype=float))
    return (phases * q[0]) @ q.T * alpha0


def excitation_profile(amplitudes: ModeAmplitudes) -> ExcitationProfile:
    per_mode = np.abs(amplitudes.lambdas) ** 2
    return ExcitationProfile(
        system=float(abs(amplitudes.alpha) ** 2),
        env_total=float(np.sum(per_mode)),
        per_mode=per_mode,
    )
