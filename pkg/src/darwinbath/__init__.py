"""Quantum Darwinism and non-Markovianity diagnostics for an oscillator bath.

One harmonic oscillator exchanges excitations with a finite bath of
oscillators; initial cat states spread records of the system's sign branch
through the bath.  The package computes the exact two-branch dynamics,
partial information plots, redundancy metrics, fragment-map diagnostics, and
fidelity-based non-Markovianity measures, with continuum closed forms and a
truncated-Fock oracle as independent checks.
"""

from .branches import (
    BranchState,
    Rank2Spec,
    branch_subset_overlap,
    cat_normalization,
    coherent_overlap,
    entropy,
    mutual_information,
    subset_entropy,
)
from .darwinism import (
    PipCurve,
    RedundancyTrace,
    averaged_relative_redundancy,
    f_delta,
    fraction_sizes,
    non_monotonicity,
    normalized_pip,
    pip_at_time,
    pip_trace,
    redundancy_trace,
    sample_fragments,
)
from .errors import ConfigError, NumericalError
from .model import (
    CouplingMatrix,
    ModeAmplitudes,
    ModelConfig,
    Propagator,
    build_coupling_matrix,
    diagonalize,
    evolve,
    evolve_many,
    excitation_profile,
)
from .nonmarkov import (
    FidelityTrajectory,
    fidelity_drop_sum,
    fidelity_pure,
    fidelity_trajectory,
    nm_degree,
    pair_separations_sq,
    sample_pairs,
    system_gain,
    system_gains,
)
from .bph import BphReport, DistinguishabilityCurve, bph_report, distinguishability_curve
from .analytic import (
    ConcentrationStats,
    ContinuumParams,
    FockOracle,
    alpha_markov,
    alpha_nonmarkov,
    asymptotic_density,
    asymptotic_density_split,
    concentration_stats,
    lambda0_nonmarkov,
    lambda_markov,
    lambda_markov_settled,
    lambda_nonmarkov,
    rectangular_profile,
    two_rectangle_profile,
)

__version__ = "0.1.0"
