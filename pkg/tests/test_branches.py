import math

import numpy as np
import pytest

from darwinbath import (
    BranchState,
    ConfigError,
    ModelConfig,
    NumericalError,
    Rank2Spec,
    branch_subset_overlap,
    build_coupling_matrix,
    cat_normalization,
    coherent_overlap,
    diagonalize,
    entropy,
    evolve,
    mutual_information,
    subset_entropy,
)
from darwinbath.branches import reduced_state

LN2 = 0.6931471805599453
E_HALF = 0.6065306597126334  # e^{-1/2}
E_M18 = 1.5229979744712628e-08  # e^{-18}
G_CAT_3 = 0.7071067758019366  # (2 (1 + e^{-18}))^{-1/2}


@pytest.fixture(scope="module")
def evolved_state():
    """Default cat run at decay_rate * t ~ 0.7 (branches nearly orthogonal)."""
    cfg = ModelConfig()
    p = diagonalize(build_coupling_matrix(cfg))
    amps = evolve(p, cfg.alpha0, 20.0)
    return BranchState.from_amplitudes(cfg.branch_a, cfg.branch_b, amps)


def ghz_state(n_env=8):
    overlaps = np.zeros(n_env + 1)
    return BranchState.from_overlaps(2**-0.5, 2**-0.5, overlaps)


class TestCoherentOverlap:
    def test_normalization(self):
        assert coherent_overlap(1.3 - 0.2j, 1.3 - 0.2j) == pytest.approx(1.0)

    def test_one_zero(self):
        assert coherent_overlap(1.0, 0.0) == pytest.approx(E_HALF, rel=1e-12)

    def test_opposite_cats(self):
        assert coherent_overlap(3.0, -3.0) == pytest.approx(E_M18, rel=1e-12)

    def test_general_phase(self):
        mu, nu = 0.5 + 0.5j, -0.2 + 1.0j
        expected = np.exp(-abs(mu) ** 2 / 2 - abs(nu) ** 2 / 2 + np.conj(mu) * nu)
        assert coherent_overlap(mu, nu) == pytest.approx(expected)


class TestCatNormalization:
    def test_single_branch(self):
        assert cat_normalization(1.0, 0.0, 3.0) == pytest.approx(1.0)

    def test_orthogonal_limit(self):
        assert cat_normalization(1.0, 1.0, 8.0) == pytest.approx(2**-0.5, rel=1e-14)

    def test_alpha0_three(self):
        assert cat_normalization(1.0, 1.0, 3.0) == pytest.approx(G_CAT_3, rel=1e-12)

    def test_rejects_null_coefficients(self):
        with pytest.raises(ConfigError):
            cat_normalization(0.0, 0.0, 1.0)


class TestBranchState:
    def test_per_site_overlap_matches_amplitudes(self, evolved_state):
        amps = evolved_state.amplitudes
        site_sq = np.concatenate(([abs(amps.alpha) ** 2], np.abs(amps.lambdas) ** 2))
        assert np.allclose(evolved_state.per_site_overlap, np.exp(-2 * site_sq))
        assert np.all(evolved_state.per_site_overlap > 0)
        assert np.all(evolved_state.per_site_overlap <= 1)

    def test_global_overlap_conserved(self, evolved_state):
        # log of the global product equals -2 |alpha0|^2
        assert evolved_state.total_log_overlap == pytest.approx(-18.0, rel=1e-9)

    def test_norm_matches_t0_evaluation(self, evolved_state):
        assert evolved_state.norm_G == pytest.approx(
            cat_normalization(1.0, 1.0, 3.0), rel=1e-12
        )

    def test_fixture_overlaps_validated(self):
        with pytest.raises(ConfigError):
            BranchState.from_overlaps(1.0, 1.0, np.array([0.5, 1.5]))


class TestSubsetOverlap:
    def test_empty_subset(self, evolved_state):
        assert branch_subset_overlap(evolved_state, []) == 1.0

    def test_full_set(self, evolved_state):
        full = branch_subset_overlap(evolved_state, range(evolved_state.n_sites))
        assert math.log(full) == pytest.approx(-18.0, rel=1e-9)

    def test_quarter_excitation(self):
        # engineered state whose first two bath modes hold 0.25 excitations
        lambdas = np.zeros(4, dtype=complex)
        lambdas[:2] = math.sqrt(0.125)
        from darwinbath.model import ModeAmplitudes

        amps = ModeAmplitudes(time=0.0, alpha=math.sqrt(8.75), lambdas=lambdas)
        state = BranchState.from_amplitudes(1.0, 1.0, amps)
        assert branch_subset_overlap(state, [1, 2]) == pytest.approx(E_HALF, rel=1e-12)

    def test_monotone_in_excitation(self, evolved_state):
        # adding any site with nonzero excitation strictly lowers the overlap
        subset = list(range(1, 200))
        smaller = branch_subset_overlap(evolved_state, subset)
        larger = branch_subset_overlap(evolved_state, subset + [200])
        assert larger < smaller


class TestReducedState:
    def test_global_purity(self, evolved_state):
        spec = reduced_state(evolved_state, range(evolved_state.n_sites))
        lam = spec.eigenvalues()
        assert lam[0] == pytest.approx(1.0, abs=1e-10)
        assert abs(lam[1]) <= 1e-10

    def test_ghz_fragment_maximally_mixed(self):
        spec = reduced_state(ghz_state(), [1, 2, 3])
        lam = spec.eigenvalues()
        assert lam[0] == pytest.approx(0.5, abs=1e-12)
        assert lam[1] == pytest.approx(0.5, abs=1e-12)

    def test_trace_one(self, evolved_state):
        rng = np.random.default_rng(7)
        for _ in range(20):
            size = rng.integers(0, 901)
            subset = rng.choice(901, size=size, replace=False)
            lam = reduced_state(evolved_state, subset).eigenvalues()
            assert lam[0] + lam[1] == pytest.approx(1.0, abs=1e-10)


class TestEntropy:
    def test_pure(self):
        assert entropy(Rank2Spec(1.0, 0.0, 0.0, 0.0)) == 0.0

    def test_maximally_mixed(self):
        assert entropy(Rank2Spec(0.5, 0.5, 0.0, 0.0)) == pytest.approx(LN2, rel=1e-12)

    def test_system_entropy_saturates_ln2(self, evolved_state):
        h = entropy(reduced_state(evolved_state, [0]))
        assert abs(h - LN2) < 1e-3

    def test_bounded_by_ln2(self, evolved_state):
        rng = np.random.default_rng(3)
        for _ in range(30):
            subset = rng.choice(901, size=rng.integers(0, 901), replace=False)
            h = entropy(reduced_state(evolved_state, subset))
            assert -1e-12 <= h <= LN2 + 1e-12

    def test_inconsistent_spec_rejected(self):
        with pytest.raises(NumericalError):
            entropy(Rank2Spec(2.0, 0.0, 0.0, 0.0))

    def test_vectorized_matches_scalar(self, evolved_state):
        rng = np.random.default_rng(11)
        for _ in range(15):
            subset = rng.choice(901, size=rng.integers(1, 901), replace=False)
            scalar = entropy(reduced_state(evolved_state, subset))
            log_s = evolved_state.subset_log_overlap(subset)
            vec = float(subset_entropy(evolved_state, log_s))
            assert vec == pytest.approx(scalar, abs=1e-12)


class TestMutualInformation:
    def test_empty_fragment(self, evolved_state):
        assert mutual_information(evolved_state, []) == pytest.approx(0.0, abs=1e-12)

    def test_full_environment(self, evolved_state):
        h_s = entropy(reduced_state(evolved_state, [0]))
        mi = mutual_information(evolved_state, range(1, 901))
        assert mi == pytest.approx(2 * h_s, abs=1e-9)

    def test_ghz_plateau_value(self):
        state = ghz_state(8)
        for fragment in ([1], [2, 5], list(range(1, 8))):
            assert mutual_information(state, fragment) == pytest.approx(LN2, abs=1e-12)

    def test_system_index_rejected(self, evolved_state):
        with pytest.raises(ConfigError):
            mutual_information(evolved_state, [0, 1])

    def test_purity_complement(self, evolved_state):
        rng = np.random.default_rng(5)
        for _ in range(50):
            size = rng.integers(1, 900)
            fragment = rng.choice(900, size=size, replace=False) + 1
            h_sf = entropy(reduced_state(evolved_state, np.concatenate(([0], fragment))))
            rest = np.setdiff1d(np.arange(1, 901), fragment)
            h_rest = entropy(reduced_state(evolved_state, rest))
            assert h_sf == pytest.approx(h_rest, abs=1e-9)

    def test_depends_only_on_excitation_sum(self):
        # uniform bath profile: any two equal-size fragments have equal sums
        lambdas = np.full(40, 0.3, dtype=complex)
        from darwinbath.model import ModeAmplitudes

        alpha = math.sqrt(9.0 - np.sum(np.abs(lambdas) ** 2))
        amps = ModeAmplitudes(time=1.0, alpha=alpha, lambdas=lambdas)
        state = BranchState.from_amplitudes(1.0, 1.0, amps)
        mi_a = mutual_information(state, [1, 2, 3, 4, 5])
        mi_b = mutual_information(state, [7, 12, 21, 33, 40])
        assert mi_a == pytest.approx(mi_b, abs=1e-12)

    def test_range(self, evolved_state):
        rng = np.random.default_rng(13)
        h_s = entropy(reduced_state(evolved_state, [0]))
        for _ in range(25):
            fragment = rng.choice(900, size=rng.integers(1, 900), replace=False) + 1
            mi = mutual_information(evolved_state, fragment)
            assert -1e-9 <= mi <= 2 * h_s + 1e-9
