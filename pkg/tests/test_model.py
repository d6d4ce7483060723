import numpy as np
import pytest

from darwinbath import (
    ConfigError,
    CouplingMatrix,
    ModelConfig,
    build_coupling_matrix,
    diagonalize,
    evolve,
    evolve_many,
    excitation_profile,
)

GAMMA_DEFAULT = 0.1 / 30
DECAY_RATE = 0.03490658503988659  # 2*pi*gamma^2*N/(1.8), defaults


@pytest.fixture(scope="module")
def default_propagator():
    return diagonalize(build_coupling_matrix(ModelConfig()))


class TestModelConfig:
    def test_defaults(self):
        cfg = ModelConfig()
        assert cfg.n_env == 900
        assert cfg.coupling_gamma_bar == cfg.gamma
        assert cfg.mode_density == pytest.approx(500.0)
        assert cfg.decay_rate == pytest.approx(DECAY_RATE, rel=1e-12)
        times = cfg.times
        assert times[0] == 0.0
        assert times.size == 600
        assert times[-1] == pytest.approx(10.0 / DECAY_RATE)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n_env": 0},
            {"omega_min": 1.5},
            {"omega_max": 0.9},
            {"gamma": 0.0},
            {"gamma_bar": -1.0},
            {"delta": 0.0},
            {"delta": 1.0},
            {"mc_samples": 0},
            {"time_grid": (1.0, 2.0)},
            {"time_grid": (0.0, 2.0, 2.0)},
            {"time_grid": (0.0,)},
        ],
    )
    def test_invalid_configs_rejected(self, kwargs):
        with pytest.raises(ConfigError):
            ModelConfig(**kwargs)

    def test_explicit_time_grid_used(self):
        cfg = ModelConfig(time_grid=(0.0, 1.0, 5.0))
        assert np.array_equal(cfg.times, [0.0, 1.0, 5.0])


class TestCouplingMatrix:
    def test_two_mode_example(self):
        cfg = ModelConfig(n_env=2, omega_min=0.5, omega_max=1.5, gamma=0.1)
        m = build_coupling_matrix(cfg)
        expected = np.array([[1.0, 0.1, 0.1], [0.1, 0.5, 0.0], [0.1, 0.0, 1.5]])
        assert np.allclose(m.dense(), expected, atol=0)

    def test_default_arrowhead_structure(self):
        m = build_coupling_matrix(ModelConfig())
        dense = m.dense()
        assert dense.shape == (901, 901)
        assert np.count_nonzero(dense) == 901 + 2 * 900
        assert np.array_equal(dense, dense.T)

    def test_gamma_bar_on_nearest_mode(self):
        cfg = ModelConfig(gamma_bar=50 * GAMMA_DEFAULT)
        m = build_coupling_matrix(cfg)
        special = np.nonzero(m.border != cfg.gamma)[0]
        assert special.size == 1
        omegas = cfg.environment_frequencies()
        assert special[0] == np.argmin(np.abs(omegas - 1.0))
        assert m.border[special[0]] == 50 * GAMMA_DEFAULT
        # the 900-point grid has no exact hit at omega0
        assert np.min(np.abs(omegas - 1.0)) > 0

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            CouplingMatrix(diagonal=np.ones(3), border=np.ones(3))


class TestDiagonalize:
    def test_two_by_two(self):
        m = CouplingMatrix(diagonal=np.array([1.0, 1.0]), border=np.array([0.1]))
        p = diagonalize(m)
        assert np.allclose(p.eigenvalues, [0.9, 1.1], atol=1e-12)

    def test_decoupled_eigenvalues_match_diagonal(self):
        diag = np.array([1.0, 0.3, 0.7, 1.4])
        m = CouplingMatrix(diagonal=diag, border=np.zeros(3))
        p = diagonalize(m)
        assert np. allclose(p.eigenvalues, np.sort(diag), atol=1e-14)

    def test_trace_identity(self, default_propagator):
        m = build_coupling_matrix(ModelConfig())
        trace = m.diagonal.sum()
        assert default_propagator.eigenvalues.sum() == pytest.approx(trace, rel=1e-8)

    def test_deterministic(self):
        m = build_coupling_matrix(ModelConfig(n_env=50))
        p1, p2 = diagonalize(m), diagonalize(m)
        assert np.array_equal(p1.eigenvalues, p2.eigenvalues)
        assert np.array_equal(p1.eigenvectors, p2.eigenvectors)
        assert p1.source_hash == p2.source_hash


class TestEvolve:
    def test_identity_at_t0(self, default_propagator):
        amps = evolve(default_propagator, 3.0, 0.0)
        assert amps.alpha == pytest.approx(3.0, abs=1e-12)
        assert np.max(np.abs(amps.lambdas)) < 1e-12

    def test_decoupled_phase_rotation(self):
        m = CouplingMatrix(
            diagonal=np.array([1.0, 0.5, 1.5]), border=np.zeros(2)
        )
        p = diagonalize(m)
        for t in (0.7, 3.0, 11.0):
            amps = evolve(p, 2.0 + 1.0j, t)
            assert amps.alpha == pytest.approx((2 + 1j) * np.exp(-1j * t), abs=1e-12)
            assert np.max(np.abs(amps.lambdas)) < 1e-12

    def test_conservation(self, default_propagator):
        alpha0 = 3.0 + 0.0j
        for t in (0.0, 1.7, 20.0, 143.0, 286.0):
            amps = evolve(default_propagator, alpha0, t)
            assert abs(amps.total_excitation() - 9.0) <= 1e-9 * 9.0

    def test_linearity(self, default_propagator):
        base = evolve(default_propagator, 1.0, 37.0)
        for c in (0.5, 3.0, 2.0 - 1.5j):
            scaled = evolve(default_propagator, c, 37.0)
            assert abs(scaled.alpha - c * base.alpha) <= 1e-12 * abs(c * base.alpha)
            assert np.allclose(scaled.lambdas, c * base.lambdas, rtol=1e-12, atol=1e-15)

    def test_unitarity(self, default_propagator):
        v = evolve_many(default_propagator, 1.0, np.array([0.0, 5.0, 80.0]))
        norms = np.linalg.norm(v, axis=1)
        assert np.allclose(norms, 1.0, rtol=1e-10)

    def test_evolve_many_matches_evolve(self, default_propagator):
        times = np.array([0.0, 2.5, 60.0])
        matrix = evolve_many(default_propagator, 3.0, times)
        for i, t in enumerate(times):
            amps = evolve(default_propagator, 3.0, t)
            assert matrix[i, 0] == pytest.approx(amps.alpha, abs=1e-12)
            assert np.allclose(matrix[i, 1:], amps.lambdas, atol=1e-12)


class TestMarkovianDecay:
    """Exact numerics against the continuum exponential e^{-decay_rate * t}.

    The short-time start is slower than exponential (finite coupling
    bandwidth), overshooting the continuum law by up to ~0.031 before the
    curves lock together; past decay_rate*t = 0.5 the deviation stays well
    inside 0.02.
    """

    def test_population_tracks_golden_rule_exponential(self, default_propagator):
        cfg = ModelConfig()
        ts = np.linspace(0.0, 6.0 / cfg.decay_rate, 400)
        pops = np.abs(evolve_many(default_propagator, 1.0, ts)[:, 0]) ** 2
        dev = pops - np.exp(-cfg.decay_rate * ts)
        late = cfg.decay_rate * ts >= 0.5
        assert np.max(np.abs(dev[late])) <= 0.02
        # transient: one-sided (never undershoots) and bounded
        assert np.min(dev[~late]) >= -1e-9
        assert np.max(dev[~late]) <= 0.035

    @pytest.mark.xfail(
        strict=True,
        reason="bandwidth transient peaks at ~0.031 just after t=0; "
        "0.02 cannot hold on the full window",
    )
    def test_literal_bound_over_full_window(self, default_propagator):
        cfg = ModelConfig()
        ts = np.linspace(0.0, 6.0 / cfg.decay_rate, 400)
        pops = np.abs(evolve_many(default_propagator, 1.0, ts)[:, 0]) ** 2
        assert np.max(np.abs(pops - np.exp(-cfg.decay_rate * ts))) <= 0.02

    @pytest.mark.xfail(
        strict=True,
        reason="the nominal constant 4*pi*gamma^2*rho is twice the measured "
        "decay rate of this coupling",
    )
    def test_nominal_rate_exponential(self, default_propagator):
        cfg = ModelConfig()
        nominal = 2.0 * cfg.decay_rate
        ts = np.linspace(0.0, 6.0 / nominal, 400)
        pops = np.abs(evolve_many(default_propagator, 1.0, ts)[:, 0]) ** 2
        assert np.max(np.abs(pops - np.exp(-nominal * ts))) <= 0.02


class TestExcitationProfile:
    def test_t0(self, default_propagator):
        profile = excitation_profile(evolve(default_propagator, 3.0, 0.0))
        assert profile.system == pytest.approx(9.0)
        assert profile.env_total < 1e-20

    def test_sum_conserved(self, default_propagator):
        profile = excitation_profile(evolve(default_propagator, 3.0, 50.0))
        assert profile.system + profile.env_total == pytest.approx(9.0, abs=1e-9 * 9)
        assert profile.env_total == pytest.approx(profile.per_mode.sum())

    def test_resonant_coupling_oscillates_at_twice_gamma_bar(self):
        # excitation exchange completes a cycle at angular frequency 2*gamma_bar
        gbar = 50 * GAMMA_DEFAULT
        cfg = ModelConfig(gamma_bar=gbar)
        p = diagonalize(build_coupling_matrix(cfg))
        ts = np.linspace(0.0, 6.0 / cfg.decay_rate, 4000)
        pops = np.abs(evolve_many(p, 1.0, ts)[:, 0]) ** 2
        interior = (pops[1:-1] < pops[:-2]) & (pops[1:-1] < pops[2:])
        minima_t = ts[1:-1][interior]
        assert minima_t.size >= 4
        spacing = np.diff(minima_t).mean()
        measured = 2.0 * np.pi / spacing
        assert measured == pytest.approx(2.0 * gbar, rel=0.03)

    def test_resonant_population_respects_decay_envelope(self):
        cfg = ModelConfig(gamma_bar=50 * GAMMA_DEFAULT)
        p = diagonalize(build_coupling_matrix(cfg))
        ts = np.linspace(0.0, 6.0 / cfg.decay_rate, 1200)
        pops = np.abs(evolve_many(p, 1.0, ts)[:, 0]) ** 2
        envelope = np.exp(-0.5 * cfg.decay_rate * ts)  # amplitude rate halves on resonance
        assert np.all(pops <= envelope * 1.02 + 0.01)


class TestRecurrenceGuard:
    def test_default_grid_is_safe(self):
        import warnings as _warnings

        with _warnings.catch_warnings():
            _warnings.simplefilter("error")
            cfg = ModelConfig()
        assert cfg.times[-1] < 0.5 * cfg.recurrence_time

    def test_overlong_grid_warns(self):
        with pytest.warns(UserWarning, match="recurrence"):
            ModelConfig(t_max_gamma=80.0)

    def test_recurrence_scale(self):
        cfg = ModelConfig()
        spacing = 1.8 / 899
        assert cfg.recurrence_time == pytest.approx(2 * np.pi / spacing, rel=1e-12)
