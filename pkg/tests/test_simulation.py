"""Tests for simulation module."""

from dataclasses import replace

import numpy as np
import pytest
from scipy.special import expit
from transport_bounds.domain_model import difference_in_means
from transport_bounds.errors import EmptyLocationError
from transport_bounds.simulation import (
    CovariateLaw, DgpConfig, Setup, SimulatedPopulation, generate, location_marginal,
    log_density_ratio, oracle_ipw, oracle_weights, selection_probability, split,
)


def tiny_population(location):
    n = len(location)
    x = np.linspace(0.1, 0.9, 4 * n).reshape(n, 4)
    u = np.array([0.3, -0.2, 0.5][:n])
    return SimulatedPopulation(
        x=x, u=u, s=(u >= 0).astype(int), w=np.array([1, 0, 1][:n]), location=np.asarray(location),
        tau=x[:, 0] + u + 4.0, y=np.array([5.0, 1.0, 6.0][:n]), epsilon=np.zeros(n),
        z_star=np.ones(n), config=DgpConfig(),
    )


def test_setup_parameters():
    """Test the two predefined parameter points."""
    a = DgpConfig.setup_a()
    b = DgpConfig.setup_b()
    assert a.mu == (2.0, 2.0, -2.0, -2.0)
    assert a.sigma == 3.0 and a.alpha0 == 0.0
    assert a.log_gamma_star == pytest.approx(0.2)
    assert a.covariate_law is CovariateLaw.ARCSINE
    assert b.mu == (0.709, 0.438, 0.2, 0.767)
    assert b.alpha0 == -2.0 and b.sigma == 0.5
    assert b.log_gamma_star == pytest.approx(0.5)
    assert a.beta == b.beta == (0.513, 0.045, 0.7, 0.646)
    assert a.n_total == b.n_total == 1000


def test_default_gamma_grids():
    """Test the sweep grids of the two setups."""
    assert DgpConfig.setup_a().default_gamma_grid == [0.0, 0.1, 0.2, 0.3, 0.4, 0.5]
    assert DgpConfig.setup_b().default_gamma_grid[-1] == 0.7


def test_for_setup_overrides():
    """Test name lookup and scalar overrides, ignoring unset ones."""
    config = DgpConfig.for_setup("b", n_total=50, sigma=None)
    assert config.setup is Setup.B
    assert config.n_total == 50
    assert config.sigma == 0.5
    assert DgpConfig.for_setup("custom").setup is Setup.CUSTOM


@pytest.mark.parametrize("overrides", [
    {"gamma_star": 0.9}, {"sigma": 0.0}, {"mu": (1.0, 2.0)}, {"n_total": 0},
])
def test_config_validation(overrides):
    """Test that invalid configurations are rejected."""
    with pytest.raises(ValueError):
        replace(DgpConfig(), **overrides)


def test_config_to_dict():
    """Test the manifest form of a config."""
    data = DgpConfig.setup_b(seed=4).to_dict()
    assert data["mu"] == [0.709, 0.438, 0.2, 0.767]
    assert data["setup"] == "B"
    assert data["covariate_law"] == "uniform[0,1]^4"
    assert data["seed"] == 4


def test_selection_probability_matches_defining_fraction():
    """Test the simplified S-probability against the unsimplified fraction."""
    a = np.linspace(-5, 5, 41)
    for gamma in (1.2, np.exp(0.5), 4.0):
        e = np.exp(a)
        raw = (1 - 1 / gamma + (gamma - 1) * e) / (gamma - 1 / gamma + (gamma - 1 / gamma) * e)
        assert selection_probability(a, gamma) == pytest.approx(raw, rel=1e-12)


def test_selection_probability_in_unit_interval():
    """Test that the S-probability stays in [0, 1] over a grid of indices and Gamma*."""
    a = np.linspace(-40, 40, 161)
    for gamma in (1.0, 1.0001, 1.5, 10.0, 1e6):
        p = selection_probability(a, gamma)
        assert np.all((p >= 0) & (p <= 1))


def test_gamma_star_one():
    """Test the degenerate point Gamma* = 1."""
    a = np.linspace(-3, 3, 13)
    assert np.array_equal(selection_probability(a, 1.0), expit(a))
    pop = generate(DgpConfig(gamma_star=1.0, seed=2))
    assert np.all(pop.z_star == 1.0)


def test_generate_is_deterministic():
    """Test that a fixed seed gives the same population."""
    first = generate(DgpConfig.setup_a(seed=9))
    second = generate(DgpConfig.setup_a(seed=9))
    for name in ("x", "u", "s", "w", "location", "y"):
        assert np.array_equal(getattr(first, name), getattr(second, name))
    assert not np.array_equal(first.y, generate(DgpConfig.setup_a(seed=10)).y)


@pytest.mark.parametrize("factory", [DgpConfig.setup_a, DgpConfig.setup_b])
def test_population_invariants(factory):
    """Test the sign structure of U, the effect and outcome equations, and the oracle weights."""
    config = factory(seed=3)
    pop = generate(config)
    assert pop.x.shape == (1000, 4)
    assert np.all(pop.u[pop.s == 1] >= 0)
    assert np.all(pop.u[pop.s == 0] <= 0)
    assert np.array_equal(pop.tau, pop.x[:, 0] + pop.u + 4.0)
    expected_y = (pop.x + 4.0) @ np.array(config.beta) + pop.u + pop.w * pop.tau + config.sigma * pop.epsilon
    assert pop.y == pytest.approx(expected_y, abs=1e-12)
    assert np.all(np.isclose(pop.z_star, config.gamma_star) | np.isclose(pop.z_star, 1.0 / config.gamma_star))
    assert np.all((pop.z_star >= 1.0 / config.gamma_star - 1e-15) & (pop.z_star <= config.gamma_star + 1e-15))
    assert pop.n_source + pop.n_target == 1000


def test_oracle_weight_is_location_odds_ratio():
    """Test that z* is the ratio of location odds given (X, U) and given X alone."""
    config = DgpConfig.setup_b(seed=1)
    pop = generate(config)
    a = config.alpha0 + pop.x @ np.array(config.mu)
    given_u = expit(a + config.log_gamma_star * np.where(pop.u >= 0, 1.0, -1.0))
    q = selection_probability(a, config.gamma_star)
    given_x = q * expit(a + config.log_gamma_star) + (1 - q) * expit(a - config.log_gamma_star)
    assert given_x == pytest.approx(expit(a), rel=1e-12)
    odds_ratio = (given_u / (1 - given_u)) / (given_x / (1 - given_x))
    assert odds_ratio == pytest.approx(pop.z_star, rel=1e-10)


def test_target_count_within_binomial_band():
    """Test the target size against the location law."""
    config = DgpConfig.setup_b(seed=17)
    pop = generate(config)
    a = config.alpha0 + pop.x @ np.array(config.mu)
    p = expit(a + config.log_gamma_star * np.where(pop.u >= 0, 1.0, -1.0))
    assert abs(pop.n_target - p.sum()) <= 3.0 * np.sqrt((p * (1 - p)).sum())


def test_split_partitions_units():
    """Test the split of a three-unit population."""
    pop = tiny_population([0, 0, 1])
    src, tgt, oracle = split(pop)
    assert src.n_units == 2 and tgt.n_units == 1
    assert src.propensity == 0.5
    assert oracle.target_ground_truth == pytest.approx(pop.tau[2])
    assert np.isnan(oracle.target_difference_in_means)
    frame = oracle.to_frame()
    assert list(frame.columns) == ["location", "index", "u", "tau", "z_star", "log_density_ratio"]
    assert frame["location"].tolist() == [0, 0, 1]


def test_split_ground_truth_is_target_mean():
    """Test the finite-population ground truth."""
    pop = generate(DgpConfig.setup_a(seed=4))
    _, tgt, oracle = split(pop)
    assert oracle.target_ground_truth == pytest.approx(pop.tau[pop.location == 1].mean(), abs=1e-12)
    assert tgt.n_units == pop.n_target


@pytest.mark.parametrize("location", [[0, 0, 0], [1, 1, 1]])
def test_split_rejects_empty_location(location):
    """Test that an empty location is an error that advises resampling."""
    with pytest.raises(EmptyLocationError, match="n_total"):
        split(tiny_population(location))


def test_location_marginal_without_shift():
    """Test P(L = 1) = 1/2 when the location index is zero everywhere."""
    assert location_marginal(DgpConfig()) == 0.5
    assert np.all(log_density_ratio(np.zeros((3, 4)), DgpConfig()) == 0.0)


def test_oracle_ipw_without_shift_is_difference_in_means():
    """Test that equal covariate laws and Gamma* = 1 give uniform weights."""
    pop = generate(DgpConfig(gamma_star=1.0, seed=8))
    src, _, _ = split(pop)
    assert np.allclose(oracle_weights(pop), 1.0)
    assert oracle_ipw(pop) == pytest.approx(difference_in_means(src), abs=1e-12)


def test_oracle_ipw_is_scale_invariant():
    """Test that doubling all weights leaves the Hajek estimate unchanged."""
    pop = generate(DgpConfig.setup_a(seed=6))
    weights = oracle_weights(pop)
    assert oracle_ipw(pop, 2.0 * weights) == pytest.approx(oracle_ipw(pop, weights), rel=1e-12)


@pytest.mark.slow
def test_oracle_ipw_is_consistent():
    """Test that the true-weight estimate lands near the target ground truth at large n."""
    pop = generate(DgpConfig.setup_a(n_total=100_000, seed=0))
    _, _, oracle = split(pop)
    source = np.flatnonzero(pop.location == 0)
    weights = oracle_weights(pop)
    estimate = oracle_ipw(pop, weights)

    rng = np.random.default_rng(0)
    replicates = []
    for _ in range(200):
        pick = rng.integers(0, len(source), size=len(source))
        sub = source[pick]
        w, y, z = pop.w[sub], pop.y[sub], weights[pick]
        replicates.append((z * w * y).sum() / (z * w).sum() - (z * (1 - w) * y).sum() / (z * (1 - w)).sum())
    se = float(np.std(replicates, ddof=1))
    assert abs(estimate - oracle.target_ground_truth) <= 3.0 * se + 0.02


@pytest.mark.slow
def test_location_frequencies_follow_location_law():
    """Test empirical P(L = 1 | X-bin) against the marginal location law at large n."""
    config = DgpConfig.setup_a(n_total=1_000_000, seed=1)
    pop = generate(config)
    a = config.alpha0 + pop.x @ np.array(config.mu)
    bins = np.digitize(a, [-2.0, -0.5, 0.5, 2.0])
    for b in np.unique(bins):
        inside = bins == b
        if inside.sum() < 10_000:
            continue
        observed = pop.location[inside].mean()
        expected = expit(a[inside]).mean()
        assert abs(observed - expected) <= 4.0 * np.sqrt(expected * (1 - expected) / inside.sum())
