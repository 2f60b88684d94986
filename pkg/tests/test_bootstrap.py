"""Tests for bootstrap module."""

import numpy as np
import pytest
from transport_bounds.basis import BasisSpec
from transport_bounds.bootstrap import (
    bootstrap_bounds, bootstrap_sweep, percentile_interval, replicate_generators, uniform_resampler,
)
from transport_bounds.bounds_balanced import solve_balanced
from transport_bounds.density_ratio import fit
from transport_bounds.domain_model import SensitivityParams
from transport_bounds.errors import BootstrapFailureError
from transport_bounds.simulation import DgpConfig, generate, split

SPEC = BasisSpec.identity()


@pytest.fixture(scope="module")
def data():
    src, tgt, _ = split(generate(DgpConfig.setup_b(seed=2)))
    return src, tgt


def identity_resampler(rng, n_source, n_target):
    return np.arange(n_source), np.arange(n_target)


def test_percentile_of_integer_sequence():
    """Test the linearly interpolated percentile of 1..1000."""
    values = np.arange(1, 1001)
    lower, upper = percentile_interval(values, values, 0.95)
    assert lower == pytest.approx(25.975)
    assert upper == pytest.approx(975.025)


def test_percentile_rejects_level():
    """Test that the level must lie in (0, 1)."""
    with pytest.raises(ValueError):
        percentile_interval([1.0], [1.0], 1.0)


def test_generators_are_independent_of_count():
    """Test that replicate k's stream does not depend on how many replicates are spawned."""
    few = replicate_generators(7, 2)
    many = replicate_generators(7, 5)
    assert few[1].random() == many[1].random()


def test_uniform_resampler_ranges():
    """Test index ranges and sizes of a resample."""
    rng = np.random.default_rng(0)
    source_rows, target_rows = uniform_resampler(rng, 30, 12)
    assert source_rows.shape == (30,) and target_rows.shape == (12,)
    assert source_rows.max() < 30 and target_rows.max() < 12


def test_identity_resample_reproduces_point_bounds(data):
    """Test that a single replicate equal to the data gives the point interval."""
    src, tgt = data
    sens = SensitivityParams.from_log(0.3)
    point = solve_balanced(src, tgt, fit(src, tgt, SPEC), SPEC, sens)
    result = bootstrap_bounds(src, tgt, SPEC, sens, n_resamples=1, resampler=identity_resampler)
    assert result.lower_ci == pytest.approx(point.lower, abs=1e-12)
    assert result.upper_ci == pytest.approx(point.upper, abs=1e-12)
    assert result.successes == 1 and result.failures == 0


def test_same_seed_same_result(data):
    """Test reproducibility under a fixed seed."""
    src, tgt = data
    sens = SensitivityParams.from_log(0.2)
    first = bootstrap_bounds(src, tgt, SPEC, sens, estimator="unbalanced", n_resamples=20, seed=11)
    second = bootstrap_bounds(src, tgt, SPEC, sens, estimator="unbalanced", n_resamples=20, seed=11)
    assert np.array_equal(first.replicates_lower, second.replicates_lower)
    assert np.array_equal(first.replicates_upper, second.replicates_upper)
    assert first.lower_ci == second.lower_ci and first.upper_ci == second.upper_ci


def test_threaded_run_matches_serial(data):
    """Test that worker threads do not change the replicates."""
    src, tgt = data
    sens = SensitivityParams.from_log(0.2)
    serial = bootstrap_bounds(src, tgt, SPEC, sens, n_resamples=12, seed=3, workers=1)
    threaded = bootstrap_bounds(src, tgt, SPEC, sens, n_resamples=12, seed=3, workers=4)
    assert np.array_equal(serial.replicates_lower, threaded.replicates_lower)
    assert np.array_equal(serial.replicates_upper, threaded.replicates_upper)


def test_interval_brackets_replicate_medians(data):
    """Test lower_ci <= median of lower replicates and upper_ci >= median of upper replicates."""
    src, tgt = data
    result = bootstrap_bounds(src, tgt, SPEC, SensitivityParams.from_log(0.1), n_resamples=30, seed=5)
    assert result.lower_ci <= np.median(result.replicates_lower)
    assert result.upper_ci >= np.median(result.replicates_upper)
    assert result.lower_ci <= result.upper_ci
    assert result.successes + result.failures == result.n_resamples == 30
    assert result.level == 0.95 and result.seed == 5


def test_sweep_covers_grid_and_estimators(data):
    """Test that a sweep reports every (gamma, estimator) setting."""
    src, tgt = data
    results = bootstrap_sweep(src, tgt, SPEC, [0.0, 0.2], n_resamples=5, seed=1)
    assert set(results) == {(0.0, "balanced"), (0.0, "unbalanced"), (0.2, "balanced"), (0.2, "unbalanced")}
    # at Gamma = 1 both estimators give the same replicate points
    assert results[(0.0, "balanced")].replicates_lower == pytest.approx(
        results[(0.0, "unbalanced")].replicates_lower, abs=1e-9)


def test_few_failures_are_dropped_and_counted(data):
    """Test that a failed replicate under the 5% threshold is dropped."""
    src, tgt = data
    treated_only = np.flatnonzero(src.treated)
    calls = []

    def flaky(rng, n_source, n_target):
        calls.append(1)
        if len(calls) == 1:
            return treated_only, np.arange(n_target)
        return uniform_resampler(rng, n_source, n_target)

    result = bootstrap_bounds(src, tgt, SPEC, SensitivityParams.from_log(0.1), estimator="unbalanced",
                              n_resamples=40, resampler=flaky)
    assert result.failures == 1
    assert result.successes == 39


def test_too_many_failures_raise(data):
    """Test that losing more than 5% of replicates is an error."""
    src, tgt = data
    treated_only = np.flatnonzero(src.treated)

    def broken(rng, n_source, n_target):
        return treated_only, np.arange(n_target)

    with pytest.raises(BootstrapFailureError) as info:
        bootstrap_bounds(src, tgt, SPEC, SensitivityParams.from_log(0.1), n_resamples=10, resampler=broken)
    assert info.value.failures == 10
    assert info.value.n_resamples == 10


@pytest.mark.parametrize("kwargs", [{"n_resamples": 0}, {"level": 0.0}, {"estimator": "ipw"}])
def test_rejects_bad_arguments(data, kwargs):
    """Test argument validation."""
    src, tgt = data
    with pytest.raises(ValueError):
        bootstrap_bounds(src, tgt, SPEC, SensitivityParams(gamma=1.5), **kwargs)


def test_singular_lp_basis_counts_as_failure(data, monkeypatch):
    """Test that a singular simplex basis fails the replicate instead of the run."""
    src, tgt = data

    def singular(matrix):
        raise np.linalg.LinAlgError("Singular matrix")

    monkeypatch.setattr(np.linalg, "inv", singular)
    with pytest.raises(BootstrapFailureError) as info:
        bootstrap_bounds(src, tgt, SPEC, SensitivityParams.from_log(0.1), n_resamples=10)
    assert info.value.failures == 10
