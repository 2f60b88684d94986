"""Tests for basis module."""

import numpy as np
import pytest
from transport_bounds.basis import BasisKind, BasisSpec, NamedTransform, expand, expand_dataset
from transport_bounds.errors import BasisError
from transport_bounds.simulation import DgpConfig, generate


def test_identity_expansion():
    """Test identity basis prepends the intercept."""
    assert expand(BasisSpec.identity(), [0.5, -1.0]).tolist() == [1.0, 0.5, -1.0]


def test_polynomial_expansion():
    """Test degree-2 polynomial features of a scalar."""
    assert expand(BasisSpec.polynomial(2), [2.0]).tolist() == [1.0, 2.0, 4.0]


def test_identity_expansion_of_zeros():
    """Test the all-zeros covariate vector."""
    assert expand(BasisSpec.identity(), np.zeros(4)).tolist() == [1.0, 0.0, 0.0, 0.0, 0.0]


def test_polynomial_feature_names():
    """Test that polynomial features stack powers degree by degree without cross terms."""
    spec = BasisSpec.polynomial(3)
    assert spec.feature_names(2) == ["intercept", "x1", "x2", "x1^2", "x2^2", "x1^3", "x2^3"]
    assert spec.n_features(2) == 7


def test_intercept_only_basis():
    """Test the intercept-only basis."""
    spec = BasisSpec.intercept_only()
    assert expand(spec, [3.0, 4.0]).tolist() == [1.0]
    assert spec.feature_names(2) == ["intercept"]
    assert spec.includes_intercept


def test_custom_basis():
    """Test user-supplied named transforms."""
    spec = BasisSpec.custom([NamedTransform("x1*x2", lambda x: x[0] * x[1])])
    assert spec.kind is BasisKind.CUSTOM
    assert expand(spec, [2.0, 3.0]).tolist() == [1.0, 6.0]
    assert spec.feature_names(2) == ["intercept", "x1*x2"]


@pytest.mark.parametrize("text", ["identity", "intercept", "poly:1", "poly:3"])
def test_parse_round_trip(text):
    """Test that the CLI basis strings parse and serialize back."""
    assert BasisSpec.parse(text).to_string() == text


@pytest.mark.parametrize("text", ["spline", "poly:x", "poly:0"])
def test_parse_rejects_unknown(text):
    """Test that malformed basis strings are rejected."""
    with pytest.raises(ValueError):
        BasisSpec.parse(text)


def test_dimension_mismatch():
    """Test that a declared input dimension is enforced."""
    spec = BasisSpec(kind=BasisKind.IDENTITY, input_dim=3)
    with pytest.raises(BasisError):
        expand(spec, [1.0, 2.0])


def test_non_finite_output_reports_row():
    """Test that a bad custom transform is reported with its row index."""
    spec = BasisSpec.custom([NamedTransform("log", lambda x: np.log(x[0]))])
    rows = np.array([[1.0], [2.0], [-1.0]])
    with np.errstate(invalid="ignore"):
        with pytest.raises(BasisError) as info:
            expand_dataset(spec, rows)
    assert info.value.row == 2


def test_failing_transform_reports_row():
    """Test that an exception inside a transform carries the row index."""
    def picky(x):
        if x[0] > 1:
            raise ArithmeticError("too large")
        return x[0]

    spec = BasisSpec.custom([NamedTransform("picky", picky)])
    with pytest.raises(BasisError) as info:
        expand_dataset(spec, [[0.5], [3.0]])
    assert info.value.row == 1


def test_expand_dataset_matches_expand():
    """Test that every row of expand_dataset equals expand on that row."""
    rows = np.random.default_rng(0).normal(size=(10, 3))
    spec = BasisSpec.polynomial(2)
    matrix = expand_dataset(spec, rows)
    for i, row in enumerate(rows):
        assert np.array_equal(matrix.values[i], expand(spec, row))
    assert np.all(matrix.values[:, 0] == 1.0)


def test_expand_dataset_identical_rows():
    """Test that identical rows give identical feature rows."""
    matrix = expand_dataset(BasisSpec.identity(), [[0.1, 0.2]] * 3)
    assert np.array_equal(matrix.values[0], matrix.values[2])
    assert matrix.values.shape == (3, 3)


def test_expand_dataset_empty():
    """Test that no rows gives an empty matrix with p columns."""
    spec = BasisSpec(kind=BasisKind.IDENTITY, input_dim=4)
    matrix = expand_dataset(spec, np.empty((0, 4)))
    assert matrix.values.shape == (0, 5)


def test_uniform_covariates_bound():
    """Test that uniform covariates under the identity basis have sup-norm 1."""
    pop = generate(DgpConfig.setup_b(seed=3))
    matrix = expand_dataset(BasisSpec.identity(bound=1.0), pop.x)
    assert matrix.max_abs == 1.0
    assert np.all((matrix.values[:, 1:] >= 0) & (matrix.values[:, 1:] <= 1))
    assert matrix.within_bound
