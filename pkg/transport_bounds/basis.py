"""Basis expansion phi(x) shared by the density-ratio fit and the balancing constraints.

Every expansion starts with a constant 1 column. Features are computed on the
raw covariates, without centering or scaling, so that balancing a feature
means balancing exactly that moment of the covariates.
"""

import enum
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np

from .errors import BasisError


class BasisKind(str, enum.Enum):
    IDENTITY = "identity"
    POLYNOMIAL = "polynomial"
    CUSTOM = "custom"


@dataclass(frozen=True)
class NamedTransform:
    """A user feature: maps one raw covariate vector to one real number."""
    name: str
    fn: Callable[[np.ndarray], float]


@dataclass(frozen=True)
class BasisSpec:
    """Description of phi.

    Polynomial bases stack per-covariate powers, degree by degree:
    ``(1, x1..xd, x1^2..xd^2, ...)``; no cross terms.

    Args:
        kind: identity, polynomial or custom
        degree: highest power for polynomial bases
        transforms: named feature maps for custom bases
        bound: declared sup-norm bound on features; checked against data, not assumed
        input_dim: expected covariate dimension, if known up front
    """
    kind: BasisKind = BasisKind.IDENTITY
    degree: int = 1
    transforms: Tuple[NamedTransform, ...] = ()
    bound: float | None = None
    input_dim: int | None = None

    def __post_init__(self):
        if self.kind is BasisKind.POLYNOMIAL and self.degree < 1:
            raise ValueError(f"Polynomial degree must be >= 1, got {self.degree}")
        if self.kind is BasisKind.CUSTOM and not self.transforms:
            raise ValueError("A custom basis needs at least one transform")
        if self.bound is not None and not self.bound > 0:
            raise ValueError(f"Feature bound must be positive, got {self.bound}")

    @property
    def includes_intercept(self) -> bool:
        return True

    @classmethod
    def identity(cls, bound: float | None = None) -> "BasisSpec":
        return cls(kind=BasisKind.IDENTITY, bound=bound)

    @classmethod
    def polynomial(cls, degree: int, bound: float | None = None) -> "BasisSpec":
        return cls(kind=BasisKind.POLYNOMIAL, degree=degree, bound=bound)

    @classmethod
    def intercept_only(cls) -> "BasisSpec":
        """A polynomial of degree 0 in spirit: phi(x) = (1,)."""
        return cls(kind=BasisKind.CUSTOM, transforms=(NamedTransform("intercept_only", _drop),))

    @classmethod
    def custom(cls, transforms: Sequence[NamedTransform], bound: float | None = None) -> "BasisSpec":
        return cls(kind=BasisKind.CUSTOM, transforms=tuple(transforms), bound=bound)

    @classmethod
    def parse(cls, text: str) -> "BasisSpec":
        """Parse the CLI form: ``identity``, ``poly:k`` or ``intercept``."""
        text = text.strip().lower()
        if text == "identity":
            return cls.identity()
        if text == "intercept":
            return cls.intercept_only()
        if text.startswith("poly:"):
            try:
                degree = int(text.split(":", 1)[1])
            except ValueError:
                raise ValueError(f"Invalid polynomial degree in basis '{text}'")
            return cls.polynomial(degree)
        raise ValueError(f"Unknown basis '{text}' (expected identity, intercept or poly:k)")

    def to_string(self) -> str:
        if self.kind is BasisKind.IDENTITY:
            return "identity"
        if self.kind is BasisKind.POLYNOMIAL:
            return f"poly:{self.degree}"
        if self.transforms and self.transforms[0].fn is _drop:
            return "intercept"
        raise ValueError("Custom bases cannot be serialized to a config string")

    def feature_names(self, dim: int) -> List[str]:
        names = ["intercept"]
        if self.kind is BasisKind.CUSTOM:
            return names + [t.name for t in self.transforms if t.fn is not _drop]
        degree = self.degree if self.kind is BasisKind.POLYNOMIAL else 1
        for k in range(1, degree + 1):
            names += [f"x{j + 1}" if k == 1 else f"x{j + 1}^{k}" for j in range(dim)]
        return names

    def n_features(self, dim: int) -> int:
        return len(self.feature_names(dim))


def _drop(x: np.ndarray) -> float:
    return 0.0


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Result of :func:`expand_dataset`."""
    values: np.ndarray
    names: List[str]
    max_abs: float
    bound: float | None = None

    @property
    def within_bound(self) -> bool:
        return self.bound is None or self.max_abs <= self.bound


def _check_dim(spec: BasisSpec, dim: int) -> None:
    if spec.input_dim is not None and dim != spec.input_dim:
        raise BasisError(f"Expected {spec.input_dim} covariates, got {dim}")


def _expand_rows(spec: BasisSpec, rows: np.ndarray) -> np.ndarray:
    n = rows.shape[0]
    columns = [np.ones((n, 1))]
    if spec.kind is BasisKind.CUSTOM:
        for transform in spec.transforms:
            if transform.fn is _drop:
                continue
            values = np.empty(n)
            for i, row in enumerate(rows):
                try:
                    values[i] = float(transform.fn(row))
                except Exception as e:
                    raise BasisError(f"Transform '{transform.name}' failed on row {i}: {e}", row=i)
            columns.append(values.reshape(n, 1))
    else:
        degree = spec.degree if spec.kind is BasisKind.POLYNOMIAL else 1
        columns += [rows ** k for k in range(1, degree + 1)]
    return np.hstack(columns)


def expand(spec: BasisSpec, x: Sequence[float]) -> np.ndarray:
    """Map one covariate vector to its feature vector (first entry is 1)."""
    row = np.asarray(x, dtype=float).reshape(1, -1)
    _check_dim(spec, row.shape[1])
    features = _expand_rows(spec, row)[0]
    if not np.all(np.isfinite(features)):
        raise BasisError("Basis expansion produced a non-finite feature", row=0)
    return features


def expand_dataset(spec: BasisSpec, rows) -> FeatureMatrix:
    """Expand every row of a covariate matrix.

    Returns:
        A FeatureMatrix whose row i equals ``expand(spec, rows[i])``, plus the
        empirical max |feature| used to check the declared bound.
    """
    matrix = np.asarray(rows, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix.reshape(0, 0) if matrix.size == 0 else matrix.reshape(1, -1)
    dim = spec.input_dim if matrix.shape[0] == 0 and spec.input_dim else matrix.shape[1]
    _check_dim(spec, dim)
    names = spec.feature_names(dim)
    if matrix.shape[0] == 0:
        return FeatureMatrix(np.empty((0, len(names))), names, 0.0, spec.bound)

    values = _expand_rows(spec, matrix)
    finite = np.isfinite(values)
    if not finite.all():
        row = int(np.argwhere(~finite)[0][0])
        raise BasisError(f"Basis expansion produced a non-finite feature in row {row}", row=row)
    return FeatureMatrix(values, names, float(np.abs(values).max()), spec.bound)
