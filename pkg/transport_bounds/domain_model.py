"""Core data types for transporting an RCT effect from a source to a target location.

Location 0 (the source) ran the randomized trial and contributes covariates,
treatment indicators and outcomes. Location 1 (the target) contributes
covariates only. Everything downstream works on the array-backed
:class:`SourceDataset` / :class:`TargetDataset` pair defined here.
"""

import enum
import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .errors import DataValidationError

logger = logging.getLogger(__name__)


def _frozen_array(values, dtype=float, ndim: int = 1) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    if ndim == 2:
        if array.ndim == 1:
            # A flat vector is read as n units with one covariate each.
            array = array.reshape(-1, 1) if array.size else array.reshape(0, 0)
        if array.ndim != 2:
            raise ValueError(f"Expected a 2-D covariate matrix, got shape {array.shape}")
    elif array.ndim != 1:
        raise ValueError(f"Expected a 1-D vector, got shape {array.shape}")
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class SourceUnit:
    """One RCT participant in the source location."""
    x: tuple
    w: int
    y: float


@dataclass(frozen=True)
class TargetUnit:
    """One unit of the target location; only covariates are observed."""
    x: tuple


@dataclass(frozen=True, eq=False)
class SourceDataset:
    """RCT data from the source location.

    Args:
        x: covariate matrix, one row per unit (n0 x d)
        w: treatment indicators in {0, 1}
        y: observed outcomes
        propensity: known randomization probability P(W = 1)
    """
    x: np.ndarray
    w: np.ndarray
    y: np.ndarray
    propensity: float = 0.5

    def __post_init__(self):
        x = _frozen_array(self.x, ndim=2)
        w = _frozen_array(self.w, dtype=float)
        y = _frozen_array(self.y)
        if not (len(x) == len(w) == len(y)):
            raise ValueError(
                f"Source arrays disagree on unit count: x={len(x)}, w={len(w)}, y={len(y)}"
            )
        if not np.all(np.isin(w, (0.0, 1.0))):
            raise ValueError("Treatment indicator w must only contain 0 and 1")
        if not 0.0 < self.propensity < 1.0:
            raise ValueError(f"Propensity must lie in (0, 1), got {self.propensity}")
        w = _frozen_array(w, dtype=np.int64)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_units(cls, units: Sequence[SourceUnit], propensity: float = 0.5) -> "SourceDataset":
        dim = len(units[0].x) if units else 0
        x = np.array([u.x for u in units], dtype=float).reshape(len(units), dim)
        return cls(x=x, w=[u.w for u in units], y=[u.y for u in units], propensity=propensity)

    @property
    def units(self) -> List[SourceUnit]:
        return [
            SourceUnit(x=tuple(float(v) for v in row), w=int(w), y=float(y))
            for row, w, y in zip(self.x, self.w, self.y)
        ]

    @property
    def n_units(self) -> int:
        return len(self.y)

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    @property
    def treated(self) -> np.ndarray:
        """Boolean mask of treated units."""
        return self.w == 1

    @property
    def control(self) -> np.ndarray:
        return self.w == 0

    @property
    def n_treated(self) -> int:
        return int(self.treated.sum())

    @property
    def n_control(self) -> int:
        return int(self.control.sum())

    def take(self, indices: np.ndarray) -> "SourceDataset":
        """Return the dataset made of the given rows (repeats allowed)."""
        return SourceDataset(
            x=self.x[indices], w=self.w[indices], y=self.y[indices], propensity=self.propensity
        )


@dataclass(frozen=True, eq=False)
class TargetDataset:
    """Covariates observed in the target location (n1 x d)."""
    x: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen_array(self.x, ndim=2))

    @classmethod
    def from_units(cls, units: Sequence[TargetUnit]) -> "TargetDataset":
        dim = len(units[0].x) if units else 0
        return cls(x=np.array([u.x for u in units], dtype=float).reshape(len(units), dim))

    @property
    def units(self) -> List[TargetUnit]:
        return [TargetUnit(x=tuple(float(v) for v in row)) for row in self.x]

    @property
    def n_units(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def take(self, indices: np.ndarray) -> "TargetDataset":
        return TargetDataset(x=self.x[indices])


@dataclass(frozen=True)
class SensitivityParams:
    """Sensitivity bound Gamma and misspecification multiplier M.

    Weights z are confined to [1 / (Gamma * M), Gamma * M].
    """
    gamma: float = 1.0
    misspecification: float = 1.0

    def __post_init__(self):
        if not self.gamma >= 1.0:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")
        if not self.misspecification >= 1.0:
            raise ValueError(f"misspecification must be >= 1, got {self.misspecification}")

    @classmethod
    def from_log(cls, log_gamma: float, misspecification: float = 1.0) -> "SensitivityParams":
        """Build from gamma on the log scale, the axis used by sweeps."""
        if log_gamma < 0:
            raise ValueError(f"log gamma must be >= 0, got {log_gamma}")
        return cls(gamma=float(np.exp(log_gamma)), misspecification=misspecification)

    @property
    def effective_gamma(self) -> float:
        return self.gamma * self.misspecification

    @property
    def log_gamma(self) -> float:
        return float(np.log(self.gamma))

    @property
    def box(self) -> tuple[float, float]:
        g = self.effective_gamma
        return 1.0 / g, g


class SolverStatus(str, enum.Enum):
    """Outcome of a bounds computation, ordered from best to worst."""
    OPTIMAL = "optimal"
    TOLERANCE_RELAXED = "tolerance-relaxed"
    INFEASIBLE = "infeasible"

    @property
    def severity(self) -> int:
        return list(SolverStatus).index(self)

    @staticmethod
    def worst(*statuses: "SolverStatus") -> "SolverStatus":
        return max(statuses, key=lambda s: s.severity)


@dataclass(frozen=True, eq=False)
class BoundsResult:
    """Identification interval for one (Gamma, M) setting.

    ``weights_lower`` / ``weights_upper`` hold one z per source unit, in source
    order, at the infimum and supremum respectively.
    """
    lower: float
    upper: float
    weights_lower: np.ndarray
    weights_upper: np.ndarray
    status: SolverStatus = SolverStatus.OPTIMAL
    feasibility_tol: float | None = None

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack


class Severity(str, enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Violation:
    """One finding of :func:`validate_pair`."""
    kind: str
    message: str
    severity: Severity = Severity.ERROR


def validate_pair(src: SourceDataset, tgt: TargetDataset) -> List[Violation]:
    """Check that a source/target pair can be fed to the estimators.

    Constant covariate columns are reported as warnings only: the intercept of
    the basis absorbs them. Any other finding is an error.

    Returns:
        The list of violations; an empty list means the pair is valid.
    """
    report: List[Violation] = []
    if src.dim != tgt.dim:
        report.append(Violation(
            "dimension_mismatch",
            f"Source has {src.dim} covariates but target has {tgt.dim}",
        ))
    if src.n_treated == 0:
        report.append(Violation("empty_arm", "Source has no treated units (w = 1)"))
    if src.n_control == 0:
        report.append(Violation("empty_arm", "Source has no control units (w = 0)"))
    if tgt.n_units == 0:
        report.append(Violation("empty_target", "Target location has no units"))

    for name, values in (("source x", src.x), ("source y", src.y), ("target x", tgt.x)):
        bad = ~np.isfinite(values)
        if bad.any():
            first = np.argwhere(bad)[0]
            report.append(Violation(
                "non_finite",
                f"{name} has {int(bad.sum())} non-finite value(s), first at index {tuple(int(i) for i in first)}",
            ))

    if src.dim == tgt.dim and src.n_units and tgt.n_units:
        pooled = np.vstack([src.x, tgt.x])
        with np.errstate(invalid="ignore"):
            constant = np.ptp(pooled, axis=0) == 0
        for j in np.flatnonzero(constant):
            report.append(Violation(
                "constant_column",
                f"Covariate x{j + 1} is constant across both locations",
                Severity.WARNING,
            ))
    return report


def has_errors(report: Sequence[Violation]) -> bool:
    return any(v.severity is Severity.ERROR for v in report)


def require_valid(src: SourceDataset, tgt: TargetDataset) -> None:
    """Raise DataValidationError when :func:`validate_pair` reports errors."""
    report = validate_pair(src, tgt)
    for violation in report:
        if violation.severity is Severity.WARNING:
            logger.warning(violation.message)
    errors = [v.message for v in report if v.severity is Severity.ERROR]
    if errors:
        raise DataValidationError("Invalid source/target pair: " + "; ".join(errors), errors)


def difference_in_means(data: SourceDataset) -> float:
    """Mean outcome of treated units minus mean outcome of control units."""
    if data.n_treated == 0 or data.n_control == 0:
        raise DataValidationError("Difference in means needs both arms to be nonempty")
    return float(data.y[data.treated].mean() - data.y[data.control].mean())


def weighted_difference(w: np.ndarray, y: np.ndarray, weights: np.ndarray) -> float:
    """Weighted treated mean minus weighted control mean, normalized by arm sizes."""
    treated = np.asarray(w) == 1
    control = ~treated
    return float(
        np.sum(weights[treated] * y[treated]) / treated.sum()
        - np.sum(weights[control] * y[control]) / control.sum()
    )


def hajek_difference(w: np.ndarray, y: np.ndarray, weights: np.ndarray) -> float:
    """Weighted treated mean minus weighted control mean, normalized by weight sums."""
    treated = np.asarray(w) == 1
    control = ~treated
    return float(
        np.sum(weights[treated] * y[treated]) / np.sum(weights[treated])
        - np.sum(weights[control] * y[control]) / np.sum(weights[control])
    )
