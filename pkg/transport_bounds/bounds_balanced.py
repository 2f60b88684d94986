"""Covariate-balanced identification interval.

On top of the box 1/G <= z_i <= G, each arm's weights must keep the arm's
reweighted feature means on the target means:

    sum_{i in arm} gamma_i z_i phi(X_i) = cbar,   gamma_i = r_hat_i / n_arm

Treated and control weights never share a constraint, so the interval comes
from four independent linear programs, two per arm. Equalities are enforced
as ranges of half-width eps; when the ranges are infeasible eps is doubled up
to ``LPOptions.max_feasibility_tol`` and the result is flagged.
"""

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .basis import BasisSpec, expand_dataset
from .density_ratio import DensityRatioFit, weights
from .domain_model import BoundsResult, SensitivityParams, SolverStatus, SourceDataset, TargetDataset
from .errors import LPInfeasibleError
from .simplex import OPTIMAL, LPOptions, bounded_simplex

logger = logging.getLogger(__name__)

Arm = Literal["treated", "control"]
Direction = Literal["max", "min"]


@dataclass(frozen=True, eq=False)
class ArmLP:
    """Linear program of one arm.

    Args:
        coefficients: gamma_i * Y_i for every unit of the arm
        constraint_matrix: p x n_arm matrix whose column i is gamma_i * phi(X_i)
        rhs: target feature means cbar (length p)
        box: (1 / G, G) with G = Gamma * M
        arm: "treated" or "control"
        unit_index: positions of the arm's units in the source dataset
    """
    coefficients: np.ndarray
    constraint_matrix: np.ndarray
    rhs: np.ndarray
    box: tuple[float, float]
    arm: Arm = "treated"
    unit_index: np.ndarray | None = None

    def __post_init__(self):
        n_rows, n_cols = self.constraint_matrix.shape
        if n_cols != len(self.coefficients):
            raise ValueError(
                f"Constraint matrix has {n_cols} columns but the arm has {len(self.coefficients)} units"
            )
        if n_rows != len(self.rhs):
            raise ValueError(f"Constraint matrix has {n_rows} rows but rhs has length {len(self.rhs)}")

    @property
    def n_units(self) -> int:
        return len(self.coefficients)

    def constraint_residual(self, z: np.ndarray) -> np.ndarray:
        """Left-hand side minus rhs at the given weights."""
        return self.constraint_matrix @ z - self.rhs


@dataclass(frozen=True, eq=False)
class LPSolution:
    value: float
    z: np.ndarray
    status: SolverStatus
    feasibility_tol: float
    dual_value: float
    iterations: int = 0


def build_arm_lp(
    src: SourceDataset,
    rhat: np.ndarray,
    tgt_feature_mean: np.ndarray,
    arm: Arm,
    sens: SensitivityParams,
    spec: BasisSpec | None = None,
) -> ArmLP:
    """Assemble the program of one arm.

    Args:
        src: source RCT data
        rhat: converged density-ratio weights, one per source unit
        tgt_feature_mean: cbar, the target mean of phi
        arm: "treated" or "control"
        sens: sensitivity parameters; the box uses Gamma * M
        spec: basis used for phi (identity when None)
    """
    if arm not in ("treated", "control"):
        raise ValueError(f"arm must be 'treated' or 'control', got {arm!r}")
    spec = spec or BasisSpec.identity()
    rhat = np.asarray(rhat, dtype=float)
    if rhat.shape != (src.n_units,):
        raise ValueError(f"Expected {src.n_units} density-ratio values, got shape {rhat.shape}")
    mask = src.treated if arm == "treated" else src.control
    unit_index = np.flatnonzero(mask)
    phi = expand_dataset(spec, src.x[mask]).values
    rhs = np.asarray(tgt_feature_mean, dtype=float)
    if rhs.shape != (phi.shape[1],):
        raise ValueError(f"Target feature mean has length {rhs.size}, basis has {phi.shape[1]} features")

    gamma = rhat[mask] / max(len(unit_index), 1)
    return ArmLP(
        coefficients=gamma * src.y[mask],
        constraint_matrix=(phi * gamma[:, None]).T,
        rhs=rhs,
        box=sens.box,
        arm=arm,
        unit_index=unit_index,
    )


def solve_lp(lp: ArmLP, direction: Direction, options: LPOptions | None = None) -> LPSolution:
    """Optimize one arm program, relaxing the equality ranges if needed.

    Returns:
        LPSolution whose status is optimal at the base tolerance and
        tolerance-relaxed when a wider range was needed.

    Raises:
        LPInfeasibleError: still infeasible at ``max_feasibility_tol``
    """
    if direction not in ("max", "min"):
        raise ValueError(f"direction must be 'max' or 'min', got {direction!r}")
    options = options or LPOptions()
    low, high = lp.box
    lower = np.full(lp.n_units, low)
    upper = np.full(lp.n_units, high)
    tol = options.feasibility_tol

    while True:
        result = bounded_simplex(
            lp.coefficients,
            lp.constraint_matrix,
            lp.rhs - tol,
            lp.rhs + tol,
            lower,
            upper,
            sense=direction,
            options=options,
        )
        if result.status == OPTIMAL:
            relaxed = tol > options.feasibility_tol
            if relaxed:
                logger.warning("%s arm (%s): balance ranges relaxed to %.3g", lp.arm, direction, tol)
            return LPSolution(
                value=result.objective,
                z=result.x,
                status=SolverStatus.TOLERANCE_RELAXED if relaxed else SolverStatus.OPTIMAL,
                feasibility_tol=tol,
                dual_value=result.dual_objective,
                iterations=result.iterations,
            )
        if tol >= options.max_feasibility_tol:
            gap = tol + result.min_infeasibility
            raise LPInfeasibleError(
                f"Balancing constraints of the {lp.arm} arm are infeasible within the box "
                f"[{low:.6g}, {high:.6g}] even at tolerance {tol:.3g} "
                f"(smallest reachable violation {gap:.3g})",
                min_infeasibility=gap,
            )
        logger.debug("%s arm (%s): infeasible at tolerance %.3g, doubling", lp.arm, direction, tol)
        tol = min(2.0 * tol, options.max_feasibility_tol)


def solve_balanced(
    src: SourceDataset,
    tgt: TargetDataset,
    fit: DensityRatioFit,
    spec: BasisSpec,
    sens: SensitivityParams,
    options: LPOptions | None = None,
) -> BoundsResult:
    """Balanced bounds on the transported ATE.

    upper = max(treated) - min(control), lower = min(treated) - max(control).

    Raises:
        NonConvergenceError: the fit did not converge on an arm
        LPInfeasibleError: an arm program stays infeasible after relaxation
    """
    rhat = weights(fit, src, spec)
    target_mean = expand_dataset(spec, tgt.x).values.mean(axis=0)
    treated = build_arm_lp(src, rhat, target_mean, "treated", sens, spec)
    control = build_arm_lp(src, rhat, target_mean, "control", sens, spec)

    treated_max = solve_lp(treated, "max", options)
    treated_min = solve_lp(treated, "min", options)
    control_max = solve_lp(control, "max", options)
    control_min = solve_lp(control, "min", options)

    weights_upper = np.empty(src.n_units)
    weights_upper[treated.unit_index] = treated_max.z
    weights_upper[control.unit_index] = control_min.z
    weights_lower = np.empty(src.n_units)
    weights_lower[treated.unit_index] = treated_min.z
    weights_lower[control.unit_index] = control_max.z

    solutions = (treated_max, treated_min, control_max, control_min)
    result = BoundsResult(
        lower=treated_min.value - control_max.value,
        upper=treated_max.value - control_min.value,
        weights_lower=weights_lower,
        weights_upper=weights_upper,
        status=SolverStatus.worst(*(s.status for s in solutions)),
        feasibility_tol=max(s.feasibility_tol for s in solutions),
    )
    logger.debug("Balanced bounds at Gamma*M=%.6g: [%.6g, %.6g] (%s)",
                 sens.effective_gamma, result.lower, result.upper, result.status.value)
    return result
