"""Identification interval without balancing constraints.

Each weight z_i only meets its box [1/G, G] (G = Gamma * M), so the linear
objective separates by unit: the supremum puts z_i at G wherever the unit's
signed coefficient is positive and at 1/G wherever it is negative.
"""

import logging

import numpy as np

from .domain_model import BoundsResult, SensitivityParams, SolverStatus, SourceDataset

logger = logging.getLogger(__name__)


def signed_coefficients(src: SourceDataset, rhat: np.ndarray) -> np.ndarray:
    """a_i = r_hat_i * Y_i / n_arm, negated for control units."""
    n_arm = np.where(src.treated, src.n_treated, src.n_control)
    sign = np.where(src.treated, 1.0, -1.0)
    return sign * rhat * src.y / n_arm


def _extreme_weights(coefficients: np.ndarray, gamma: float, maximize: bool) -> np.ndarray:
    z = np.ones_like(coefficients)
    favourable = coefficients > 0 if maximize else coefficients < 0
    adverse = coefficients < 0 if maximize else coefficients > 0
    z[favourable] = gamma
    z[adverse] = 1.0 / gamma
    return z


def solve_unbalanced(
    src: SourceDataset,
    rhat: np.ndarray,
    sens: SensitivityParams,
) -> BoundsResult:
    """Exact bounds for the box-constrained problem.

    Args:
        src: source RCT data
        rhat: estimated density ratio per source unit, all positive
        sens: sensitivity parameters; the box uses Gamma * M

    Returns:
        BoundsResult with status optimal. Units with a zero coefficient keep z = 1.
    """
    rhat = np.asarray(rhat, dtype=float)
    if rhat.shape != (src.n_units,):
        raise ValueError(f"Expected {src.n_units} density-ratio values, got shape {rhat.shape}")
    if not np.all(rhat > 0) or not np.all(np.isfinite(rhat)):
        raise ValueError("Density-ratio values must be positive and finite")
    if src.n_treated == 0 or src.n_control == 0:
        raise ValueError("Both treatment arms must be nonempty")

    gamma = sens.effective_gamma
    a = signed_coefficients(src, rhat)
    z_upper = _extreme_weights(a, gamma, maximize=True)
    z_lower = _extreme_weights(a, gamma, maximize=False)
    upper = float(a @ z_upper)
    lower = float(a @ z_lower)
    logger.debug("Unbalanced bounds at Gamma*M=%.6g: [%.6g, %.6g]", gamma, lower, upper)
    return BoundsResult(
        lower=lower,
        upper=upper,
        weights_lower=z_lower,
        weights_upper=z_upper,
        status=SolverStatus.OPTIMAL,
    )
