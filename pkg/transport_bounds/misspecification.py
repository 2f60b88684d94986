"""Bounds when the density-ratio model may be misspecified.

If the true log ratio g is not in the span of phi, the balancing fit
converges to some g_phi instead. Widening the weight box by a multiplier M
with M^-1 <= exp(g - g_phi) <= M restores validity of both estimators, which
then run unchanged with Gamma replaced by Gamma * M.
"""

import numpy as np

from .domain_model import SensitivityParams


def effective_gamma(sens: SensitivityParams) -> float:
    return sens.effective_gamma


def required_multiplier(log_ratio_true, log_ratio_fitted) -> float:
    """Smallest M covering the gap between true and fitted log ratios.

    Args:
        log_ratio_true: g(X_i) on a set of units
        log_ratio_fitted: g_phi(X_i) on the same units

    Returns:
        exp(max_i |g(X_i) - g_phi(X_i)|), which is 1 when the model is exact.
    """
    true = np.asarray(log_ratio_true, dtype=float)
    fitted = np.asarray(log_ratio_fitted, dtype=float)
    if true.shape != fitted.shape:
        raise ValueError(f"Log ratio shapes differ: {true.shape} vs {fitted.shape}")
    if true.size == 0:
        return 1.0
    gap = np.abs(true - fitted)
    if not np.all(np.isfinite(gap)):
        raise ValueError("Log ratios must be finite")
    return float(np.exp(gap.max()))


def misspecified_sensitivity(gamma: float, log_ratio_true, log_ratio_fitted) -> SensitivityParams:
    """SensitivityParams with M set by :func:`required_multiplier`."""
    return SensitivityParams(gamma=gamma, misspecification=required_multiplier(log_ratio_true, log_ratio_fitted))
