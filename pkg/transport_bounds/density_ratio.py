"""Covariate-balancing estimate of the density ratio r(x) = dP1(X) / dP0(X).

For each treatment arm w the coefficients minimize

    F_w(beta) = mean_{arm}(exp(phi(X_i)' beta)) - cbar' beta

where cbar is the mean feature vector of the target location. The gradient of
F_w is the arm's exp-weighted feature mean minus cbar, so a stationary point
balances every feature of phi exactly. Fitting each arm separately makes the
balance hold within treated and control units alike.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Tuple

import numpy as np
import pandas as pd

from .basis import BasisSpec, expand_dataset
from .domain_model import SourceDataset, TargetDataset, require_valid
from .errors import NonConvergenceError, SeparationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NewtonOptions:
    """Settings of the per-arm Newton solver.

    Args:
        max_iter: iteration cap per arm
        balance_tol: max-norm of the gradient at which an arm counts as converged
        armijo: sufficient-decrease constant of the backtracking line search
        backtrack: step shrink factor
        min_step: smallest step tried before the line search gives up
        max_condition: Hessian condition number above which the Newton system is solved by
            truncated least squares, dropping directions the features cannot move
        separation_limit: largest |beta_j| * max|phi_j| accepted before declaring separation
        parallel: fit the two arms on two threads
    """
    max_iter: int = 100
    balance_tol: float = 1e-8
    armijo: float = 1e-4
    backtrack: float = 0.5
    min_step: float = 1e-12
    max_condition: float = 1e12
    separation_limit: float = 50.0
    parallel: bool = True


@dataclass(frozen=True, eq=False)
class ArmFit:
    """Solver output for one treatment arm."""
    beta: np.ndarray
    balance_residual: np.ndarray
    iterations: int
    converged: bool
    objective_history: List[float] = field(default_factory=list)
    truncated_steps: int = 0

    @property
    def max_residual(self) -> float:
        return float(np.abs(self.balance_residual).max()) if self.balance_residual.size else 0.0


@dataclass(frozen=True, eq=False)
class DensityRatioFit:
    """Fitted coefficients for both arms plus balance diagnostics."""
    treated: ArmFit
    control: ArmFit
    target_mean: np.ndarray
    feature_names: List[str]
    feature_max_abs: float
    balance_tol: float = 1e-8

    @property
    def beta_treated(self) -> np.ndarray:
        return self.treated.beta

    @property
    def beta_control(self) -> np.ndarray:
        return self.control.beta

    @property
    def balance_residual_treated(self) -> np.ndarray:
        return self.treated.balance_residual

    @property
    def balance_residual_control(self) -> np.ndarray:
        return self.control.balance_residual

    @property
    def iterations(self) -> Tuple[int, int]:
        """(treated, control)"""
        return self.treated.iterations, self.control.iterations

    @property
    def converged(self) -> bool:
        return self.treated.converged and self.control.converged

    def arm(self, w: int) -> ArmFit:
        return self.treated if w == 1 else self.control


def objective(beta: np.ndarray, features: np.ndarray, target_mean: np.ndarray) -> float:
    """F_w(beta) for the arm whose feature rows are given."""
    with np.errstate(over="ignore"):
        return float(np.mean(np.exp(features @ beta)) - target_mean @ beta)


def gradient(beta: np.ndarray, features: np.ndarray, target_mean: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        tilt = np.exp(features @ beta)
    return features.T @ tilt / len(features) - target_mean


def hessian(beta: np.ndarray, features: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        tilt = np.exp(features @ beta)
    return (features * tilt[:, None]).T @ features / len(features)


def _check_hull(features: np.ndarray, target_mean: np.ndarray, names: List[str], arm: str) -> None:
    # A target mean outside the arm's feature range leaves F_w unbounded below.
    low, high = features.min(axis=0), features.max(axis=0)
    for j in range(1, features.shape[1]):
        if target_mean[j] < low[j] or target_mean[j] > high[j]:
            raise SeparationError(
                f"Feature '{names[j]}' separates the {arm} arm from the target location: "
                f"target mean {target_mean[j]:.6g} outside arm range [{low[j]:.6g}, {high[j]:.6g}]",
                feature=names[j],
            )


def fit_arm(
    features: np.ndarray,
    target_mean: np.ndarray,
    names: List[str],
    options: NewtonOptions = NewtonOptions(),
    arm: str = "treated",
) -> ArmFit:
    """Minimize F_w for one arm by damped Newton steps from beta = 0."""
    _check_hull(features, target_mean, names, arm)
    p = features.shape[1]
    scale = np.maximum(np.abs(features).max(axis=0), 1e-300)
    beta = np.zeros(p)
    f = objective(beta, features, target_mean)
    history = [f]
    truncated_steps = 0
    converged = False
    iteration = 0

    for iteration in range(options.max_iter + 1):
        g = gradient(beta, features, target_mean)
        if np.abs(g).max() <= options.balance_tol:
            converged = True
            break
        if iteration == options.max_iter:
            break

        H = hessian(beta, features)
        condition = np.linalg.cond(H)
        if np.isfinite(condition) and condition <= options.max_condition:
            direction = -np.linalg.solve(H, g)
        else:
            # Collinear features (a constant column, a repeated power) make H singular; g stays in its range.
            logger.debug("%s arm: Hessian condition %.3g, truncated least-squares step", arm, condition)
            direction = -np.linalg.lstsq(H, g, rcond=1.0 / options.max_condition)[0]
            truncated_steps += 1
            if not g @ direction < 0:
                direction = -g

        slope = g @ direction
        step = 1.0
        g_norm = np.abs(g).max()
        while step >= options.min_step:
            candidate = beta + step * direction
            f_new = objective(candidate, features, target_mean)
            if f_new <= f + options.armijo * step * slope:
                break
            # At the bottom of the bowl the decrease drowns in rounding; accept
            # a step that leaves F unchanged to rounding but shrinks the gradient.
            if (abs(f_new - f) <= 1e-14 * max(1.0, abs(f))
                    and np.abs(gradient(candidate, features, target_mean)).max() < g_norm):
                break
            step *= options.backtrack
        else:
            logger.debug("%s arm: line search stalled at iteration %d", arm, iteration)
            break

        beta, f = candidate, f_new
        history.append(f)
        logger.debug("%s arm: iteration %d objective %.12g step %.3g", arm, iteration, f, step)

        reach = np.abs(beta) * scale
        reach[0] = 0.0
        if reach.max() > options.separation_limit:
            j = int(np.argmax(reach))
            raise SeparationError(
                f"Coefficients diverge on feature '{names[j]}' in the {arm} arm "
                f"(|beta| = {abs(beta[j]):.3g}); the feature nearly separates the locations",
                feature=names[j],
            )

    residual = gradient(beta, features, target_mean)
    if converged:
        logger.info("%s arm converged in %d iterations (max residual %.2e)",
                    arm, iteration, np.abs(residual).max())
    else:
        logger.warning("%s arm did not converge after %d iterations (max residual %.2e)",
                       arm, iteration, np.abs(residual).max())
    return ArmFit(
        beta=beta,
        balance_residual=residual,
        iterations=iteration,
        converged=converged,
        objective_history=history,
        truncated_steps=truncated_steps,
    )


def fit(
    src: SourceDataset,
    tgt: TargetDataset,
    spec: BasisSpec,
    opts: NewtonOptions | None = None,
) -> DensityRatioFit:
    """Fit the balancing density ratio separately on treated and control units.

    Args:
        src: source RCT data
        tgt: target covariates
        spec: basis expansion phi
        opts: Newton solver options (defaults when None)

    Returns:
        A DensityRatioFit; arms that hit the iteration cap carry converged=False.

    Raises:
        SeparationError: a feature makes the objective unbounded below
    """
    opts = opts or NewtonOptions()
    require_valid(src, tgt)
    source_features = expand_dataset(spec, src.x)
    target_features = expand_dataset(spec, tgt.x)
    max_abs = max(source_features.max_abs, target_features.max_abs)
    if spec.bound is not None and max_abs > spec.bound:
        logger.warning("Feature sup-norm %.6g exceeds the declared bound %.6g", max_abs, spec.bound)

    names = source_features.names
    target_mean = target_features.values.mean(axis=0)
    Phi = source_features.values
    jobs = [
        (Phi[src.treated], target_mean, names, opts, "treated"),
        (Phi[src.control], target_mean, names, opts, "control"),
    ]
    if opts.parallel:
        with ThreadPoolExecutor(max_workers=2) as executor:
            futures = [executor.submit(fit_arm, *job) for job in jobs]
            treated, control = (future.result() for future in futures)
    else:
        treated, control = (fit_arm(*job) for job in jobs)

    return DensityRatioFit(
        treated=treated,
        control=control,
        target_mean=target_mean,
        feature_names=names,
        feature_max_abs=max_abs,
        balance_tol=opts.balance_tol,
    )


def log_weights(fit: DensityRatioFit, src: SourceDataset, spec: BasisSpec) -> np.ndarray:
    """g_hat(X_i) per source unit, using the coefficients of the unit's own arm."""
    Phi = expand_dataset(spec, src.x).values
    return np.where(src.treated, Phi @ fit.beta_treated, Phi @ fit.beta_control)


def weights(fit: DensityRatioFit, src: SourceDataset, spec: BasisSpec) -> np.ndarray:
    """Estimated density ratio r_hat(X_i) = exp(g_hat(X_i)) for every source unit.

    Raises:
        NonConvergenceError: an arm holding source units did not converge
    """
    for w, mask in ((1, src.treated), (0, src.control)):
        if mask.any() and not fit.arm(w).converged:
            arm = "treated" if w == 1 else "control"
            raise NonConvergenceError(
                f"Density ratio fit did not converge on the {arm} arm "
                f"(max residual {fit.arm(w).max_residual:.2e})"
            )
    return np.exp(log_weights(fit, src, spec))


@dataclass(frozen=True)
class BalanceRow:
    arm: str
    feature: str
    weighted_source_mean: float
    target_mean: float
    residual: float
    passed: bool


def balance_report(
    fit: DensityRatioFit,
    src: SourceDataset,
    tgt: TargetDataset,
    spec: BasisSpec,
) -> List[BalanceRow]:
    """Recompute both sides of the empirical balance condition, per arm and feature."""
    Phi = expand_dataset(spec, src.x).values
    target_mean = expand_dataset(spec, tgt.x).values.mean(axis=0)
    names = spec.feature_names(src.dim)
    rows: List[BalanceRow] = []
    for arm, mask, beta in (("treated", src.treated, fit.beta_treated),
                            ("control", src.control, fit.beta_control)):
        arm_features = Phi[mask]
        if len(arm_features) == 0:
            continue
        tilt = np.exp(arm_features @ beta)
        weighted = arm_features.T @ tilt / len(arm_features)
        for j, name in enumerate(names):
            residual = float(weighted[j] - target_mean[j])
            rows.append(BalanceRow(
                arm=arm,
                feature=name,
                weighted_source_mean=float(weighted[j]),
                target_mean=float(target_mean[j]),
                residual=residual,
                passed=abs(residual) <= fit.balance_tol,
            ))
    return rows


def balance_frame(rows: List[BalanceRow]) -> pd.DataFrame:
    """Balance report as a table, ready for CSV export."""
    columns = ["arm", "feature", "weighted_source_mean", "target_mean", "residual", "passed"]
    return pd.DataFrame([asdict(row) for row in rows], columns=columns)
