"""Percentile-bootstrap confidence intervals for the bound endpoints.

Every replicate resamples the source and the target location independently
with replacement, refits the density ratio on the resample and recomputes the
bounds. Replicate k draws from its own generator, spawned as child k of
``SeedSequence(seed)``, so serial and threaded runs give the same replicates.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Literal, Sequence, Tuple

import numpy as np

from .basis import BasisSpec
from .bounds_balanced import solve_balanced
from .bounds_unbalanced import solve_unbalanced
from .density_ratio import NewtonOptions, fit, weights
from .domain_model import SensitivityParams, SourceDataset, TargetDataset
from .errors import BootstrapFailureError, DataValidationError, SolverError
from .simplex import LPOptions

logger = logging.getLogger(__name__)

Estimator = Literal["balanced", "unbalanced"]
ESTIMATORS: Tuple[Estimator, ...] = ("balanced", "unbalanced")
MAX_FAILURE_RATE = 0.05

Resampler = Callable[[np.random.Generator, int, int], Tuple[np.ndarray, np.ndarray]]
SettingKey = Tuple[float, str]


@dataclass(frozen=True, eq=False)
class BootstrapResult:
    """Percentile interval plus the replicate endpoints it was read from."""
    level: float
    n_resamples: int
    lower_ci: float
    upper_ci: float
    replicates_lower: np.ndarray
    replicates_upper: np.ndarray
    seed: int
    failures: int = 0

    @property
    def successes(self) -> int:
        return len(self.replicates_lower)


def uniform_resampler(rng: np.random.Generator, n_source: int, n_target: int) -> Tuple[np.ndarray, np.ndarray]:
    """Row indices drawn with replacement, independently per location."""
    return rng.integers(0, n_source, size=n_source), rng.integers(0, n_target, size=n_target)


def replicate_generators(seed: int, n_resamples: int) -> List[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(child)) for child in np.random.SeedSequence(seed).spawn(n_resamples)]


def percentile_interval(lower_replicates, upper_replicates, level: float = 0.95) -> Tuple[float, float]:
    """Lower quantile of the lower endpoints and upper quantile of the upper endpoints.

    Quantiles interpolate linearly between order statistics.
    """
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    tail = (1.0 - level) / 2.0
    lo = np.quantile(np.asarray(lower_replicates, dtype=float), tail, method="linear")
    hi = np.quantile(np.asarray(upper_replicates, dtype=float), 1.0 - tail, method="linear")
    return float(lo), float(hi)


def _replicate(
    rng: np.random.Generator,
    src: SourceDataset,
    tgt: TargetDataset,
    spec: BasisSpec,
    settings: Sequence[Tuple[float, SensitivityParams]],
    estimators: Sequence[str],
    resampler: Resampler,
    newton_options: NewtonOptions,
    lp_options: LPOptions | None,
) -> Dict[SettingKey, Tuple[float, float] | str]:
    """Endpoints of one replicate per setting, or the reason it failed."""
    source_rows, target_rows = resampler(rng, src.n_units, tgt.n_units)
    src_b, tgt_b = src.take(source_rows), tgt.take(target_rows)
    out: Dict[SettingKey, Tuple[float, float] | str] = {}
    try:
        fitted = fit(src_b, tgt_b, spec, newton_options)
        rhat = weights(fitted, src_b, spec)
    except (DataValidationError, SolverError) as e:
        return {(key, est): str(e) for key, _ in settings for est in estimators}

    for key, sens in settings:
        for est in estimators:
            try:
                if est == "balanced":
                    bounds = solve_balanced(src_b, tgt_b, fitted, spec, sens, lp_options)
                else:
                    bounds = solve_unbalanced(src_b, rhat, sens)
                out[(key, est)] = (bounds.lower, bounds.upper)
            except (DataValidationError, SolverError) as e:
                out[(key, est)] = str(e)
    return out


def _run(
    src: SourceDataset,
    tgt: TargetDataset,
    spec: BasisSpec,
    settings: Sequence[Tuple[float, SensitivityParams]],
    estimators: Sequence[str],
    n_resamples: int,
    level: float,
    seed: int,
    resampler: Resampler | None,
    workers: int,
    newton_options: NewtonOptions | None,
    lp_options: LPOptions | None,
) -> Dict[SettingKey, BootstrapResult]:
    if n_resamples < 1:
        raise ValueError(f"n_resamples must be >= 1, got {n_resamples}")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    unknown = set(estimators) - set(ESTIMATORS)
    if unknown:
        raise ValueError(f"Unknown estimator(s): {sorted(unknown)}")

    resampler = resampler or uniform_resampler
    newton_options = newton_options or NewtonOptions()
    if workers > 1:
        newton_options = replace(newton_options, parallel=False)

    def run_one(rng: np.random.Generator):
        return _replicate(rng, src, tgt, spec, settings, estimators, resampler, newton_options, lp_options)

    generators = replicate_generators(seed, n_resamples)
    logger.info("Bootstrap: %d resamples over %d setting(s), %d worker(s)",
                n_resamples, len(settings) * len(estimators), workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            replicates = list(executor.map(run_one, generators))
    else:
        replicates = [run_one(rng) for rng in generators]

    results: Dict[SettingKey, BootstrapResult] = {}
    for key, _ in settings:
        for est in estimators:
            outcomes = [rep[(key, est)] for rep in replicates]
            kept = [o for o in outcomes if not isinstance(o, str)]
            failures = n_resamples - len(kept)
            if failures:
                reasons = sorted({o for o in outcomes if isinstance(o, str)})
                logger.warning("Bootstrap (gamma=%.6g, %s): dropped %d of %d replicates; first reason: %s",
                               key, est, failures, n_resamples, reasons[0])
            if failures > MAX_FAILURE_RATE * n_resamples:
                raise BootstrapFailureError(
                    f"{failures} of {n_resamples} bootstrap replicates failed at gamma={key:.6g} "
                    f"({est}); more than {MAX_FAILURE_RATE:.0%} is not accepted",
                    failures=failures,
                    n_resamples=n_resamples,
                )
            lows = np.array([lo for lo, _ in kept])
            highs = np.array([hi for _, hi in kept])
            lower_ci, upper_ci = percentile_interval(lows, highs, level)
            results[(key, est)] = BootstrapResult(
                level=level,
                n_resamples=n_resamples,
                lower_ci=lower_ci,
                upper_ci=upper_ci,
                replicates_lower=lows,
                replicates_upper=highs,
                seed=seed,
                failures=failures,
            )
    return results


def bootstrap_sweep(
    src: SourceDataset,
    tgt: TargetDataset,
    spec: BasisSpec,
    log_gammas: Sequence[float],
    misspecification: float = 1.0,
    estimators: Sequence[str] = ESTIMATORS,
    n_resamples: int = 1000,
    level: float = 0.95,
    seed: int = 0,
    resampler: Resampler | None = None,
    workers: int = 1,
    newton_options: NewtonOptions | None = None,
    lp_options: LPOptions | None = None,
) -> Dict[SettingKey, BootstrapResult]:
    """Bootstrap a whole gamma grid with one resample and one refit per replicate.

    Returns:
        BootstrapResult keyed by (log gamma, estimator).

    Raises:
        BootstrapFailureError: more than 5% of replicates failed for some setting
    """
    settings = [(float(g), SensitivityParams.from_log(g, misspecification)) for g in log_gammas]
    return _run(src, tgt, spec, settings, estimators, n_resamples, level, seed,
                resampler, workers, newton_options, lp_options)


def bootstrap_bounds(
    src: SourceDataset,
    tgt: TargetDataset,
    spec: BasisSpec,
    sens: SensitivityParams,
    estimator: Estimator = "balanced",
    n_resamples: int = 1000,
    level: float = 0.95,
    seed: int = 0,
    resampler: Resampler | None = None,
    workers: int = 1,
    newton_options: NewtonOptions | None = None,
    lp_options: LPOptions | None = None,
) -> BootstrapResult:
    """Percentile bootstrap for a single (Gamma, M) setting and estimator."""
    key = sens.log_gamma
    results = _run(src, tgt, spec, [(key, sens)], (estimator,), n_resamples, level, seed,
                   resampler, workers, newton_options, lp_options)
    return results[(key, estimator)]
