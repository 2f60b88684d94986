"""Grid evaluation and result tables shared by the command-line tools."""

import json
import logging
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, List, Mapping, Sequence

import numpy as np
import pandas as pd
import scipy

from .basis import BasisSpec
from .bootstrap import BootstrapResult, SettingKey, percentile_interval
from .bounds_balanced import solve_balanced
from .bounds_unbalanced import solve_unbalanced
from .density_ratio import BalanceRow, DensityRatioFit, NewtonOptions, balance_report, fit, weights
from .csv_io import read_source
from .domain_model import BoundsResult, SensitivityParams, SourceDataset, TargetDataset, difference_in_means
from .errors import DataValidationError
from .simplex import LPOptions

logger = logging.getLogger(__name__)

SIDES = ("lower", "upper")


@dataclass(frozen=True, eq=False)
class GridPoint:
    log_gamma: float
    sens: SensitivityParams
    unbalanced: BoundsResult
    balanced: BoundsResult

    def bounds(self, estimator: str) -> BoundsResult:
        return self.balanced if estimator == "balanced" else self.unbalanced


@dataclass(frozen=True, eq=False)
class GridResult:
    """One density-ratio fit and both estimators at every grid point."""
    fit: DensityRatioFit
    spec: BasisSpec
    points: List[GridPoint]
    balance: List[BalanceRow]

    @property
    def log_gammas(self) -> List[float]:
        return [p.log_gamma for p in self.points]


def validate_grid(log_gammas: Sequence[float]) -> List[float]:
    grid = sorted({float(g) for g in log_gammas})
    if not grid:
        raise ValueError("The gamma grid is empty")
    if grid[0] < 0 or not np.all(np.isfinite(grid)):
        raise ValueError(f"Gamma grid values must be finite and >= 0 (log scale), got {grid}")
    return grid


def compute_grid(
    src: SourceDataset,
    tgt: TargetDataset,
    spec: BasisSpec,
    log_gammas: Sequence[float],
    misspecification: float = 1.0,
    newton_options: NewtonOptions | None = None,
    lp_options: LPOptions | None = None,
    workers: int = 1,
) -> GridResult:
    """Fit once, then compute unbalanced and balanced bounds at every log gamma.

    Raises:
        DataValidationError: the pair fails validation
        SolverError: the fit diverges or does not converge, or a program is infeasible
    """
    grid = validate_grid(log_gammas)
    fitted = fit(src, tgt, spec, newton_options)
    rhat = weights(fitted, src, spec)

    def evaluate(log_gamma: float) -> GridPoint:
        sens = SensitivityParams.from_log(log_gamma, misspecification)
        return GridPoint(
            log_gamma=log_gamma,
            sens=sens,
            unbalanced=solve_unbalanced(src, rhat, sens),
            balanced=solve_balanced(src, tgt, fitted, spec, sens, lp_options),
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            points = list(executor.map(evaluate, grid))
    else:
        points = [evaluate(g) for g in grid]
    for point in points:
        logger.info("gamma=%.4g  unbalanced [%.6g, %.6g]  balanced [%.6g, %.6g] (%s)",
                    point.log_gamma, point.unbalanced.lower, point.unbalanced.upper,
                    point.balanced.lower, point.balanced.upper, point.balanced.status.value)
    return GridResult(fit=fitted, spec=spec, points=points, balance=balance_report(fitted, src, tgt, spec))


@dataclass(frozen=True)
class SweepRow:
    gamma: float
    estimator: str
    side: str
    value: float
    ci_lo: float | None = None
    ci_hi: float | None = None
    status: str = "optimal"


def side_interval(result: BootstrapResult, side: str) -> tuple[float, float]:
    """Two-sided percentile interval of one endpoint's replicates."""
    replicates = result.replicates_lower if side == "lower" else result.replicates_upper
    return percentile_interval(replicates, replicates, result.level)


def sweep_rows(grid: GridResult, bootstrap: Mapping[SettingKey, BootstrapResult] | None = None) -> List[SweepRow]:
    """Long-format rows sorted by gamma, estimator name and side."""
    rows: List[SweepRow] = []
    for point in grid.points:
        for estimator in ("balanced", "unbalanced"):
            bounds = point.bounds(estimator)
            for side in SIDES:
                ci_lo = ci_hi = None
                if bootstrap is not None:
                    ci_lo, ci_hi = side_interval(bootstrap[(point.log_gamma, estimator)], side)
                rows.append(SweepRow(
                    gamma=point.log_gamma,
                    estimator=estimator,
                    side=side,
                    value=bounds.lower if side == "lower" else bounds.upper,
                    ci_lo=ci_lo,
                    ci_hi=ci_hi,
                    status=bounds.status.value,
                ))
    return sorted(rows, key=lambda r: (r.gamma, r.estimator, r.side))


def sweep_frame(rows: Sequence[SweepRow], with_ci: bool) -> pd.DataFrame:
    columns = ["gamma", "estimator", "side", "value"] + (["ci_lo", "ci_hi"] if with_ci else []) + ["status"]
    return pd.DataFrame([asdict(r) for r in rows], columns=columns)


def estimates_frame(grid: GridResult, bootstrap: Mapping[SettingKey, BootstrapResult] | None = None,
                    reference: float | None = None) -> pd.DataFrame:
    """Wide table: one row per gamma, with the reference difference in means when one is given."""
    records = []
    for point in grid.points:
        record: Dict[str, Any] = {"gamma": point.log_gamma}
        for estimator in ("unbalanced", "balanced"):
            bounds = point.bounds(estimator)
            record[f"{estimator}_lower"] = bounds.lower
            record[f"{estimator}_upper"] = bounds.upper
        if reference is not None:
            record["target_difference_in_means"] = reference
        if bootstrap is not None:
            for estimator in ("unbalanced", "balanced"):
                result = bootstrap[(point.log_gamma, estimator)]
                record[f"{estimator}_lower_ci"] = result.lower_ci
                record[f"{estimator}_upper_ci"] = result.upper_ci
        record["balanced_status"] = point.balanced.status.value
        record["balanced_feasibility_tol"] = point.balanced.feasibility_tol
        records.append(record)
    return pd.DataFrame.from_records(records)


def reference_summary(path: str | Path, tgt: TargetDataset, propensity: float = 0.5) -> Dict[str, Any]:
    """Difference in means of an RCT run in the target location, for comparison with the bounds.

    Raises:
        DataValidationError: the reference covariates do not match the target's dimension
    """
    reference = read_source(path, propensity)
    if reference.dim != tgt.dim:
        raise DataValidationError(
            f"Reference file '{path}' has {reference.dim} covariates, the target has {tgt.dim}"
        )
    value = difference_in_means(reference)
    logger.info("Target difference in means %.6g from %d reference units", value, reference.n_units)
    return {"path": str(path), "n_units": reference.n_units, "target_difference_in_means": value}


def library_versions() -> Dict[str, str]:
    try:
        package = metadata.version("transport-bounds")
    except metadata.PackageNotFoundError:
        from . import __version__ as package
    return {
        "transport_bounds": package,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
    }


def build_manifest(tool: str, settings: Mapping[str, Any], **sections: Any) -> Dict[str, Any]:
    """Run manifest: tool name, run settings, extra sections and library versions."""
    manifest: Dict[str, Any] = {"tool": tool, "settings": dict(settings)}
    manifest.update(sections)
    manifest["versions"] = library_versions()
    return manifest


def solver_settings(newton: NewtonOptions, lp: LPOptions) -> Dict[str, Any]:
    return {"newton": asdict(newton), "lp": asdict(lp)}


def write_manifest(manifest: Mapping[str, Any], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True, default=str)
        f.write("\n")
    logger.info("Wrote %s", path)
    return path
