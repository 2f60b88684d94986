"""Transport Bounds

Sensitivity bounds on the average treatment effect carried from a source
randomized trial to a target location, with and without covariate balancing.
"""
__version__ = "0.1.0"

# Type definitions
from .domain_model import (
    SourceUnit,
    TargetUnit,
    SourceDataset,
    TargetDataset,
    SensitivityParams,
    SolverStatus,
    BoundsResult,
    Violation,
    validate_pair,
    difference_in_means,
)
from .basis            import BasisSpec, expand, expand_dataset
from .errors import (
    TransportBoundsError,
    DataValidationError,
    SchemaError,
    EmptyLocationError,
    BasisError,
    SolverError,
    NonConvergenceError,
    SeparationError,
    LPInfeasibleError,
    BootstrapFailureError,
)

# Estimation API
from .density_ratio     import NewtonOptions, DensityRatioFit, fit, weights, balance_report
from .bounds_unbalanced import solve_unbalanced
from .bounds_balanced   import ArmLP, build_arm_lp, solve_lp, solve_balanced
from .simplex           import LPOptions, bounded_simplex
from .misspecification  import required_multiplier, misspecified_sensitivity
from .bootstrap         import BootstrapResult, bootstrap_bounds, bootstrap_sweep, percentile_interval
from .simulation        import DgpConfig, SimulatedPopulation, generate, split, oracle_ipw
from .two_site          import TwoSiteConfig, SiteData, generate_sites, transport
from .workflow          import compute_grid, sweep_rows

# TUI Application
from .view.App import ResultsBrowserApp

__all__ = [
    # Type definitions
    "SourceUnit",
    "TargetUnit",
    "SourceDataset",
    "TargetDataset",
    "SensitivityParams",
    "SolverStatus",
    "BoundsResult",
    "Violation",
    "BasisSpec",

    # Errors
    "TransportBoundsError",
    "DataValidationError",
    "SchemaError",
    "EmptyLocationError",
    "BasisError",
    "SolverError",
    "NonConvergenceError",
    "SeparationError",
    "LPInfeasibleError",
    "BootstrapFailureError",

    # Estimation API
    "validate_pair",
    "difference_in_means",
    "expand",
    "expand_dataset",
    "NewtonOptions",
    "DensityRatioFit",
    "fit",
    "weights",
    "balance_report",
    "solve_unbalanced",
    "ArmLP",
    "build_arm_lp",
    "solve_lp",
    "solve_balanced",
    "LPOptions",
    "bounded_simplex",
    "required_multiplier",
    "misspecified_sensitivity",
    "BootstrapResult",
    "bootstrap_bounds",
    "bootstrap_sweep",
    "percentile_interval",
    "DgpConfig",
    "SimulatedPopulation",
    "generate",
    "split",
    "oracle_ipw",
    "TwoSiteConfig",
    "SiteData",
    "generate_sites",
    "transport",
    "compute_grid",
    "sweep_rows",

    # TUI Application
    "ResultsBrowserApp",
]
