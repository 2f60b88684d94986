"""transport-estimate: bounds on the target-location ATE for a grid of gamma values."""

import logging
import sys
from pathlib import Path
from typing import Sequence

from .bootstrap import bootstrap_sweep
from .cli_utils import RunConfig, add_estimation_arguments, create_common_parser, parse_args, run_command
from .csv_io import read_source, read_target, write_frame
from .density_ratio import NewtonOptions, balance_frame
from .logger import get_logger
from .simplex import LPOptions
from .workflow import (
    build_manifest, compute_grid, estimates_frame, reference_summary, solver_settings, write_manifest,
)

logger = logging.getLogger(__name__)


def cmd_estimate(config: RunConfig) -> Path:
    """Write estimates.csv, balance.csv and manifest.json into ``config.out``.

    Returns:
        The output directory
    """
    newton, lp = NewtonOptions(), LPOptions()
    src = read_source(config.source, config.propensity)
    tgt = read_target(config.target)
    reference = None if config.reference is None else reference_summary(config.reference, tgt, config.propensity)
    grid = compute_grid(src, tgt, config.basis, config.log_gammas, config.misspecification,
                        newton, lp, config.workers)
    bootstrap = None
    if config.bootstrap > 0:
        bootstrap = bootstrap_sweep(
            src, tgt, config.basis, grid.log_gammas, config.misspecification,
            n_resamples=config.bootstrap, level=config.level, seed=config.seed,
            workers=config.workers, newton_options=newton, lp_options=lp,
        )

    out = config.out
    reported = None if reference is None else reference["target_difference_in_means"]
    write_frame(estimates_frame(grid, bootstrap, reported), out / "estimates.csv")
    write_frame(balance_frame(grid.balance), out / "balance.csv")
    manifest = build_manifest(
        "transport-estimate",
        config.describe(),
        solver=solver_settings(newton, lp),
        counts={"source": src.n_units, "treated": src.n_treated, "control": src.n_control,
                "target": tgt.n_units},
        fit={"iterations": list(grid.fit.iterations), "converged": grid.fit.converged,
             "feature_max_abs": grid.fit.feature_max_abs},
        statuses=[p.balanced.status.value for p in grid.points],
        **({} if reference is None else {"reference": reference}),
    )
    write_manifest(manifest, out / "manifest.json")
    return out


def build_parser():
    parser = create_common_parser(
        "Bound the ATE transported from a source RCT to a target location",
        "transport-estimate",
    )
    add_estimation_arguments(parser, default_grid="0")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point for the CLI script."""
    args = parse_args(build_parser(), argv)
    get_logger(verbose=args.verbose)
    return run_command(cmd_estimate, lambda: RunConfig.from_namespace(args))


if __name__ == "__main__":
    sys.exit(main())
