"""transport-sweep: long-format bounds table over a gamma grid, ready for plotting."""

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
    build_manifest, compute_grid, reference_summary, solver_settings, sweep_frame, sweep_rows, write_manifest,
)

logger = logging.getLogger(__name__)


def cmd_sweep(config: RunConfig) -> Path:
    """Write sweep.csv (gamma, estimator, side, value[, ci_lo, ci_hi], status),
    balance.csv and manifest.json into ``config.out``."""
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
        failures = {f"{g:g}/{est}": r.failures for (g, est), r in bootstrap.items()}
    else:
        failures = {}

    out = config.out
    rows = sweep_rows(grid, bootstrap)
    write_frame(sweep_frame(rows, with_ci=bootstrap is not None), out / "sweep.csv")
    write_frame(balance_frame(grid.balance), out / "balance.csv")
    manifest = build_manifest(
        "transport-sweep",
        config.describe(),
        solver=solver_settings(newton, lp),
        counts={"source": src.n_units, "treated": src.n_treated, "control": src.n_control,
                "target": tgt.n_units},
        bootstrap_failures=failures,
        **({} if reference is None else {"reference": reference}),
    )
    write_manifest(manifest, out / "manifest.json")
    return out


def build_parser():
    parser = create_common_parser(
        "Sweep the sensitivity parameter and tabulate both estimators' bounds",
        "transport-sweep",
    )
    add_estimation_arguments(parser, default_grid="0:0.5:0.1")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point for the CLI script."""
    args = parse_args(build_parser(), argv)
    get_logger(verbose=args.verbose)
    return run_command(cmd_sweep, lambda: RunConfig.from_namespace(args))


if __name__ == "__main__":
    sys.exit(main())
