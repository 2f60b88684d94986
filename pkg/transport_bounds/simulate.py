"""transport-simulate: write a simulated source/target pair plus the oracle side."""

import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .cli_utils import UsageError, create_common_parser, parse_args, run_command
from .csv_io import write_frame, write_source, write_target
from .logger import get_logger
from .simulation import MARGINAL_DRAWS, MARGINAL_SEED, CovariateLaw, DgpConfig, generate, oracle_ipw, split
from .two_site import TwoSiteConfig, generate_sites, write_sites
from .workflow import build_manifest, write_manifest

logger = logging.getLogger(__name__)

LAWS = {"beta": CovariateLaw.ARCSINE, "uniform": CovariateLaw.UNIFORM}
DGP_ONLY = ("log_gamma_star", "alpha0", "mu", "beta", "sigma", "covariate_law")


@dataclass(frozen=True)
class SimulateConfig:
    dgp: DgpConfig | None
    out: Path = Path("simulated")
    sites: TwoSiteConfig | None = None

    @classmethod
    def from_namespace(cls, args) -> "SimulateConfig":
        if str(args.setup).lower() == "sites":
            given = [name for name in DGP_ONLY if getattr(args, name) is not None]
            if given:
                flags = ", ".join("--" + name.replace("_", "-") for name in given)
                raise UsageError(f"--setup sites does not take {flags}")
            n_total = 2500 if args.n_total is None else args.n_total
            try:
                sites = TwoSiteConfig.from_total(n_total, seed=args.seed)
            except ValueError as e:
                raise UsageError(str(e))
            return cls(dgp=None, out=Path(args.out), sites=sites)
        overrides = {
            "n_total": args.n_total,
            "alpha0": args.alpha0,
            "sigma": args.sigma,
            "seed": args.seed,
        }
        if args.log_gamma_star is not None:
            if float(args.log_gamma_star) < 0:
                raise UsageError(f"--log-gamma-star must be >= 0, got {args.log_gamma_star}")
            overrides["gamma_star"] = float(np.exp(float(args.log_gamma_star)))
        for name in ("mu", "beta"):
            text = getattr(args, name)
            if text is not None:
                try:
                    overrides[name] = tuple(float(v) for v in str(text).split(","))
                except ValueError:
                    raise UsageError(f"--{name} must be a comma-separated list of numbers")
        if args.covariate_law is not None:
            overrides["covariate_law"] = LAWS[args.covariate_law]
        try:
            dgp = DgpConfig.for_setup(args.setup, **overrides)
        except ValueError as e:
            raise UsageError(str(e))
        return cls(dgp=dgp, out=Path(args.out))


def cmd_simulate(config: SimulateConfig) -> Path:
    """Write source.csv, target.csv, oracle.csv and manifest.json into ``config.out``.

    With a two-site config, writes each site's RCT and covariate files instead.

    Raises:
        EmptyLocationError: one location drew no units
    """
    if config.sites is not None:
        return _simulate_sites(config.sites, config.out)
    population = generate(config.dgp)
    src, tgt, oracle = split(population)
    out = config.out
    write_source(src, out / "source.csv")
    write_target(tgt, out / "target.csv")
    write_frame(oracle.to_frame(), out / "oracle.csv")
    manifest = build_manifest(
        "transport-simulate",
        config.dgp.to_dict(),
        counts={"source": src.n_units, "treated": src.n_treated, "control": src.n_control,
                "target": tgt.n_units},
        oracle={
            "target_ground_truth": oracle.target_ground_truth,
            "target_difference_in_means": oracle.target_difference_in_means,
            "oracle_ipw": oracle_ipw(population),
            "marginal_draws": MARGINAL_DRAWS,
            "marginal_seed": MARGINAL_SEED,
        },
        default_gamma_grid=config.dgp.default_gamma_grid,
    )
    write_manifest(manifest, out / "manifest.json")
    logger.info("Target ground truth %.6g over %d target units", oracle.target_ground_truth, tgt.n_units)
    return out


def _simulate_sites(sites: TwoSiteConfig, out: Path) -> Path:
    summary = write_sites(generate_sites(sites), out)
    write_manifest(build_manifest("transport-simulate", sites.to_dict(), sites=summary), out / "manifest.json")
    return out


def build_parser():
    parser = create_common_parser(
        "Simulate a two-location population with an unmeasured effect modifier",
        "transport-simulate",
    )
    parser.set_defaults(out="simulated")
    parser.add_argument('--setup', default='A', choices=['A', 'B', 'custom', 'sites', 'a', 'b'],
                        help='predefined parameter point, or two RCT sites (default: A)')
    parser.add_argument('--n-total', type=int, default=None, help='units across both locations (default: 1000)')
    parser.add_argument('--log-gamma-star', type=float, default=None, help='override log Gamma*')
    parser.add_argument('--alpha0', type=float, default=None, help='override the location intercept')
    parser.add_argument('--mu', default=None, help='override mu, e.g. "2,2,-2,-2"')
    parser.add_argument('--beta', default=None, help='override the outcome slopes')
    parser.add_argument('--sigma', type=float, default=None, help='override the outcome noise scale')
    parser.add_argument('--covariate-law', choices=sorted(LAWS), default=None, help='override the covariate law')
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point for the CLI script."""
    args = parse_args(build_parser(), argv)
    get_logger(verbose=args.verbose)
    return run_command(cmd_simulate, lambda: SimulateConfig.from_namespace(args))


if __name__ == "__main__":
    sys.exit(main())
