"""Common CLI utilities for the transport-bounds tools."""

import argparse
import configparser
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Sequence, TypeVar

import numpy as np

from .basis import BasisSpec
from .errors import DataValidationError, SolverError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_SOLVER = 3

T = TypeVar("T")


class UsageError(ValueError):
    """Bad flag or config value."""


class CliParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with EXIT_USAGE instead of 2."""

    def error(self, message: str):  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def create_common_parser(description: str, tool_name: str) -> CliParser:
    """Create the argument parser shared by every tool.

    Args:
        description: Description of the tool
        tool_name: Name of the console script (e.g., 'transport-estimate')

    Returns:
        Parser with --config, --seed, --out and -v already declared
    """
    parser = CliParser(
        prog=tool_name,
        description=description,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=f"""
Examples:
  {tool_name} --config run.cfg
  {tool_name} --config run.cfg --seed 7 -v
Config files hold 'key = value' lines named after the long flags.
        """
    )
    parser.add_argument('--config', metavar='FILE', help='key = value file; explicit flags win over it')
    parser.add_argument('--seed', type=int, default=0, help='random seed (default: 0)')
    parser.add_argument('--out', default='results', help='output directory (default: results)')
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='-v for progress, -vv for solver details')
    return parser


def add_estimation_arguments(parser: argparse.ArgumentParser, default_grid: str) -> None:
    """Flags of the tools that compute bounds from a source/target pair."""
    parser.add_argument('--source', help='source RCT CSV (x1..xd, w, y)')
    parser.add_argument('--target', help='target location CSV (x1..xd)')
    parser.add_argument('--basis', default='identity', help='identity | intercept | poly:k (default: identity)')
    parser.add_argument('--gamma-grid', default=default_grid,
                        help=f'log gamma values: "0,0.1,0.2" or "start:stop:step" (default: {default_grid})')
    parser.add_argument('--m', type=float, default=1.0, help='misspecification multiplier M >= 1 (default: 1)')
    parser.add_argument('--bootstrap', type=int, default=0, help='bootstrap resamples, 0 disables (default: 0)')
    parser.add_argument('--level', type=float, default=0.95, help='confidence level (default: 0.95)')
    parser.add_argument('--propensity', type=float, default=0.5, help='randomization probability (default: 0.5)')
    parser.add_argument('--workers', type=int, default=1, help='threads for grid and bootstrap work (default: 1)')
    parser.add_argument('--reference',
                        help='RCT CSV from the target location (x1..xd, w, y), reported next to the bounds')


def parse_gamma_grid(text: str) -> List[float]:
    """Parse "0,0.1,0.2" or the inclusive range "start:stop:step" into sorted log gammas."""
    text = str(text).strip()
    try:
        parts = [float(part) for part in text.split(":" if ":" in text else ",") if part.strip()]
    except ValueError:
        raise UsageError(f"Cannot parse gamma grid '{text}'")
    if ":" in text:
        _check(len(parts) == 3, f"Gamma range '{text}' must be start:stop:step")
        start, stop, step = parts
        _check(step > 0, f"Gamma grid step must be positive, got {step}")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        values = [round(start + k * step, 12) for k in range(max(count, 0))]
    else:
        values = parts
    if not values:
        raise UsageError(f"Gamma grid '{text}' is empty")
    if min(values) < 0:
        raise UsageError(f"Gamma grid values are log gammas and must be >= 0, got {min(values)}")
    return sorted(set(values))


def read_config_file(path: str | Path) -> Dict[str, str]:
    """Read a flat 'key = value' file; '#' starts a comment, '-' and '_' are interchangeable."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file '{path}' not found")
    config = configparser.ConfigParser(inline_comment_prefixes=("#",))
    with open(path, encoding="utf-8") as f:
        config.read_string("[run]\n" + f.read(), source=str(path))
    return {key.replace("-", "_"): value for key, value in config["run"].items()}


def _config_value(action: argparse.Action, text: str):
    """Convert a config string for flags argparse would not convert itself."""
    if isinstance(action, argparse._CountAction):
        count = int(text)
        if count < 0:
            raise ValueError(f"{action.dest} must be >= 0, got {text}")
        return count
    if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
        return configparser.ConfigParser.BOOLEAN_STATES[text.strip().lower()]
    return text


def parse_args(parser: argparse.ArgumentParser, argv: Sequence[str] | None = None) -> argparse.Namespace:
    """Parse flags with config-file values as defaults (defaults < file < flags)."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument('--config')
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            values = read_config_file(known.config)
        except (FileNotFoundError, configparser.Error) as e:
            parser.error(str(e))
        actions = {action.dest: action for action in parser._actions}
        unknown = sorted(set(values) - set(actions) - {"config"})
        if unknown:
            parser.error(f"unknown config key(s) in {known.config}: {', '.join(unknown)}")
        try:
            values = {key: _config_value(actions[key], value) for key, value in values.items() if key in actions}
        except (KeyError, ValueError) as e:
            parser.error(f"{known.config}: {e}")
        parser.set_defaults(**values)
    return parser.parse_args(argv)


def _check(condition: bool, message: str) -> None:
    if not condition:
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    """Parameters of transport-estimate and transport-sweep."""
    source: Path
    target: Path
    basis: BasisSpec
    log_gammas: List[float]
    misspecification: float = 1.0
    bootstrap: int = 0
    level: float = 0.95
    seed: int = 0
    out: Path = Path("results")
    propensity: float = 0.5
    workers: int = 1
    reference: Path | None = None

    @classmethod
    def from_namespace(cls, args: argparse.Namespace) -> "RunConfig":
        _check(bool(args.source), "--source is required")
        _check(bool(args.target), "--target is required")
        try:
            basis = BasisSpec.parse(args.basis)
        except ValueError as e:
            raise UsageError(str(e))
        config = cls(
            source=Path(args.source),
            target=Path(args.target),
            basis=basis,
            log_gammas=parse_gamma_grid(args.gamma_grid),
            misspecification=float(args.m),
            bootstrap=int(args.bootstrap),
            level=float(args.level),
            seed=int(args.seed),
            out=Path(args.out),
            propensity=float(args.propensity),
            workers=int(args.workers),
            reference=Path(args.reference) if args.reference else None,
        )
        _check(config.misspecification >= 1.0, f"--m must be >= 1, got {config.misspecification}")
        _check(config.bootstrap >= 0, f"--bootstrap must be >= 0, got {config.bootstrap}")
        _check(0.0 < config.level < 1.0, f"--level must lie in (0, 1), got {config.level}")
        _check(0.0 < config.propensity < 1.0, f"--propensity must lie in (0, 1), got {config.propensity}")
        _check(config.workers >= 1, f"--workers must be >= 1, got {config.workers}")
        return config

    def describe(self) -> Dict[str, object]:
        """Settings as they go into the run manifest."""
        return {
            "source": str(self.source),
            "target": str(self.target),
            "basis": self.basis.to_string(),
            "gamma_grid": list(self.log_gammas),
            "misspecification": self.misspecification,
            "bootstrap": self.bootstrap,
            "level": self.level,
            "seed": self.seed,
            "propensity": self.propensity,
            "workers": self.workers,
            "reference": None if self.reference is None else str(self.reference),
        }


def run_command(command: Callable[[T], object], config_factory: Callable[[], T]) -> int:
    """Build the config, run the command and map failures to exit codes."""
    try:
        config = config_factory()
        command(config)
    except UsageError as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except (DataValidationError, FileNotFoundError) as e:
        logger.error("%s", e)
        return EXIT_DATA
    except SolverError as e:
        logger.error("%s", e)
        return EXIT_SOLVER
    except ValueError as e:
        logger.error("%s", e)
        return EXIT_USAGE
    return EXIT_OK
