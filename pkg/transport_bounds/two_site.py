"""Synthetic stand-in for a two-county welfare-to-work trial.

Both sites ran their own RCT, so each site carries covariates, treatment and
outcome. Transporting from one site to the other uses the first site as the
source and only the covariates of the second; the second site's own
difference in means is the reference the bounds are judged against.

Covariates follow the usual shape of such registries: age in years, four
binary indicators and quarterly earnings before random assignment, which are
zero for anyone not employed. Outcomes are mean quarterly earnings during
follow-up, in thousands of dollars. A hidden modifier (think schooling)
raises the effect and is shifted between the sites, so X alone cannot
explain the difference in effects.
"""

import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, Tuple

import numpy as np

from .csv_io import covariate_columns, write_source, write_target
from .domain_model import SourceDataset, TargetDataset, difference_in_means

logger = logging.getLogger(__name__)

COVARIATE_NAMES = ("age", "female", "married", "child_under_6", "employed_before", "prior_earnings")


@dataclass(frozen=True)
class SiteProfile:
    """Covariate law of one site."""
    name: str
    age_scale: float
    female: float
    married: float
    child_under_6: float
    employed_before: float
    earnings_scale: float


FIRST_SITE = SiteProfile("los_angeles", age_scale=4.5, female=0.88, married=0.15,
                         child_under_6=0.40, employed_before=0.20, earnings_scale=0.8)
SECOND_SITE = SiteProfile("riverside", age_scale=3.5, female=0.85, married=0.35,
                          child_under_6=0.45, employed_before=0.35, earnings_scale=1.0)


@dataclass(frozen=True)
class TwoSiteConfig:
    """Sizes, randomization and hidden shift of the two-site population.

    Args:
        n_first: units in the first site
        n_second: units in the second site
        propensity: randomization probability, the same in both sites
        hidden_shift: difference in mean of the hidden modifier, second minus first
        noise: outcome noise scale (thousands of dollars)
        seed: generator seed
    """
    n_first: int = 1500
    n_second: int = 1000
    propensity: float = 0.5
    hidden_shift: float = 0.5
    noise: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if self.n_first < 2 or self.n_second < 2:
            raise ValueError(f"Each site needs at least 2 units, got {self.n_first} and {self.n_second}")
        if not 0.0 < self.propensity < 1.0:
            raise ValueError(f"propensity must lie in (0, 1), got {self.propensity}")
        if not self.noise > 0:
            raise ValueError(f"noise must be > 0, got {self.noise}")

    @classmethod
    def from_total(cls, n_total: int, seed: int = 0) -> "TwoSiteConfig":
        """Split ``n_total`` 60/40 between the first and second site."""
        n_first = int(round(0.6 * n_total))
        return cls(n_first=n_first, n_second=n_total - n_first, seed=seed)

    def to_dict(self) -> Dict[str, object]:
        return {"setup": "sites", **asdict(self)}


@dataclass(frozen=True, eq=False)
class SiteData:
    """One site's RCT plus its hidden modifier."""
    name: str
    rct: SourceDataset
    hidden: np.ndarray

    @property
    def covariates(self) -> TargetDataset:
        return TargetDataset(x=self.rct.x)

    @property
    def difference_in_means(self) -> float:
        return difference_in_means(self.rct)


def _draw_site(rng: np.random.Generator, profile: SiteProfile, n: int, hidden_mean: float,
               config: TwoSiteConfig) -> SiteData:
    age = 18.0 + rng.gamma(4.0, profile.age_scale, size=n)
    female = rng.binomial(1, profile.female, size=n)
    married = rng.binomial(1, profile.married, size=n)
    child = rng.binomial(1, profile.child_under_6, size=n)
    employed = rng.binomial(1, profile.employed_before, size=n)
    earnings = employed * rng.gamma(2.0, profile.earnings_scale, size=n)
    x = np.column_stack([age, female, married, child, employed, earnings]).astype(float)

    hidden = rng.normal(hidden_mean, 1.0, size=n)
    w = rng.binomial(1, config.propensity, size=n)
    baseline = (0.4 + 0.02 * (age - 30.0) + 0.6 * earnings + 0.3 * employed
                - 0.15 * child + 0.1 * married + 0.2 * hidden)
    effect = 0.25 + 0.15 * hidden + 0.1 * employed
    y = np.maximum(baseline + w * effect + config.noise * rng.standard_normal(n), 0.0)
    return SiteData(name=profile.name, rct=SourceDataset(x=x, w=w, y=y, propensity=config.propensity),
                    hidden=hidden)


def generate_sites(config: TwoSiteConfig) -> Tuple[SiteData, SiteData]:
    """Draw both sites; the same config always gives the same data."""
    rng = np.random.Generator(np.random.PCG64(config.seed))
    first = _draw_site(rng, FIRST_SITE, config.n_first, -config.hidden_shift / 2, config)
    second = _draw_site(rng, SECOND_SITE, config.n_second, config.hidden_shift / 2, config)
    logger.debug("Generated sites %s (%d) and %s (%d) with seed %d",
                 first.name, config.n_first, second.name, config.n_second, config.seed)
    return first, second


def transport(origin: SiteData, destination: SiteData) -> Tuple[SourceDataset, TargetDataset, float]:
    """Source and target for carrying ``origin``'s trial over to ``destination``.

    Returns:
        (source, target, reference) where reference is the destination's own
        difference in means
    """
    return origin.rct, destination.covariates, destination.difference_in_means


def write_sites(sites: Tuple[SiteData, SiteData], out: str | Path) -> Dict[str, object]:
    """Write ``<site>.csv`` (x, w, y) and ``<site>_x.csv`` (x only) per site.

    Returns:
        The per-site summary that also goes into the manifest
    """
    out = Path(out)
    summary: Dict[str, object] = {"covariates": dict(zip(covariate_columns(len(COVARIATE_NAMES)), COVARIATE_NAMES))}
    for site in sites:
        write_source(site.rct, out / f"{site.name}.csv")
        write_target(site.covariates, out / f"{site.name}_x.csv")
        summary[site.name] = {
            "n_units": site.rct.n_units,
            "treated": site.rct.n_treated,
            "control": site.rct.n_control,
            "difference_in_means": site.difference_in_means,
            "hidden_mean": float(site.hidden.mean()),
        }
    logger.info("Wrote two-site data to %s", out)
    return summary
