"""Synthetic two-location populations with an unmeasured effect modifier.

Each unit draws covariates X (4-dim), a hidden modifier U whose sign is set by
a latent coin S, a randomized treatment W and a location L whose log-odds move
by +-log(Gamma*) with the sign of U. The effect tau = X1 + U + 4 therefore
differs between locations in a way X alone cannot explain, and the
conditional law of U shifts across locations by exactly Gamma*^{+-1}.

Two parameter points are predefined (:meth:`DgpConfig.setup_a`,
:meth:`DgpConfig.setup_b`); any scalar can be overridden for custom studies.
"""

import enum
import logging
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from typing import Any, Dict, List, Tuple

import numpy as np
import pandas as pd
from scipy.special import expit

from .domain_model import SourceDataset, TargetDataset, difference_in_means, hajek_difference
from .errors import EmptyLocationError

logger = logging.getLogger(__name__)

OUTCOME_BETA = (0.513, 0.045, 0.7, 0.646)
MARGINAL_DRAWS = 1_000_000
MARGINAL_SEED = 20240601


class Setup(str, enum.Enum):
    A = "A"
    B = "B"
    CUSTOM = "custom"


class CovariateLaw(str, enum.Enum):
    ARCSINE = "beta(0.5,0.5)^4"
    UNIFORM = "uniform[0,1]^4"


@dataclass(frozen=True)
class DgpConfig:
    """Parameters of the data-generating process.

    Args:
        setup: which predefined point this config came from
        n_total: units across both locations
        gamma_star: true shift bound Gamma* >= 1
        alpha0: location intercept
        mu: location slope on X (length 4)
        beta: outcome slope on X + 4 (length 4)
        sigma: outcome noise scale
        covariate_law: law of X
        seed: generator seed
    """
    setup: Setup = Setup.CUSTOM
    n_total: int = 1000
    gamma_star: float = 1.0
    alpha0: float = 0.0
    mu: Tuple[float, ...] = (0.0, 0.0, 0.0, 0.0)
    beta: Tuple[float, ...] = OUTCOME_BETA
    sigma: float = 1.0
    covariate_law: CovariateLaw = CovariateLaw.UNIFORM
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(float(v) for v in self.mu))
        object.__setattr__(self, "beta", tuple(float(v) for v in self.beta))
        object.__setattr__(self, "setup", Setup(self.setup))
        object.__setattr__(self, "covariate_law", CovariateLaw(self.covariate_law))
        if not self.gamma_star >= 1.0:
            raise ValueError(f"gamma_star must be >= 1, got {self.gamma_star}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if len(self.mu) != 4 or len(self.beta) != 4:
            raise ValueError("mu and beta must have length 4")
        if self.n_total < 1:
            raise ValueError(f"n_total must be >= 1, got {self.n_total}")

    @classmethod
    def setup_a(cls, n_total: int = 1000, seed: int = 0) -> "DgpConfig":
        """Arcsine covariates, strong location shift along X, gamma* = 0.2."""
        return cls(
            setup=Setup.A,
            n_total=n_total,
            gamma_star=float(np.exp(0.2)),
            alpha0=0.0,
            mu=(2.0, 2.0, -2.0, -2.0),
            sigma=3.0,
            covariate_law=CovariateLaw.ARCSINE,
            seed=seed,
        )

    @classmethod
    def setup_b(cls, n_total: int = 1000, seed: int = 0) -> "DgpConfig":
        """Uniform covariates, rarer target location, gamma* = 0.5."""
        return cls(
            setup=Setup.B,
            n_total=n_total,
            gamma_star=float(np.exp(0.5)),
            alpha0=-2.0,
            mu=(0.709, 0.438, 0.2, 0.767),
            sigma=0.5,
            covariate_law=CovariateLaw.UNIFORM,
            seed=seed,
        )

    @classmethod
    def for_setup(cls, setup: str, **overrides: Any) -> "DgpConfig":
        """Predefined point by name ("A", "B", "custom"), with scalar overrides."""
        name = Setup(setup.upper() if setup.lower() in ("a", "b") else setup.lower())
        base = {Setup.A: cls.setup_a, Setup.B: cls.setup_b, Setup.CUSTOM: cls}[name]()
        overrides = {k: v for k, v in overrides.items() if v is not None}
        if overrides and name is not Setup.CUSTOM:
            logger.info("Overriding setup %s parameters: %s", name.value, sorted(overrides))
        return replace(base, **overrides)

    @property
    def log_gamma_star(self) -> float:
        return float(np.log(self.gamma_star))

    @property
    def default_gamma_grid(self) -> List[float]:
        stop = 0.7 if self.setup is Setup.B else 0.5
        return [round(0.1 * k, 10) for k in range(int(round(stop / 0.1)) + 1)]

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["setup"] = self.setup.value
        data["covariate_law"] = self.covariate_law.value
        data["mu"] = list(self.mu)
        data["beta"] = list(self.beta)
        data["log_gamma_star"] = self.log_gamma_star
        return data


@dataclass(frozen=True, eq=False)
class SimulatedPopulation:
    """Every unit of both locations with its hidden quantities."""
    x: np.ndarray
    u: np.ndarray
    s: np.ndarray
    w: np.ndarray
    location: np.ndarray
    tau: np.ndarray
    y: np.ndarray
    epsilon: np.ndarray
    z_star: np.ndarray
    config: DgpConfig = field(default_factory=DgpConfig)

    @property
    def n_units(self) -> int:
        return len(self.u)

    @property
    def n_target(self) -> int:
        return int(self.location.sum())

    @property
    def n_source(self) -> int:
        return self.n_units - self.n_target


@dataclass(frozen=True, eq=False)
class OracleRecord:
    """Hidden per-unit quantities, kept apart from the observed datasets.

    ``source_index`` / ``target_index`` give each location's rows in
    population order; the per-unit arrays follow population order.
    """
    source_index: np.ndarray
    target_index: np.ndarray
    u: np.ndarray
    tau: np.ndarray
    z_star: np.ndarray
    log_density_ratio: np.ndarray
    target_ground_truth: float
    target_difference_in_means: float

    def to_frame(self) -> pd.DataFrame:
        """One row per unit: location, index within location, u, tau, z_star, log ratio."""
        frames = []
        for location, index in ((0, self.source_index), (1, self.target_index)):
            frames.append(pd.DataFrame({
                "location": location,
                "index": np.arange(len(index)),
                "u": self.u[index],
                "tau": self.tau[index],
                "z_star": self.z_star[index],
                "log_density_ratio": self.log_density_ratio[index],
            }))
        return pd.concat(frames, ignore_index=True)


def selection_probability(a: np.ndarray, gamma_star: float) -> np.ndarray:
    """P(S = 1 | X) as a function of the location index a = alpha0 + x'mu.

    The defining fraction (1 - 1/G + (G - 1) e^a) / (G - 1/G + (G - 1/G) e^a)
    reduces to (1 + (G - 1) expit(a)) / (G + 1), which stays in [0, 1] for any
    G > 1. At G = 1 the fraction is 0/0; that case returns expit(a).
    """
    p = expit(np.asarray(a, dtype=float))
    if gamma_star == 1.0:
        return p
    return (1.0 + (gamma_star - 1.0) * p) / (gamma_star + 1.0)


def draw_covariates(rng: np.random.Generator, law: CovariateLaw, n: int) -> np.ndarray:
    if law is CovariateLaw.ARCSINE:
        return rng.beta(0.5, 0.5, size=(n, 4))
    return rng.uniform(0.0, 1.0, size=(n, 4))


@lru_cache(maxsize=32)
def _location_marginal(law: CovariateLaw, alpha0: float, mu: Tuple[float, ...], draws: int) -> float:
    rng = np.random.Generator(np.random.PCG64(MARGINAL_SEED))
    x = draw_covariates(rng, law, draws)
    return float(np.mean(expit(alpha0 + x @ np.asarray(mu))))


def location_marginal(config: DgpConfig, draws: int = MARGINAL_DRAWS) -> float:
    """P(L = 1), by Monte-Carlo over X; cached per covariate law and location law.

    Marginalizing U out of the location law leaves P(L = 1 | X) = expit(a)
    exactly, so Gamma* does not enter.
    """
    return _location_marginal(config.covariate_law, config.alpha0, config.mu, draws)


def log_density_ratio(x: np.ndarray, config: DgpConfig) -> np.ndarray:
    """True g(x) = log dP1(x)/dP0(x) = alpha0 + x'mu + log(P(L=0) / P(L=1))."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    pi1 = location_marginal(config)
    return config.alpha0 + x @ np.asarray(config.mu) + np.log((1.0 - pi1) / pi1)


def generate(config: DgpConfig) -> SimulatedPopulation:
    """Draw ``config.n_total`` units; the same config always gives the same population."""
    rng = np.random.Generator(np.random.PCG64(config.seed))
    n = config.n_total
    x = draw_covariates(rng, config.covariate_law, n)
    a = config.alpha0 + x @ np.asarray(config.mu)
    s = (rng.random(n) < selection_probability(a, config.gamma_star)).astype(np.int64)
    u_prime = rng.normal(0.0, 1.0 + 0.5 * np.sin(2.5 * x[:, 0]))
    u = (2 * s - 1) * np.abs(u_prime)
    w = rng.binomial(1, 0.5, size=n).astype(np.int64)
    sign = np.where(u >= 0, 1.0, -1.0)
    location = (rng.random(n) < expit(a + config.log_gamma_star * sign)).astype(np.int64)
    epsilon = rng.standard_normal(n)

    tau = x[:, 0] + u + 4.0
    y = (x + 4.0) @ np.asarray(config.beta) + u + w * tau + config.sigma * epsilon
    z_star = config.gamma_star ** sign
    logger.debug("Generated %d units (%d in target) for setup %s seed %d",
                 n, int(location.sum()), config.setup.value, config.seed)
    return SimulatedPopulation(
        x=x, u=u, s=s, w=w, location=location, tau=tau, y=y, epsilon=epsilon, z_star=z_star, config=config
    )


def split(pop: SimulatedPopulation) -> Tuple[SourceDataset, TargetDataset, OracleRecord]:
    """Separate the observed source and target data from the oracle side.

    Raises:
        EmptyLocationError: one location drew no units
    """
    source_index = np.flatnonzero(pop.location == 0)
    target_index = np.flatnonzero(pop.location == 1)
    for name, index in (("source", source_index), ("target", target_index)):
        if len(index) == 0:
            raise EmptyLocationError(
                f"The {name} location drew no units out of {pop.n_units}; "
                "increase n_total or pick another seed"
            )

    src = SourceDataset(x=pop.x[source_index], w=pop.w[source_index], y=pop.y[source_index], propensity=0.5)
    tgt = TargetDataset(x=pop.x[target_index])
    target_units = SourceDataset(x=pop.x[target_index], w=pop.w[target_index], y=pop.y[target_index])
    try:
        target_dim = difference_in_means(target_units)
    except ValueError:
        target_dim = float("nan")
    oracle = OracleRecord(
        source_index=source_index,
        target_index=target_index,
        u=pop.u,
        tau=pop.tau,
        z_star=pop.z_star,
        log_density_ratio=log_density_ratio(pop.x, pop.config),
        target_ground_truth=float(pop.tau[target_index].mean()),
        target_difference_in_means=target_dim,
    )
    return src, tgt, oracle


def oracle_weights(pop: SimulatedPopulation) -> np.ndarray:
    """True transport weights z*_i * r(X_i) for the source units."""
    source = pop.location == 0
    return pop.z_star[source] * np.exp(log_density_ratio(pop.x[source], pop.config))


def oracle_ipw(pop: SimulatedPopulation, weights: np.ndarray | None = None) -> float:
    """Hajek estimate of the target ATE from source units with the true weights.

    Args:
        pop: simulated population
        weights: per-source-unit weights to use instead of :func:`oracle_weights`
    """
    source = pop.location == 0
    weights = oracle_weights(pop) if weights is None else np.asarray(weights, dtype=float)
    return hajek_difference(pop.w[source], pop.y[source], weights)
