"""
Bayesian posterior estimation
Grid sampling for one-parameter models, annealed importance sampling for
the rest, weighted marginal CDFs, credible intervals and diagnostics
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import logsumexp
from scipy.stats import gaussian_kde

from estimation import Dataset, log_likelihood, work_item_seed
from models.model_interface import BehavioralModel, ParameterError
from priors import PriorSpec, ProposalSpec
from qre import QreConvergenceError

logger = logging.getLogger("bgt.posterior")

LOW_ESS_FRACTION = 0.01


class WeightCollapseError(RuntimeError):
    """Every importance weight underflowed; more samples or a gentler schedule are needed"""


@dataclass(frozen=True, eq=False)
class AnnealingSchedule:
    gammas: np.ndarray
    metropolis_updates: int = 5

    def __post_init__(self):
        gammas = np.array(self.gammas, dtype=float)
        if gammas.ndim != 1 or gammas.size < 2:
            raise ValueError("an annealing schedule needs at least two temperatures")
        if np.any(np.diff(gammas) < 0) or gammas[0] < 0 or gammas[-1] != 1.0:
            raise ValueError("temperatures must be non-decreasing in [0, 1] and end at exactly 1")
        if self.metropolis_updates < 1:
            raise ValueError("need at least one Metropolis update per distribution")
        gammas.setflags(write=False)
        object.__setattr__(self, "gammas", gammas)

    @classmethod
    def default(cls, uniform_count: int = 40, geometric_count: int = 160, metropolis_updates: int = 5) -> "AnnealingSchedule":
        """uniform_count points on [0, 0.01), then geometric_count points from 0.01 to 1"""
        head = np.linspace(0.0, 0.01, uniform_count, endpoint=False)
        tail = np.geomspace(0.01, 1.0, geometric_count)
        tail[-1] = 1.0
        return cls(np.concatenate([head, tail]), metropolis_updates)

    def __len__(self) -> int:
        return self.gammas.size


@dataclass(frozen=True, eq=False)
class PosteriorSampleSet:
    names: Tuple[str, ...]
    samples: np.ndarray
    log_weights: np.ndarray
    schedule: Optional[AnnealingSchedule] = None
    seed: Optional[int] = None
    acceptance_rate: float = float("nan")
    method: str = "ais"

    def __post_init__(self):
        samples = np.atleast_2d(np.array(self.samples, dtype=float))
        log_weights = np.array(self.log_weights, dtype=float).reshape(-1)
        if samples.shape != (log_weights.size, len(self.names)):
            raise ValueError(f"samples of shape {samples.shape} do not match {log_weights.size} weights")
        if np.any(np.isnan(log_weights)) or np.any(log_weights == np.inf) or not np.any(np.isfinite(log_weights)):
            raise WeightCollapseError("no sample carries a positive finite weight")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "log_weights", log_weights)

    @classmethod
    def from_grid(cls, name: str, values: Sequence[float], probabilities: Sequence[float]) -> "PosteriorSampleSet":
        probabilities = np.asarray(probabilities, dtype=float)
        with np.errstate(divide="ignore"):
            log_weights = np.log(probabilities)
        return cls((name,), np.asarray(values, dtype=float).reshape(-1, 1), log_weights, method="grid")

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights - logsumexp(self.log_weights))

    @property
    def ess(self) -> float:
        """Kish effective sample size"""
        return float(1.0 / np.sum(self.weights ** 2))

    def column(self, parameter: str) -> np.ndarray:
        try:
            return self.samples[:, self.names.index(parameter)]
        except ValueError:
            raise ParameterError(f"unknown parameter {parameter!r}; have {list(self.names)}") from None

    def to_frame(self) -> pd.DataFrame:
        """Long table of (sample, parameter, value, weight)"""
        weights = self.weights
        rows = [
            {"sample": i, "parameter": name, "value": self.samples[i, j], "weight": weights[i]}
            for i in range(self.samples.shape[0])
            for j, name in enumerate(self.names)
        ]
        return pd.DataFrame(rows, columns=["sample", "parameter", "value", "weight"])


def grid_points(lo: float, hi: float, step: float) -> np.ndarray:
    if step <= 0:
        raise ValueError(f"grid step must be positive, got {step}")
    if lo > hi:
        raise ValueError(f"empty grid: lo={lo} exceeds hi={hi}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


def _single_parameter(model: BehavioralModel) -> str:
    if len(model.space) != 1:
        raise ParameterError(f"grid sampling needs a one-parameter model; {model.name} has {len(model.space)}")
    return model.space.names[0]


def grid_log_likelihoods(model: BehavioralModel, dataset: Dataset, values: np.ndarray) -> np.ndarray:
    _single_parameter(model)
    return np.array([log_likelihood(model, model.vector([v]), dataset) for v in values])


def grid_posterior_1d(model: BehavioralModel, dataset: Dataset, lo: float, hi: float, step: float) -> List[Tuple[float, float]]:
    """Flat prior on the grid, so the posterior is the normalized likelihood"""
    values = grid_points(lo, hi, step)
    log_post = grid_log_likelihoods(model, dataset, values)
    probabilities = np.exp(log_post - logsumexp(log_post))
    return list(zip(values.tolist(), probabilities.tolist()))


def update_grid_log_posterior(log_posterior: np.ndarray, model: BehavioralModel, values: np.ndarray, batch: Dataset) -> np.ndarray:
    """One Bayesian update of a normalized grid log-posterior with a batch of observations"""
    updated = np.asarray(log_posterior, dtype=float) + grid_log_likelihoods(model, batch, values)
    return updated - logsumexp(updated)


def _chain(model: BehavioralModel, dataset: Dataset, schedule: AnnealingSchedule,
           prior: PriorSpec, proposal: ProposalSpec, seed: int, index: int) -> Tuple[np.ndarray, float, int, int]:
    space = model.space
    rng = np.random.default_rng(work_item_seed(seed, index))

    def loglik(values: np.ndarray) -> float:
        try:
            return log_likelihood(model, space.vector(values), dataset)
        except (ParameterError, QreConvergenceError):
            return -np.inf

    theta = prior.sample(space, rng)
    current_ll = loglik(theta)
    current_prior = prior.log_density(space, theta)
    log_weight = 0.0
    accepted = proposed = 0
    scale = 1.0
    gammas = schedule.gammas
    for j in range(1, gammas.size):
        if gammas[j] > gammas[j - 1]:
            log_weight += (gammas[j] - gammas[j - 1]) * current_ll
        # the scale depends only on earlier temperatures
        kernel = proposal.scaled(scale)
        batch_accepted = 0
        for _ in range(schedule.metropolis_updates):
            candidate = kernel.propose(space, theta, rng)
            proposed += 1
            candidate_prior = prior.log_density(space, candidate)
            if not np.isfinite(candidate_prior):
                continue
            candidate_ll = loglik(candidate)
            if not np.isfinite(candidate_ll):
                continue
            log_accept = (
                gammas[j] * (candidate_ll - current_ll)
                + candidate_prior - current_prior
                + kernel.log_density(space, theta, candidate)
                - kernel.log_density(space, candidate, theta)
            )
            if np.log(rng.uniform()) < log_accept:
                theta, current_ll, current_prior = candidate, candidate_ll, candidate_prior
                batch_accepted += 1
        accepted += batch_accepted
        scale = proposal.adapt(scale, batch_accepted / schedule.metropolis_updates)
    return theta, log_weight, accepted, proposed


def ais_posterior(model: BehavioralModel, dataset: Dataset, n_samples: int,
                  schedule: Optional[AnnealingSchedule] = None, prior: Optional[PriorSpec] = None,
                  proposal: Optional[ProposalSpec] = None, seed: int = 0,
                  max_workers: int = 1) -> PosteriorSampleSet:
    """Independent annealed importance sampling chains from the prior to the posterior"""
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    if len(model.space) == 0:
        raise ParameterError(f"{model.name} has no parameters to sample")
    schedule = schedule or AnnealingSchedule.default()
    prior = prior or PriorSpec()
    proposal = proposal or ProposalSpec()

    def run(index: int):
        return _chain(model, dataset, schedule, prior, proposal, seed, index)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            chains = list(pool.map(run, range(n_samples)))
    else:
        chains = [run(i) for i in range(n_samples)]

    samples = np.array([c[0] for c in chains])
    log_weights = np.array([c[1] for c in chains])
    accepted = sum(c[2] for c in chains)
    proposed = sum(c[3] for c in chains)
    if not np.any(np.isfinite(log_weights)):
        raise WeightCollapseError(f"{model.name}: all {n_samples} AIS weights underflowed")
    result = PosteriorSampleSet(
        model.space.names, samples, log_weights, schedule=schedule, seed=seed,
        acceptance_rate=accepted / proposed if proposed else float("nan"),
    )
    if result.ess < max(1.0, LOW_ESS_FRACTION * n_samples):
        logger.warning(f"{model.name}: effective sample size {result.ess:.1f} of {n_samples} samples")
    logger.info(f"{model.name}: AIS done, ESS {result.ess:.1f}, acceptance {result.acceptance_rate:.2f}")
    return result


@dataclass(frozen=True, eq=False)
class CdfTable:
    parameter: str
    values: np.ndarray
    cdf: np.ndarray

    def at(self, value: float) -> float:
        idx = np.searchsorted(self.values, value, side="right")
        return float(self.cdf[idx - 1]) if idx > 0 else 0.0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"parameter": self.parameter, "value": self.values, "cdf": self.cdf})


def marginal_cdf(samples: PosteriorSampleSet, parameter: str) -> CdfTable:
    """Weighted empirical CDF tabulated at the distinct sample values"""
    column = samples.column(parameter)
    weights = samples.weights
    values, inverse = np.unique(column, return_inverse=True)
    mass = np.bincount(inverse, weights=weights, minlength=values.size)
    cdf = np.cumsum(mass)
    cdf = np.minimum(cdf / cdf[-1], 1.0)
    cdf[-1] = 1.0
    return CdfTable(parameter, values, cdf)


def weighted_quantile(samples: PosteriorSampleSet, parameter: str, probability: float) -> float:
    table = marginal_cdf(samples, parameter)
    idx = int(np.searchsorted(table.cdf, probability - 1e-12, side="left"))
    return float(table.values[min(idx, table.values.size - 1)])


def weighted_median(samples: PosteriorSampleSet, parameter: str) -> float:
    return weighted_quantile(samples, parameter, 0.5)


def credible_interval(samples: PosteriorSampleSet, parameter: str, mass: float) -> Tuple[float, float]:
    """Central interval between the (1 - mass)/2 and 1 - (1 - mass)/2 weighted quantiles"""
    if not 0.0 < mass < 1.0:
        raise ValueError(f"credible mass must lie in (0, 1), got {mass}")
    tail = (1.0 - mass) / 2.0
    return weighted_quantile(samples, parameter, tail), weighted_quantile(samples, parameter, 1.0 - tail)


def weighted_mean(samples: PosteriorSampleSet, parameter: str) -> float:
    return float(samples.weights @ samples.column(parameter))


def monte_carlo_standard_error(samples: PosteriorSampleSet, parameter: str) -> float:
    column = samples.column(parameter)
    mean = samples.weights @ column
    variance = samples.weights @ (column - mean) ** 2
    return float(math.sqrt(variance / samples.ess))


def count_modes(samples: PosteriorSampleSet, parameter: str, resolution: int = 512) -> int:
    """Local maxima of a weighted kernel density estimate of the marginal"""
    column = samples.column(parameter)
    weights = samples.weights
    support = column[weights > 0]
    if support.size < 2 or np.ptp(support) == 0:
        return 1
    kde = gaussian_kde(column, weights=weights)
    grid = np.linspace(column.min(), column.max(), resolution)
    density = np.concatenate([[-np.inf], kde(grid), [-np.inf]])
    slope = np.sign(np.diff(density))
    slope = slope[slope != 0]
    return max(1, int(np.sum((slope[:-1] > 0) & (slope[1:] < 0))))
