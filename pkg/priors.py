"""
Prior and proposal distributions over model parameters
Shared by random fitting restarts and annealed importance sampling
"""
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.special import gammaln, xlogy
from scipy.stats import halfnorm, truncnorm

from models.model_interface import PRECISION, PROBABILITY, PROPORTION, RATE, ParameterSpace

_CONCENTRATION_FLOOR = 1e-3
_SIMPLEX_FLOOR = 1e-12
_MIN_SCALE = 1e-3
_MAX_SCALE = 1e3


def dirichlet_logpdf(x: np.ndarray, concentration: np.ndarray) -> float:
    if np.any(x < 0) or abs(x.sum() - 1.0) > 1e-9:
        return -np.inf
    return float(gammaln(concentration.sum()) - gammaln(concentration).sum() + xlogy(concentration - 1.0, x).sum())


def _dirichlet_draw(rng: np.random.Generator, concentration: np.ndarray) -> np.ndarray:
    draw = np.clip(rng.dirichlet(concentration), _SIMPLEX_FLOOR, None)
    return draw / draw.sum()


def _full_simplex(space: ParameterSpace, values: np.ndarray) -> np.ndarray:
    alphas = values[space.indices(PROPORTION)]
    return np.concatenate([[max(1.0 - alphas.sum(), 0.0)], alphas])


@dataclass(frozen=True)
class PriorSpec:
    """Dirichlet(1) over level proportions, half-normal precisions, flat rates and probabilities"""
    proportion_concentration: float = 1.0
    precision_scale: float = 2.0
    rate_upper: float = 10.0

    def sample(self, space: ParameterSpace, rng: np.random.Generator) -> np.ndarray:
        values = np.zeros(len(space))
        props = space.indices(PROPORTION)
        if props.size:
            values[props] = _dirichlet_draw(rng, np.full(props.size + 1, self.proportion_concentration))[1:]
        precisions = space.indices(PRECISION)
        if precisions.size:
            values[precisions] = halfnorm.rvs(scale=self.precision_scale, size=precisions.size, random_state=rng)
        rates = space.indices(RATE)
        if rates.size:
            values[rates] = rng.uniform(0.0, self.rate_upper, size=rates.size)
        probs = space.indices(PROBABILITY)
        if probs.size:
            values[probs] = rng.uniform(0.0, 1.0, size=probs.size)
        return values

    def log_density(self, space: ParameterSpace, values: np.ndarray) -> float:
        values = np.asarray(values, dtype=float)
        total = 0.0
        props = space.indices(PROPORTION)
        if props.size:
            total += dirichlet_logpdf(_full_simplex(space, values), np.full(props.size + 1, self.proportion_concentration))
        precisions = space.indices(PRECISION)
        if precisions.size:
            total += halfnorm.logpdf(values[precisions], scale=self.precision_scale).sum()
        rates = values[space.indices(RATE)]
        if rates.size:
            if np.any(rates < 0) or np.any(rates > self.rate_upper):
                return -np.inf
            total -= rates.size * np.log(self.rate_upper)
        probs = values[space.indices(PROBABILITY)]
        if np.any(probs < 0) or np.any(probs > 1):
            return -np.inf
        return float(total)


@dataclass(frozen=True)
class ProposalSpec:
    """Dirichlet steps centred on the current simplex point, truncated Gaussian steps for positive parameters.

    With `target_acceptance` set, AIS chains rescale the steps after every temperature so the
    Metropolis acceptance rate tracks the target.
    """
    proportion_concentration: float = 20.0
    precision_step: float = 0.2
    target_acceptance: Optional[float] = 0.5
    adaptation_rate: float = 1.0

    def __post_init__(self):
        if self.target_acceptance is not None and not 0.0 < self.target_acceptance < 1.0:
            raise ValueError(f"target acceptance must lie in (0, 1), got {self.target_acceptance}")

    def scaled(self, scale: float) -> "ProposalSpec":
        """Steps `scale` times wider: Gaussian widths grow linearly, Dirichlet concentrations shrink quadratically"""
        return replace(
            self,
            precision_step=self.precision_step * scale,
            proportion_concentration=self.proportion_concentration / scale ** 2,
        )

    def adapt(self, scale: float, acceptance: float) -> float:
        """Next step scale after a batch with the given acceptance fraction"""
        if self.target_acceptance is None:
            return scale
        scale *= np.exp(self.adaptation_rate * (acceptance - self.target_acceptance))
        return float(np.clip(scale, _MIN_SCALE, _MAX_SCALE))

    def _proportion_concentration(self, simplex: np.ndarray) -> np.ndarray:
        return np.clip(self.proportion_concentration * simplex, _CONCENTRATION_FLOOR, None)

    def _positive(self, centre: np.ndarray):
        return truncnorm(a=-centre / self.precision_step, b=np.inf, loc=centre, scale=self.precision_step)

    def propose(self, space: ParameterSpace, current: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        current = np.asarray(current, dtype=float)
        proposal = current.copy()
        props = space.indices(PROPORTION)
        if props.size:
            simplex = _dirichlet_draw(rng, self._proportion_concentration(_full_simplex(space, current)))
            proposal[props] = simplex[1:]
        positive = np.concatenate([space.indices(PRECISION), space.indices(RATE)])
        if positive.size:
            proposal[positive] = self._positive(current[positive]).rvs(random_state=rng)
        for i in space.indices(PROBABILITY):
            pair = _dirichlet_draw(rng, self._proportion_concentration(np.array([current[i], 1.0 - current[i]])))
            proposal[i] = pair[0]
        return proposal

    def log_density(self, space: ParameterSpace, to: np.ndarray, given: np.ndarray) -> float:
        """log Q(to | given), used for the Metropolis-Hastings correction"""
        to = np.asarray(to, dtype=float)
        given = np.asarray(given, dtype=float)
        total = 0.0
        props = space.indices(PROPORTION)
        if props.size:
            total += dirichlet_logpdf(_full_simplex(space, to), self._proportion_concentration(_full_simplex(space, given)))
        positive = np.concatenate([space.indices(PRECISION), space.indices(RATE)])
        if positive.size:
            total += self._positive(given[positive]).logpdf(to[positive]).sum()
        for i in space.indices(PROBABILITY):
            total += dirichlet_logpdf(
                np.array([to[i], 1.0 - to[i]]),
                self._proportion_concentration(np.array([given[i], 1.0 - given[i]])),
            )
        return float(total)
