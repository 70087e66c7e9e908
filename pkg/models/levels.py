"""
Level distributions for iterative models
Tabular proportions, truncated Poisson and spike-Poisson masses
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import poisson

from models.model_interface import ParameterError

TRUNCATION_MASS = 1.0 - 1e-6
MAX_TRUNCATED_LEVEL = 20


@dataclass(frozen=True)
class LevelDistribution:
    kind: str
    masses: np.ndarray

    def __post_init__(self):
        masses = np.array(self.masses, dtype=float)
        if masses.ndim != 1 or masses.size == 0 or np.any(masses < 0) or abs(masses.sum() - 1.0) > 1e-9:
            raise ParameterError(f"invalid level masses {masses}")
        masses.setflags(write=False)
        object.__setattr__(self, "masses", masses)

    @property
    def max_level(self) -> int:
        return self.masses.size - 1


def tabular_levels(proportions: Sequence[float]) -> LevelDistribution:
    """Levels 1..K from explicit proportions; level 0 takes the remainder"""
    alphas = np.asarray(proportions, dtype=float)
    alpha0 = max(0.0, 1.0 - alphas.sum())
    masses = np.concatenate([[alpha0], alphas])
    return LevelDistribution("tabular", masses / masses.sum())


def _truncate(pmf: np.ndarray) -> np.ndarray:
    cumulative = np.cumsum(pmf)
    reached = np.flatnonzero(cumulative >= TRUNCATION_MASS)
    last = int(reached[0]) if reached.size else MAX_TRUNCATED_LEVEL
    kept = pmf[: last + 1]
    return kept / kept.sum()


def poisson_levels(tau: float) -> LevelDistribution:
    """Poisson(tau) truncated at the smallest level covering 1 - 1e-6 of the mass, capped at 20"""
    if tau < 0:
        raise ParameterError(f"tau must be non-negative, got {tau}")
    pmf = poisson.pmf(np.arange(MAX_TRUNCATED_LEVEL + 1), tau)
    return LevelDistribution("poisson", _truncate(pmf))


def spike_poisson_levels(tau: float, epsilon: float) -> LevelDistribution:
    """Poisson(tau) with an extra spike of mass epsilon on level 0"""
    if tau < 0:
        raise ParameterError(f"tau must be non-negative, got {tau}")
    if not 0.0 <= epsilon <= 1.0:
        raise ParameterError(f"epsilon must lie in [0, 1], got {epsilon}")
    pmf = (1.0 - epsilon) * poisson.pmf(np.arange(MAX_TRUNCATED_LEVEL + 1), tau)
    pmf[0] += epsilon
    return LevelDistribution("spike-poisson", _truncate(pmf))
