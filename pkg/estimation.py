"""
Likelihood, maximum likelihood fitting and cross-validation
Includes uniform-baseline ratios, Student's t intervals over rounds,
Nash-with-error performance bounds and the efficient frontier
"""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.special import logsumexp
from scipy.stats import t as student_t

from game import Game, enumerate_nash
from models.model_interface import BehavioralModel, ParameterError, ParameterVector
from priors import PriorSpec
from qre import QreConvergenceError

logger = logging.getLogger("bgt.estimation")

PROBABILITY_FLOOR = 1e-300
DEFAULT_RESTARTS = 10
SIMPLEX_DIAMETER = 1e-8
MAX_EVALUATIONS = 10_000
CONFIDENCE = 0.95
_PENALTY = 1e300

SeedLike = Union[int, Sequence[int]]
FitCache = Dict[Tuple[str, Tuple[int, ...]], "FitResult"]


class EstimationError(ValueError):
    """Raised for datasets or fold plans that cannot support the requested estimate"""


@dataclass(frozen=True)
class Observation:
    game_id: str
    player_role: int
    action: int
    count: int = 1


@dataclass(frozen=True, eq=False)
class Dataset:
    games: Mapping[str, Game]
    observations: Tuple[Observation, ...]
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "games", dict(self.games))
        object.__setattr__(self, "observations", tuple(self.observations))
        for obs in self.observations:
            game = self.games.get(obs.game_id)
            if game is None:
                raise EstimationError(f"observation references unknown game {obs.game_id!r}")
            if obs.player_role not in (1, 2):
                raise EstimationError(f"game {obs.game_id!r}: player role must be 1 or 2, got {obs.player_role}")
            if not 0 <= obs.action < game.num_actions(obs.player_role):
                raise EstimationError(
                    f"game {obs.game_id!r}: action {obs.action} out of range for role {obs.player_role}"
                )
            if obs.count < 1:
                raise EstimationError(f"game {obs.game_id!r}: observation counts must be at least 1")

    @property
    def size(self) -> int:
        """Number of unit observations, counting multiplicity"""
        return sum(obs.count for obs in self.observations)

    def __len__(self) -> int:
        return self.size

    @cached_property
    def action_counts(self) -> Dict[str, Tuple[np.ndarray, np.ndarray]]:
        """Per game, count vectors over each role's actions"""
        counts: Dict[str, Tuple[np.ndarray, np.ndarray]] = {}
        for obs in self.observations:
            if obs.game_id not in counts:
                game = self.games[obs.game_id]
                counts[obs.game_id] = (np.zeros(game.shape[0]), np.zeros(game.shape[1]))
            counts[obs.game_id][obs.player_role - 1][obs.action] += obs.count
        return counts

    def observed_game_ids(self) -> List[str]:
        return sorted(self.action_counts)

    def unit_index(self) -> np.ndarray:
        """Observation index of every unit observation"""
        return np.repeat(np.arange(len(self.observations)), [obs.count for obs in self.observations])

    def from_units(self, units: Iterable[int], source: Optional[str] = None) -> "Dataset":
        """Dataset of the given unit observations (indices into unit_index)"""
        obs_index = self.unit_index()[np.asarray(list(units), dtype=int)]
        tallies = np.bincount(obs_index, minlength=len(self.observations))
        kept = [
            Observation(obs.game_id, obs.player_role, obs.action, int(n))
            for obs, n in zip(self.observations, tallies)
            if n > 0
        ]
        return self._with_observations(kept, source)

    def restrict_games(self, game_ids: Iterable[str], source: Optional[str] = None) -> "Dataset":
        wanted = set(game_ids)
        games = {gid: g for gid, g in self.games.items() if gid in wanted}
        kept = [obs for obs in self.observations if obs.game_id in wanted]
        return Dataset(games, tuple(kept), self.source if source is None else source)

    def _with_observations(self, observations: Sequence[Observation], source: Optional[str]) -> "Dataset":
        used = {obs.game_id for obs in observations}
        games = {gid: g for gid, g in self.games.items() if gid in used}
        return Dataset(games, tuple(observations), self.source if source is None else source)


def work_item_seed(seed: SeedLike, *key: int) -> np.random.SeedSequence:
    """Independent stream for one work item, derived by counter from the master seed"""
    return np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))


def uniform_log_likelihood(dataset: Dataset) -> float:
    total = 0.0
    for gid, (row, col) in dataset.action_counts.items():
        total -= row.sum() * math.log(row.size) + col.sum() * math.log(col.size)
    return float(total)


def _counts_log_likelihood(probs: np.ndarray, counts: np.ndarray) -> float:
    return float(counts @ np.log(np.maximum(probs, PROBABILITY_FLOOR)))


def log_likelihood(model: BehavioralModel, theta: ParameterVector, dataset: Dataset) -> float:
    """Sum over observations of count * log Pr(action | game, theta)"""
    total = 0.0
    for gid, (row_counts, col_counts) in dataset.action_counts.items():
        game = dataset.games.get(gid)
        if game is None:
            raise EstimationError(f"observation references unknown game {gid!r}")
        row, col = model.predict_profile(game, theta)
        total += _counts_log_likelihood(row, row_counts) + _counts_log_likelihood(col, col_counts)
    return total


@dataclass(frozen=True)
class FitResult:
    theta: ParameterVector
    train_log_likelihood: float
    restarts_used: int
    converged: bool
    evaluations: int = 0


def fit_mle(model: BehavioralModel, dataset: Dataset, restarts: int = DEFAULT_RESTARTS,
            seed: SeedLike = 0, key: Tuple[int, ...] = (), prior: Optional[PriorSpec] = None,
            initial: Sequence[ParameterVector] = ()) -> FitResult:
    """Nelder-Mead in the unconstrained reparameterization, best of `restarts` prior draws plus `initial`"""
    if dataset.size == 0:
        raise EstimationError("cannot fit a model to an empty dataset")
    space = model.space
    if len(space) == 0:
        theta = model.vector([])
        return FitResult(theta, log_likelihood(model, theta, dataset), 0, True, 1)

    prior = prior or PriorSpec()
    evaluations = 0

    def objective(z: np.ndarray) -> float:
        nonlocal evaluations
        evaluations += 1
        try:
            theta = space.vector(space.from_unconstrained(z))
            value = -log_likelihood(model, theta, dataset)
        except (ParameterError, QreConvergenceError) as e:
            logger.debug(f"{model.name}: objective failed at {z}: {e}")
            return _PENALTY
        return value if np.isfinite(value) else _PENALTY

    starts = [space.to_unconstrained(theta.values) for theta in initial]
    for restart in range(restarts):
        rng = np.random.default_rng(work_item_seed(seed, *key, restart))
        starts.append(space.to_unconstrained(prior.sample(space, rng)))

    best_z, best_value, best_converged = None, np.inf, False
    for z0 in starts:
        start_value = objective(z0)
        if start_value < best_value:
            best_z, best_value, best_converged = z0, start_value, False
        result = minimize(
            objective,
            z0,
            method="Nelder-Mead",
            options={
                "xatol": SIMPLEX_DIAMETER,
                "fatol": np.inf,
                "maxfev": MAX_EVALUATIONS,
                "adaptive": len(space) > 2,
            },
        )
        if result.fun < best_value:
            best_z, best_value, best_converged = result.x, float(result.fun), bool(result.success)

    if not best_converged:
        logger.warning(f"{model.name}: best fit did not meet the simplex tolerance within {MAX_EVALUATIONS} evaluations")
    theta = space.vector(space.from_unconstrained(best_z))
    return FitResult(theta, -best_value, len(starts), best_converged, evaluations)


def nested_start(fit: FitResult, model: BehavioralModel) -> ParameterVector:
    """Embed a smaller model's estimate in a larger model that nests it (missing levels get zero mass)"""
    smaller = fit.theta.as_dict()
    values: Dict[str, float] = {}
    for name in model.space.names:
        if name in smaller:
            values[name] = smaller[name]
        elif name.startswith("alpha_"):
            values[name] = 0.0
        elif name == "lambda":
            own = [v for n, v in smaller.items() if n.startswith("lambda_") and "(" not in n]
            if not own:
                raise ParameterError(f"{model.name}: no precision to carry over for {name}")
            values[name] = float(np.mean(own))
        elif name.startswith("lambda_"):
            believed = name.split("(")[0]
            values[name] = smaller.get(believed, smaller.get("lambda", 0.0))
        else:
            raise ParameterError(f"{model.name} does not nest the fitted model: no value for {name}")
    return model.vector(values)


def fit_nested(models: Sequence[BehavioralModel], dataset: Dataset, restarts: int = DEFAULT_RESTARTS,
               seed: SeedLike = 0, key: Tuple[int, ...] = (), prior: Optional[PriorSpec] = None,
               cache: Optional[FitCache] = None) -> List[FitResult]:
    """Fit a chain of nested models smallest first, each also started from the previous estimate.

    Training likelihoods come out non-decreasing along the chain. `cache` is keyed by
    (model name, key) and must only be shared between calls on the same dataset and prior.
    """
    fits: List[FitResult] = []
    for model in models:
        fit = cache.get((model.name, key)) if cache is not None else None
        if fit is None:
            initial = [nested_start(fits[-1], model)] if fits else []
            fit = fit_mle(model, dataset, restarts=restarts, seed=seed, key=key, prior=prior, initial=initial)
            if cache is not None:
                cache[(model.name, key)] = fit
        fits.append(fit)
    return fits


def student_t_half_width(values: Sequence[float], confidence: float = CONFIDENCE) -> float:
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return 0.0
    spread = values.std(ddof=1)
    return float(student_t.ppf(0.5 + confidence / 2, values.size - 1) * spread / math.sqrt(values.size))


@dataclass(frozen=True, eq=False)
class FoldPlan:
    unit: str
    folds: int
    rounds: int
    seed: int
    assignments: Tuple[np.ndarray, ...] = field(repr=False)

    @classmethod
    def create(cls, dataset: Dataset, folds: int = 10, rounds: int = 10, unit: str = "obs", seed: int = 0) -> "FoldPlan":
        if unit not in ("obs", "game"):
            raise EstimationError(f"fold unit must be 'obs' or 'game', got {unit!r}")
        if folds < 2 or rounds < 1:
            raise EstimationError("need at least 2 folds and 1 round")
        n_units = dataset.size if unit == "obs" else len(dataset.observed_game_ids())
        if n_units < folds:
            raise EstimationError(f"{n_units} {unit} units cannot fill {folds} folds")
        assignments = []
        for r in range(rounds):
            rng = np.random.default_rng(work_item_seed(seed, r))
            fold_of = np.empty(n_units, dtype=int)
            fold_of[rng.permutation(n_units)] = np.arange(n_units) % folds
            fold_of.setflags(write=False)
            assignments.append(fold_of)
        return cls(unit, folds, rounds, seed, tuple(assignments))

    def split(self, dataset: Dataset, round_index: int, fold: int) -> Tuple[Dataset, Dataset]:
        """(train, test) for one fold of one round"""
        fold_of = self.assignments[round_index]
        if self.unit == "obs":
            units = np.arange(fold_of.size)
            return dataset.from_units(units[fold_of != fold]), dataset.from_units(units[fold_of == fold])
        game_ids = np.array(dataset.observed_game_ids())
        return (
            dataset.restrict_games(game_ids[fold_of != fold]),
            dataset.restrict_games(game_ids[fold_of == fold]),
        )


@dataclass(frozen=True)
class CvScore:
    """Held-out log-likelihood per round (mean over folds) with a t-interval over rounds"""
    round_means: Tuple[float, ...]
    folds: int
    n_observations: int
    uniform_log_likelihood: float

    @property
    def mean(self) -> float:
        return float(np.mean(self.round_means))

    @property
    def ci_half_width(self) -> float:
        return student_t_half_width(self.round_means)

    @property
    def total(self) -> float:
        """Held-out log-likelihood of the whole dataset, averaged over rounds"""
        return self.mean * self.folds

    @property
    def total_ci_half_width(self) -> float:
        return self.ci_half_width * self.folds

    @property
    def per_observation(self) -> float:
        return self.total / self.n_observations if self.n_observations else 0.0

    @property
    def ln_ratio(self) -> float:
        return self.total - self.uniform_log_likelihood

    @property
    def log10_ratio(self) -> float:
        return self.ln_ratio / math.log(10)

    @property
    def log10_ci_half_width(self) -> float:
        return self.total_ci_half_width / math.log(10)


def cross_validate(model: BehavioralModel, dataset: Dataset, plan: FoldPlan,
                   restarts: int = DEFAULT_RESTARTS, prior: Optional[PriorSpec] = None,
                   nested: Sequence[BehavioralModel] = (), cache: Optional[FitCache] = None) -> CvScore:
    """Fit on all folds but one, score the held-out fold; deterministic given the plan's seed.

    `nested` lists smaller models that `model` nests, smallest first; each fold's fit is
    warm-started along that chain (see `fit_nested`).
    """
    chain = [*nested, model]
    round_means = []
    for r in range(plan.rounds):
        fold_scores = []
        for fold in range(plan.folds):
            train, test = plan.split(dataset, r, fold)
            fit = fit_nested(chain, train, restarts, plan.seed, (r, fold), prior, cache)[-1]
            fold_scores.append(log_likelihood(model, fit.theta, test))
        round_means.append(float(np.mean(fold_scores)))
        logger.debug(f"{model.name}: round {r + 1}/{plan.rounds} mean held-out LL {round_means[-1]:.4f}")
    return CvScore(tuple(round_means), plan.folds, dataset.size, uniform_log_likelihood(dataset))


def likelihood_ratio_vs_uniform(score: CvScore, dataset: Dataset) -> float:
    """log10 of held-out model likelihood over the uniform likelihood of the same data"""
    return (score.total - uniform_log_likelihood(dataset)) / math.log(10)


@dataclass(frozen=True)
class NeeBounds:
    best: CvScore
    worst: CvScore
    average: CvScore
    epsilons: Tuple[float, ...]


def _equilibrium_log_likelihoods(dataset: Dataset, epsilon: float) -> Dict[str, np.ndarray]:
    """Per game, the log-likelihood of its observations under each equilibrium with error"""
    table = {}
    for gid, (row_counts, col_counts) in dataset.action_counts.items():
        game = dataset.games[gid]
        noise_row = np.full(game.shape[0], 1.0 / game.shape[0])
        noise_col = np.full(game.shape[1], 1.0 / game.shape[1])
        scores = []
        for eq in enumerate_nash(game).equilibria:
            row = (1.0 - epsilon) * eq.row + epsilon * noise_row
            col = (1.0 - epsilon) * eq.column + epsilon * noise_col
            scores.append(_counts_log_likelihood(row, row_counts) + _counts_log_likelihood(col, col_counts))
        table[gid] = np.array(scores)
    return table


def _mixture_log_likelihood(per_equilibrium: np.ndarray) -> float:
    """One game's observations under an equilibrium drawn uniformly once for the game"""
    return float(logsumexp(per_equilibrium) - math.log(per_equilibrium.size))


def fit_nee_epsilon(dataset: Dataset) -> float:
    """Error rate maximizing the likelihood under a uniformly drawn equilibrium per game"""
    result = minimize_scalar(
        lambda eps: -sum(_mixture_log_likelihood(ll) for ll in _equilibrium_log_likelihoods(dataset, eps).values()),
        bounds=(0.0, 1.0),
        method="bounded",
        options={"xatol": 1e-8},
    )
    return float(result.x)


def nee_bounds(dataset: Dataset, plan: FoldPlan, epsilon: Optional[float] = None) -> NeeBounds:
    """Best, worst and average equilibrium selection per held-out game, with epsilon fit on training folds.

    The average draws the equilibrium uniformly once per game, the same mixture whose
    single-observation marginal `NeeModel.predict` returns; it always lies between the bounds.
    """
    best, worst, average, epsilons = [], [], [], []
    for r in range(plan.rounds):
        fold_best, fold_worst, fold_average = [], [], []
        for fold in range(plan.folds):
            train, test = plan.split(dataset, r, fold)
            eps = fit_nee_epsilon(train) if epsilon is None else float(epsilon)
            epsilons.append(eps)
            table = _equilibrium_log_likelihoods(test, eps)
            fold_best.append(sum(ll.max() for ll in table.values()))
            fold_worst.append(sum(ll.min() for ll in table.values()))
            fold_average.append(sum(_mixture_log_likelihood(ll) for ll in table.values()))
        best.append(float(np.mean(fold_best)))
        worst.append(float(np.mean(fold_worst)))
        average.append(float(np.mean(fold_average)))
    baseline = uniform_log_likelihood(dataset)
    scored = [CvScore(tuple(means), plan.folds, dataset.size, baseline) for means in (best, worst, average)]
    return NeeBounds(*scored, epsilons=tuple(epsilons))


def efficient_frontier(scores: Mapping[str, CvScore], parameter_counts: Mapping[str, int], weak: bool = False) -> List[str]:
    """Models that significantly beat every model with fewer parameters (every efficient one if weak)
    and are not significantly beaten by any model with as many parameters or fewer"""
    def lower(name: str) -> float:
        return scores[name].total - scores[name].total_ci_half_width

    def upper(name: str) -> float:
        return scores[name].total + scores[name].total_ci_half_width

    frontier: List[str] = []
    for name in sorted(scores, key=lambda n: (parameter_counts[n], -scores[n].total)):
        k = parameter_counts[name]
        rivals = [o for o in scores if parameter_counts[o] < k]
        if weak:
            rivals = [o for o in rivals if o in frontier]
        beats_smaller = all(lower(name) > upper(o) for o in rivals)
        beaten = any(lower(o) > upper(name) for o in scores if o != name and parameter_counts[o] <= k)
        if beats_smaller and not beaten:
            frontier.append(name)
    return frontier
