"""
Normal-form game core
Two-player payoff bimatrix, expected utility, best responses, payoff
normalization, iterated dominance and Nash equilibrium enumeration
"""
import hashlib
import itertools
import json
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import softmax

logger = logging.getLogger("bgt.game")

TIE_TOLERANCE = 1e-9
PROBABILITY_TOLERANCE = 1e-9
REGRET_TOLERANCE = 1e-6
NASH_SIZE_LIMIT = 400
PLAYERS = (1, 2)


class GameError(ValueError):
    """Raised for malformed games, bad player indices or mismatched distributions"""


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _player_index(player: int) -> int:
    if player not in PLAYERS:
        raise GameError(f"player must be 1 or 2, got {player!r}")
    return player - 1


def opponent(player: int) -> int:
    return 3 - player


def as_distribution(probs: Sequence[float], size: Optional[int] = None) -> np.ndarray:
    """Validate an action distribution and return it as a read-only float array"""
    vec = np.array(probs, dtype=float)
    if vec.ndim != 1 or vec.size == 0:
        raise GameError("action distribution must be a non-empty vector")
    if size is not None and vec.size != size:
        raise GameError(f"distribution has {vec.size} entries, expected {size}")
    if not np.all(np.isfinite(vec)):
        raise GameError("action distribution has non-finite entries")
    if np.any(vec < -PROBABILITY_TOLERANCE) or np.any(vec > 1 + PROBABILITY_TOLERANCE):
        raise GameError("action probabilities must lie in [0, 1]")
    if abs(vec.sum() - 1.0) > PROBABILITY_TOLERANCE:
        raise GameError(f"action probabilities sum to {vec.sum():.12g}, not 1")
    return _frozen(np.clip(vec, 0.0, 1.0))


def uniform(size: int) -> np.ndarray:
    return np.full(size, 1.0 / size)


@dataclass(frozen=True, eq=False)
class Game:
    """Two-player normal-form game; payoffs[0] is the row player's matrix, both |A1| x |A2|"""
    id: str
    actions: Tuple[Tuple[str, ...], Tuple[str, ...]]
    payoffs: Tuple[np.ndarray, np.ndarray]
    unit_factor: float = 1.0

    def __post_init__(self):
        if len(self.actions) != 2 or len(self.payoffs) != 2:
            raise GameError(f"game {self.id!r}: exactly two players are supported")
        actions = tuple(tuple(str(a) for a in labels) for labels in self.actions)
        if any(len(labels) == 0 for labels in actions):
            raise GameError(f"game {self.id!r}: each player needs at least one action")
        shape = (len(actions[0]), len(actions[1]))
        matrices = []
        for role, matrix in zip(PLAYERS, self.payoffs):
            array = np.array(matrix, dtype=float)
            if array.shape != shape:
                raise GameError(
                    f"game {self.id!r}: payoff matrix of player {role} has shape "
                    f"{array.shape}, expected {shape}"
                )
            if not np.all(np.isfinite(array)):
                raise GameError(f"game {self.id!r}: payoffs must be finite")
            matrices.append(_frozen(array))
        if not np.isfinite(self.unit_factor):
            raise GameError(f"game {self.id!r}: unit_factor must be finite")
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "payoffs", tuple(matrices))
        object.__setattr__(self, "unit_factor", float(self.unit_factor))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.payoffs[0].shape

    def num_actions(self, player: int) -> int:
        return self.shape[_player_index(player)]

    def utility_matrix(self, player: int) -> np.ndarray:
        """Payoffs oriented as (own action, opponent action)"""
        idx = _player_index(player)
        return self.payoffs[0] if idx == 0 else self.payoffs[1].T

    @cached_property
    def fingerprint(self) -> str:
        digest = hashlib.sha1()
        digest.update(self.id.encode("utf-8"))
        digest.update(repr(self.actions).encode("utf-8"))
        digest.update(np.float64(self.unit_factor).tobytes())
        for matrix in self.payoffs:
            digest.update(np.ascontiguousarray(matrix).tobytes())
        return digest.hexdigest()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Game):
            return NotImplemented
        return self.fingerprint == other.fingerprint

    def __hash__(self) -> int:
        return hash(self.fingerprint)

    def __repr__(self) -> str:
        return f"Game(id={self.id!r}, shape={self.shape}, unit_factor={self.unit_factor})"

    def with_payoffs(self, payoffs: Tuple[np.ndarray, np.ndarray], unit_factor: Optional[float] = None) -> "Game":
        return Game(
            id=self.id,
            actions=self.actions,
            payoffs=payoffs,
            unit_factor=self.unit_factor if unit_factor is None else unit_factor,
        )

    def renamed(self, new_id: str) -> "Game":
        return Game(id=new_id, actions=self.actions, payoffs=self.payoffs, unit_factor=self.unit_factor)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "unit_factor": self.unit_factor,
            "actions": [list(labels) for labels in self.actions],
            "payoffs": [matrix.tolist() for matrix in self.payoffs],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Game":
        try:
            return cls(
                id=str(data["id"]),
                actions=tuple(tuple(labels) for labels in data["actions"]),
                payoffs=tuple(data["payoffs"]),
                unit_factor=float(data.get("unit_factor", 1.0)),
            )
        except KeyError as e:
            raise GameError(f"game document is missing field {e}") from e

    def to_json(self, path: Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def from_json(cls, path: Path) -> "Game":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise GameError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from e
        return cls.from_dict(data)


@dataclass(frozen=True, eq=False)
class StrategyProfile:
    """One action distribution per player"""
    row: np.ndarray
    column: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "row", as_distribution(self.row))
        object.__setattr__(self, "column", as_distribution(self.column))

    def for_player(self, player: int) -> np.ndarray:
        return self.row if _player_index(player) == 0 else self.column

    @property
    def is_pure(self) -> bool:
        return all(np.isclose(dist.max(), 1.0, atol=PROBABILITY_TOLERANCE) for dist in (self.row, self.column))

    def allclose(self, other: "StrategyProfile", atol: float = 1e-9) -> bool:
        return (
            self.row.shape == other.row.shape
            and self.column.shape == other.column.shape
            and np.allclose(self.row, other.row, atol=atol)
            and np.allclose(self.column, other.column, atol=atol)
        )

    @classmethod
    def uniform(cls, game: Game) -> "StrategyProfile":
        return cls(uniform(game.shape[0]), uniform(game.shape[1]))


@dataclass(frozen=True)
class DominanceClassification:
    solvable_strict: bool
    solvable_weak: bool
    rounds_strict: Optional[int]
    rounds_weak: Optional[int]


@dataclass(frozen=True)
class EquilibriumSet:
    equilibria: Tuple[StrategyProfile, ...]
    degenerate: bool = False

    @property
    def structure(self) -> str:
        if len(self.equilibria) > 1:
            return "multiple"
        return "single-pure" if self.equilibria[0].is_pure else "single-mixed"

    def __len__(self) -> int:
        return len(self.equilibria)


def _check_opponent(game: Game, player: int, opp: Sequence[float]) -> np.ndarray:
    return as_distribution(opp, game.num_actions(opponent(player)))


def expected_utilities(game: Game, player: int, opp: Sequence[float]) -> np.ndarray:
    """Expected utility of every action of `player` against opponent mix `opp`"""
    return game.utility_matrix(player) @ _check_opponent(game, player, opp)


def expected_utility(game: Game, player: int, action: int, opp: Sequence[float]) -> float:
    n = game.num_actions(player)
    if not 0 <= action < n:
        raise GameError(f"action {action} out of range for player {player} with {n} actions")
    return float(expected_utilities(game, player, opp)[action])


def best_response_set(game: Game, player: int, opp: Sequence[float]) -> Tuple[int, ...]:
    utilities = expected_utilities(game, player, opp)
    return tuple(int(a) for a in np.flatnonzero(utilities >= utilities.max() - TIE_TOLERANCE))


def best_response_mix(game: Game, player: int, opp: Sequence[float]) -> np.ndarray:
    """Uniform mixture over the best response set"""
    dist = np.zeros(game.num_actions(player))
    dist[list(best_response_set(game, player, opp))] = 1.0
    return dist / dist.sum()


def quantal_best_response(game: Game, player: int, opp: Sequence[float], precision: float) -> np.ndarray:
    """Logit response: probabilities proportional to exp(precision * expected utility)"""
    if precision < 0:
        raise GameError(f"precision must be non-negative, got {precision}")
    return softmax(precision * expected_utilities(game, player, opp))


def normalize_payoffs(game: Game) -> Game:
    """Express payoffs in expected cents; the result has unit_factor 1"""
    if not game.unit_factor > 0:
        raise GameError(f"game {game.id!r}: unit_factor must be positive, got {game.unit_factor}")
    if game.unit_factor == 1.0:
        return game
    return game.with_payoffs(tuple(m * game.unit_factor for m in game.payoffs), unit_factor=1.0)


# Dominance is tested against pure strategies only.
def _dominated(game: Game, player: int, alive: List[np.ndarray], strict: bool) -> np.ndarray:
    idx = _player_index(player)
    own = np.flatnonzero(alive[idx])
    cols = np.flatnonzero(alive[1 - idx])
    utilities = game.utility_matrix(player)[np.ix_(own, cols)]
    dominated = np.zeros_like(alive[idx])
    for i, a in enumerate(own):
        for j in range(len(own)):
            if i == j:
                continue
            diff = utilities[j] - utilities[i]
            if strict:
                hit = np.all(diff > TIE_TOLERANCE)
            else:
                hit = np.all(diff >= -TIE_TOLERANCE) and np.any(diff > TIE_TOLERANCE)
            if hit:
                dominated[a] = True
                break
    return dominated


def iterated_elimination(game: Game, strict: bool) -> Tuple[int, Tuple[np.ndarray, np.ndarray]]:
    """Remove all dominated actions of both players per sweep; returns (sweeps, surviving masks)"""
    alive = [np.ones(n, dtype=bool) for n in game.shape]
    sweeps = 0
    while True:
        removed = [_dominated(game, player, alive, strict) for player in PLAYERS]
        if not any(mask.any() for mask in removed):
            break
        sweeps += 1
        for idx, mask in enumerate(removed):
            alive[idx] &= ~mask
    return sweeps, (alive[0], alive[1])


def classify_dominance(game: Game) -> DominanceClassification:
    results = {}
    for label, strict in (("strict", True), ("weak", False)):
        sweeps, alive = iterated_elimination(game, strict)
        solved = all(mask.sum() == 1 for mask in alive)
        # A 1x1 game counts as solved in a single sweep.
        results[label] = max(sweeps, 1) if solved else None
    return DominanceClassification(
        solvable_strict=results["strict"] is not None,
        solvable_weak=results["weak"] is not None,
        rounds_strict=results["strict"],
        rounds_weak=results["weak"],
    )


def regret(game: Game, profile: StrategyProfile, player: int) -> float:
    """Largest gain available to `player` by deviating from `profile`"""
    own = profile.for_player(player)
    utilities = expected_utilities(game, player, profile.for_player(opponent(player)))
    return float(utilities.max() - own @ utilities)


def _indifference_mix(matrix: np.ndarray, solver: str) -> Optional[np.ndarray]:
    """Mix over the columns of `matrix` that makes every row earn the same value"""
    rows, cols = matrix.shape
    system = np.zeros((rows + 1, cols + 1))
    system[:rows, :cols] = matrix
    system[:rows, cols] = -1.0
    system[rows, :cols] = 1.0
    rhs = np.zeros(rows + 1)
    rhs[rows] = 1.0
    if solver == "exact":
        solution = np.linalg.solve(system, rhs)
    else:
        solution, *_ = np.linalg.lstsq(system, rhs, rcond=None)
        if not np.allclose(system @ solution, rhs, atol=1e-9):
            return None
    return solution[:cols]


def _support_candidate(game: Game, rows: Tuple[int, ...], cols: Tuple[int, ...], solver: str) -> Optional[StrategyProfile]:
    a = game.payoffs[0]
    b = game.payoffs[1]
    y = _indifference_mix(a[np.ix_(rows, cols)], solver)
    x = _indifference_mix(b[np.ix_(rows, cols)].T, solver)
    if x is None or y is None:
        return None
    if np.any(x < -TIE_TOLERANCE) or np.any(y < -TIE_TOLERANCE):
        return None
    row = np.zeros(game.shape[0])
    col = np.zeros(game.shape[1])
    row[list(rows)] = np.clip(x, 0.0, None)
    col[list(cols)] = np.clip(y, 0.0, None)
    if row.sum() <= 0 or col.sum() <= 0:
        return None
    profile = StrategyProfile(row / row.sum(), col / col.sum())
    if max(regret(game, profile, player) for player in PLAYERS) > REGRET_TOLERANCE:
        return None
    return profile


def _add_unique(found: List[StrategyProfile], profile: StrategyProfile) -> None:
    if not any(profile.allclose(known, atol=1e-7) for known in found):
        found.append(profile)


def _is_degenerate_profile(game: Game, profile: StrategyProfile) -> bool:
    for player in PLAYERS:
        support = np.count_nonzero(profile.for_player(player) > PROBABILITY_TOLERANCE)
        responses = best_response_set(game, player, profile.for_player(opponent(player)))
        if len(responses) > support:
            return True
    return False


@lru_cache(maxsize=2048)
def enumerate_nash(game: Game) -> EquilibriumSet:
    """Extreme Nash equilibria by support enumeration over equal-size support pairs"""
    n1, n2 = game.shape
    if n1 * n2 > NASH_SIZE_LIMIT:
        raise GameError(
            f"game {game.id!r}: {n1}x{n2} exceeds the support enumeration limit of {NASH_SIZE_LIMIT} profiles"
        )
    found: List[StrategyProfile] = []
    degenerate = False
    for size in range(1, min(n1, n2) + 1):
        for rows in itertools.combinations(range(n1), size):
            for cols in itertools.combinations(range(n2), size):
                try:
                    profile = _support_candidate(game, rows, cols, "exact")
                except np.linalg.LinAlgError:
                    logger.warning(f"Game {game.id}: singular support system {rows}x{cols} skipped")
                    degenerate = True
                    continue
                if profile is not None:
                    _add_unique(found, profile)
    if not found:
        logger.warning(f"Game {game.id}: no equilibrium on equal supports, retrying unequal supports")
        degenerate = True
        for size_r in range(1, n1 + 1):
            for size_c in range(1, n2 + 1):
                if size_r == size_c:
                    continue
                for rows in itertools.combinations(range(n1), size_r):
                    for cols in itertools.combinations(range(n2), size_c):
                        profile = _support_candidate(game, rows, cols, "least-squares")
                        if profile is not None:
                            _add_unique(found, profile)
    if not found:
        raise GameError(f"game {game.id!r}: support enumeration found no equilibrium")
    degenerate = degenerate or any(_is_degenerate_profile(game, p) for p in found)
    return EquilibriumSet(equilibria=tuple(found), degenerate=degenerate)
