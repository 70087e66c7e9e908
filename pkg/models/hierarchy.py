"""
Iterative reasoning over lower levels
Evaluates each level's play from what it believes about the opponent's
lower levels, for both level-k and cognitive-hierarchy population beliefs
"""
from typing import Callable, Dict, Hashable, List, Sequence, Tuple

import numpy as np

from game import Game, opponent, uniform

# (role, belief path, opponent mixture) -> action distribution of the agent at the path
Response = Callable[[int, Tuple[int, ...], np.ndarray], np.ndarray]
# belief path -> memo key; accurate beliefs collapse paths to their last level
PathKey = Callable[[Tuple[int, ...]], Hashable]


def believed_levels(level: int, masses: Sequence[float], population_beliefs: str) -> Tuple[List[int], np.ndarray]:
    """Lower levels a level-`level` agent believes it faces, with their weights"""
    if population_beliefs == "Lk":
        return [level - 1], np.ones(1)
    weights = np.asarray(masses[:level], dtype=float)
    total = weights.sum()
    if total <= 0:
        return list(range(level)), np.full(level, 1.0 / level)
    return list(range(level)), weights / total


def belief_paths(max_level: int, population_beliefs: str) -> List[Tuple[int, ...]]:
    """Every believed agent below a top-level agent, as paths (own level, believed level, ...)"""
    paths: List[Tuple[int, ...]] = []

    def visit(path: Tuple[int, ...]) -> None:
        children, _ = believed_levels(path[-1], np.ones(max_level + 1), population_beliefs)
        for child in children:
            if child >= 1:
                paths.append(path + (child,))
                visit(path + (child,))

    for level in range(1, max_level + 1):
        visit((level,))
    return paths


def belief_parameter_name(path: Tuple[int, ...]) -> str:
    """(3, 2, 1) is level 1 as believed by level 2 as believed by level 3: lambda_1(2)(3)"""
    return f"lambda_{path[-1]}" + "".join(f"({level})" for level in reversed(path[:-1]))


class BeliefHierarchy:
    """Per-game evaluation of level play; memoized on (role, key(path))"""

    def __init__(self, game: Game, masses: Sequence[float], population_beliefs: str,
                 respond: Response, key: PathKey = lambda path: path[-1]):
        self.game = game
        self.masses = np.asarray(masses, dtype=float)
        self.population_beliefs = population_beliefs
        self.respond = respond
        self.key = key
        self._memo: Dict[Tuple[int, Hashable], np.ndarray] = {}

    def play(self, role: int, path: Tuple[int, ...]) -> np.ndarray:
        level = path[-1]
        if level == 0:
            return uniform(self.game.num_actions(role))
        memo_key = (role, self.key(path))
        if memo_key not in self._memo:
            other = opponent(role)
            levels, weights = believed_levels(level, self.masses, self.population_beliefs)
            mixture = sum(w * self.play(other, path + (k,)) for k, w in zip(levels, weights))
            self._memo[memo_key] = self.respond(role, path, mixture)
        return self._memo[memo_key]

    def population(self, role: int) -> np.ndarray:
        """Mixture of every level's play weighted by the level masses"""
        dist = sum(mass * self.play(role, (level,)) for level, mass in enumerate(self.masses))
        return dist / dist.sum()
