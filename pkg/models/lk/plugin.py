from typing import Dict, List, Tuple

import numpy as np

from game import Game, best_response_set, opponent, uniform
from models.model_interface import (
    PROBABILITY,
    PROPORTION,
    BehavioralModel,
    ModelFamily,
    ModelSpec,
    ParameterError,
    ParameterSpace,
    ParameterVector,
)

MAX_LEVEL = 2


def iterative_best_responses(game: Game, max_level: int) -> Dict[int, List[Tuple[int, ...]]]:
    """IBR sets per role; level 0 is every action, level k best responds to uniform play over IBR k-1"""
    ibr = {role: [tuple(range(game.num_actions(role)))] for role in (1, 2)}
    for level in range(1, max_level + 1):
        for role in (1, 2):
            other = opponent(role)
            believed = np.zeros(game.num_actions(other))
            believed[list(ibr[other][level - 1])] = 1.0
            ibr[role].append(best_response_set(game, role, believed / believed.sum()))
    return ibr


def level_play(n_actions: int, best: Tuple[int, ...], error: float) -> np.ndarray:
    """(1 - error) spread over the IBR set, error over the rest; uniform when the IBR set is everything"""
    if len(best) == n_actions:
        return uniform(n_actions)
    dist = np.full(n_actions, error / (n_actions - len(best)))
    dist[list(best)] = (1.0 - error) / len(best)
    return dist


def predict_lk(game: Game, player: int, alpha_1: float, alpha_2: float, epsilon_1: float, epsilon_2: float) -> np.ndarray:
    alphas = np.array([1.0 - alpha_1 - alpha_2, alpha_1, alpha_2])
    if np.any(alphas < -1e-12) or not (0 <= epsilon_1 <= 1 and 0 <= epsilon_2 <= 1):
        raise ParameterError("Lk needs proportions on the simplex and error rates in [0, 1]")
    alphas = np.clip(alphas, 0.0, None)
    n = game.num_actions(player)
    ibr = iterative_best_responses(game, MAX_LEVEL)[player]
    levels = [uniform(n), level_play(n, ibr[1], epsilon_1), level_play(n, ibr[2], epsilon_2)]
    dist = sum(a * pi for a, pi in zip(alphas, levels))
    return dist / dist.sum()


class LkModel(BehavioralModel):
    def __init__(self):
        space = ParameterSpace.build(
            (PROPORTION, ["alpha_1", "alpha_2"]),
            (PROBABILITY, ["epsilon_1", "epsilon_2"]),
        )
        super().__init__("Lk", ModelSpec("Lk", max_level=MAX_LEVEL), space)

    def predict(self, game: Game, player: int, theta: ParameterVector) -> np.ndarray:
        self.check(theta)
        return predict_lk(game, player, theta["alpha_1"], theta["alpha_2"], theta["epsilon_1"], theta["epsilon_2"])


class LkFamily(ModelFamily):
    def __init__(self):
        super().__init__("lk")
        self.description = "Level-k with per-level error rates"

    def get_models(self) -> List[str]:
        return ["Lk"]

    def create(self, model_name: str) -> BehavioralModel:
        return LkModel()
