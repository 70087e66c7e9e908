from typing import List, Tuple

import numpy as np

from game import Game, best_response_mix
from models.hierarchy import BeliefHierarchy
from models.levels import poisson_levels
from models.model_interface import RATE, BehavioralModel, ModelFamily, ModelSpec, ParameterSpace, ParameterVector


def _hierarchy(game: Game, tau: float) -> BeliefHierarchy:
    levels = poisson_levels(tau)
    return BeliefHierarchy(
        game,
        levels.masses,
        "CH",
        respond=lambda role, path, mixture: best_response_mix(game, role, mixture),
    )


def predict_poisson_ch(game: Game, player: int, tau: float) -> np.ndarray:
    """Each level best responds, uniformly over ties, to the truncated mixture of lower levels"""
    return _hierarchy(game, tau).population(player)


class PoissonChModel(BehavioralModel):
    def __init__(self):
        super().__init__("Poisson-CH", ModelSpec("PoissonCH", max_level="poisson"), ParameterSpace.build((RATE, ["tau"])))

    def predict(self, game: Game, player: int, theta: ParameterVector) -> np.ndarray:
        return predict_poisson_ch(game, player, self.check(theta)["tau"])

    def predict_profile(self, game: Game, theta: ParameterVector) -> Tuple[np.ndarray, np.ndarray]:
        hierarchy = _hierarchy(game, self.check(theta)["tau"])
        return hierarchy.population(1), hierarchy.population(2)


class PoissonChFamily(ModelFamily):
    def __init__(self):
        super().__init__("poisson_ch")
        self.description = "Cognitive hierarchy with Poisson level distribution"

    def get_models(self) -> List[str]:
        return ["Poisson-CH"]

    def create(self, model_name: str) -> BehavioralModel:
        return PoissonChModel()
