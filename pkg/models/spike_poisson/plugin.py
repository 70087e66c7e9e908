from typing import List, Tuple

import numpy as np

from game import Game, quantal_best_response
from models.hierarchy import BeliefHierarchy
from models.levels import spike_poisson_levels
from models.model_interface import (
    PRECISION,
    PROBABILITY,
    RATE,
    BehavioralModel,
    ModelFamily,
    ModelSpec,
    ParameterSpace,
    ParameterVector,
)


def _hierarchy(game: Game, tau: float, epsilon: float, precision: float) -> BeliefHierarchy:
    # The single precision applies at every level.
    return BeliefHierarchy(
        game,
        spike_poisson_levels(tau, epsilon).masses,
        "CH",
        respond=lambda role, path, mixture: quantal_best_response(game, role, mixture, precision),
    )


def predict_spike_poisson_qch(game: Game, player: int, tau: float, epsilon: float, precision: float) -> np.ndarray:
    return _hierarchy(game, tau, epsilon, precision).population(player)


class SpikePoissonQchModel(BehavioralModel):
    def __init__(self):
        space = ParameterSpace.build((RATE, ["tau"]), (PROBABILITY, ["epsilon"]), (PRECISION, ["lambda"]))
        super().__init__("ah-QCH-sp", ModelSpec("SpikePoissonQCH", max_level="spike-poisson"), space)

    def _from(self, game: Game, theta: ParameterVector) -> BeliefHierarchy:
        self.check(theta)
        return _hierarchy(game, theta["tau"], theta["epsilon"], theta["lambda"])

    def predict(self, game: Game, player: int, theta: ParameterVector) -> np.ndarray:
        return self._from(game, theta).population(player)

    def predict_profile(self, game: Game, theta: ParameterVector) -> Tuple[np.ndarray, np.ndarray]:
        hierarchy = self._from(game, theta)
        return hierarchy.population(1), hierarchy.population(2)


class SpikePoissonFamily(ModelFamily):
    def __init__(self):
        super().__init__("spike_poisson")
        self.description = "Quantal cognitive hierarchy with a spike-Poisson level distribution"

    def get_models(self) -> List[str]:
        return ["ah-QCH-sp"]

    def create(self, model_name: str) -> BehavioralModel:
        return SpikePoissonQchModel()
