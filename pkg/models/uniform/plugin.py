from typing import List

import numpy as np

from game import Game, uniform
from models.model_interface import BehavioralModel, ModelFamily, ModelSpec, ParameterSpace, ParameterVector


class UniformModel(BehavioralModel):
    """Every action equally likely; the baseline that likelihood ratios are taken against"""

    def __init__(self):
        super().__init__("uniform", ModelSpec("uniform"), ParameterSpace((), ()))

    def predict(self, game: Game, player: int, theta: ParameterVector) -> np.ndarray:
        self.check(theta)
        return uniform(game.num_actions(player))


class UniformFamily(ModelFamily):
    def __init__(self):
        super().__init__("uniform")
        self.description = "Zero-parameter uniform play"

    def get_models(self) -> List[str]:
        return ["uniform"]

    def create(self, model_name: str) -> BehavioralModel:
        return UniformModel()
