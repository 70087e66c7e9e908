from typing import List, Tuple

import numpy as np

from game import Game
from models.model_interface import PRECISION, BehavioralModel, ModelFamily, ModelSpec, ParameterSpace, ParameterVector
from qre import solve_qre


class QreModel(BehavioralModel):
    """Principal-branch logit QRE with a single precision"""

    def __init__(self):
        super().__init__("QRE", ModelSpec("QRE"), ParameterSpace.build((PRECISION, ["lambda"])))

    def predict(self, game: Game, player: int, theta: ParameterVector) -> np.ndarray:
        return solve_qre(game, self.check(theta)["lambda"]).for_player(player)

    def predict_profile(self, game: Game, theta: ParameterVector) -> Tuple[np.ndarray, np.ndarray]:
        profile = solve_qre(game, self.check(theta)["lambda"])
        return profile.row, profile.column


class QreFamily(ModelFamily):
    def __init__(self):
        super().__init__("qre")
        self.description = "Quantal response equilibrium"

    def get_models(self) -> List[str]:
        return ["QRE"]

    def create(self, model_name: str) -> BehavioralModel:
        return QreModel()
