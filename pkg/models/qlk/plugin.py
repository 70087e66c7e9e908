from typing import List

import numpy as np

from game import Game, opponent, quantal_best_response, uniform
from models.model_interface import (
    PRECISION,
    PROPORTION,
    BehavioralModel,
    ModelFamily,
    ModelSpec,
    ParameterError,
    ParameterSpace,
    ParameterVector,
)


def predict_qlk(game: Game, player: int, alpha_1: float, alpha_2: float,
                lambda_1: float, lambda_2: float, lambda_1_2: float) -> np.ndarray:
    """Level 1 responds to uniform at lambda_1; level 2 responds at lambda_2 to its belief
    about level 1, which it pictures responding to uniform at lambda_1_2"""
    alpha_0 = 1.0 - alpha_1 - alpha_2
    if min(alpha_0, alpha_1, alpha_2) < -1e-12:
        raise ParameterError("QLk proportions must lie on the simplex")
    other = opponent(player)
    opp_uniform = uniform(game.num_actions(other))
    level_1 = quantal_best_response(game, player, opp_uniform, lambda_1)
    believed_1 = quantal_best_response(game, other, uniform(game.num_actions(player)), lambda_1_2)
    level_2 = quantal_best_response(game, player, believed_1, lambda_2)
    dist = max(alpha_0, 0.0) * uniform(game.num_actions(player)) + alpha_1 * level_1 + alpha_2 * level_2
    return dist / dist.sum()


class QlkModel(BehavioralModel):
    def __init__(self):
        space = ParameterSpace.build(
            (PROPORTION, ["alpha_1", "alpha_2"]),
            (PRECISION, ["lambda_1", "lambda_2", "lambda_1(2)"]),
        )
        super().__init__("QLk", ModelSpec("QLk", max_level=2), space)

    def predict(self, game: Game, player: int, theta: ParameterVector) -> np.ndarray:
        self.check(theta)
        return predict_qlk(
            game, player,
            theta["alpha_1"], theta["alpha_2"],
            theta["lambda_1"], theta["lambda_2"], theta["lambda_1(2)"],
        )


class QlkFamily(ModelFamily):
    def __init__(self):
        super().__init__("qlk")
        self.description = "Quantal level-k with five parameters"

    def get_models(self) -> List[str]:
        return ["QLk"]

    def create(self, model_name: str) -> BehavioralModel:
        return QlkModel()
