from typing import List, Union

import numpy as np

from game import Game, GameError, enumerate_nash, uniform
from models.model_interface import PROBABILITY, BehavioralModel, ModelFamily, ModelSpec, ParameterError, ParameterSpace, ParameterVector

AVERAGE = "average"


def predict_nee(game: Game, player: int, epsilon: float, selection: Union[int, str] = AVERAGE) -> np.ndarray:
    """(1 - epsilon) equilibrium play plus epsilon uniform noise, for one equilibrium or averaged over all"""
    if not 0.0 <= epsilon <= 1.0:
        raise ParameterError(f"epsilon must lie in [0, 1], got {epsilon}")
    equilibria = enumerate_nash(game).equilibria
    noise = uniform(game.num_actions(player))
    if selection == AVERAGE:
        chosen = np.mean([e.for_player(player) for e in equilibria], axis=0)
    else:
        if not isinstance(selection, (int, np.integer)) or not 0 <= selection < len(equilibria):
            raise GameError(f"game {game.id!r} has {len(equilibria)} equilibria, no index {selection!r}")
        chosen = equilibria[selection].for_player(player)
    return (1.0 - epsilon) * chosen + epsilon * noise


class NeeModel(BehavioralModel):
    """Nash equilibrium with error under a uniformly drawn equilibrium.

    predict returns the single-observation marginal of that mixture, the average of the
    equilibrium strategies; nee_bounds scores the same mixture with one draw per game.
    """

    def __init__(self):
        super().__init__("NEE", ModelSpec("NEE"), ParameterSpace.build((PROBABILITY, ["epsilon"])))

    def predict(self, game: Game, player: int, theta: ParameterVector) -> np.ndarray:
        return predict_nee(game, player, self.check(theta)["epsilon"], AVERAGE)

    def predict_selected(self, game: Game, player: int, theta: ParameterVector, selection: Union[int, str]) -> np.ndarray:
        return predict_nee(game, player, self.check(theta)["epsilon"], selection)


class NeeFamily(ModelFamily):
    def __init__(self):
        super().__init__("nee")
        self.description = "Nash equilibrium with error"

    def get_models(self) -> List[str]:
        return ["NEE"]

    def create(self, model_name: str) -> BehavioralModel:
        return NeeModel()
