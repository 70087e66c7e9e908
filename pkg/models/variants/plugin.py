"""
Variant grid of quantal iterative models
Four axes: maximum level (or Poisson levels), level-k vs cognitive-hierarchy
population beliefs, homogeneous vs per-level precisions, and accurate vs
free beliefs about lower levels' precisions
"""
import logging
import re
from typing import Dict, List, Tuple

import numpy as np

from game import Game, quantal_best_response
from models.hierarchy import BeliefHierarchy, belief_parameter_name, belief_paths
from models.levels import MAX_TRUNCATED_LEVEL, poisson_levels, tabular_levels
from models.model_interface import (
    PRECISION,
    PROPORTION,
    RATE,
    BehavioralModel,
    ModelFamily,
    ModelSpec,
    ParameterError,
    ParameterSpace,
    ParameterVector,
)

VARIANT_PATTERN = re.compile(r"^(?P<beliefs>[ag])(?P<precisions>[hi])-Q(?P<population>Lk|CH)(?P<level>[1-9]\d*|p)$")
MAX_GENERAL_LEVEL = 6
NESTED_FROM_LEVEL = 2

TABLE_VARIANTS = [
    "QLk1",
    "gi-QLk2", "ai-QLk2", "gh-QLk2", "ah-QLk2",
    "gi-QCH2", "ai-QCH2", "gh-QCH2", "ah-QCH2",
    "gi-QLk3", "ai-QLk3", "gh-QLk3", "ah-QLk3",
    "gi-QCH3", "ai-QCH3", "gh-QCH3", "ah-QCH3",
    "ai-QLk4", "ah-QLk4", "ah-QLk5", "ah-QLk6", "ah-QLk7", "ah-QLkp",
    "ai-QCH4", "ah-QCH4", "ah-QCH5", "ah-QCH6", "ah-QCH7", "ah-QCHp",
]

logger = logging.getLogger("model.variants")


def parse_variant_name(name: str) -> ModelSpec:
    if name == "QLk1":
        return ModelSpec("VariantGrid", max_level=1, population_beliefs="Lk",
                         precisions="homogeneous", precision_beliefs="accurate")
    match = VARIANT_PATTERN.match(name)
    if not match:
        raise ParameterError(f"{name!r} is not a variant name like ah-QCH3 or gi-QLk2")
    level = match["level"]
    spec = ModelSpec(
        "VariantGrid",
        max_level="poisson" if level == "p" else int(level),
        population_beliefs=match["population"],
        precisions="homogeneous" if match["precisions"] == "h" else "inhomogeneous",
        precision_beliefs="accurate" if match["beliefs"] == "a" else "general",
    )
    if isinstance(spec.max_level, int):
        limit = MAX_GENERAL_LEVEL if spec.precision_beliefs == "general" else MAX_TRUNCATED_LEVEL
        if spec.max_level > limit:
            raise ParameterError(f"{name}: max level {spec.max_level} exceeds {limit} for this variant")
    return spec


def variant_space(spec: ModelSpec) -> ParameterSpace:
    if spec.max_level == "poisson":
        return ParameterSpace.build((RATE, ["tau"]), (PRECISION, ["lambda"]))
    levels = range(1, spec.max_level + 1)
    precisions = ["lambda"] if spec.precisions == "homogeneous" else [f"lambda_{m}" for m in levels]
    beliefs = []
    if spec.precision_beliefs == "general":
        beliefs = [belief_parameter_name(path) for path in belief_paths(spec.max_level, spec.population_beliefs)]
    return ParameterSpace.build(
        (PROPORTION, [f"alpha_{m}" for m in levels]),
        (PRECISION, precisions + beliefs),
    )


class VariantModel(BehavioralModel):
    def __init__(self, name: str, spec: ModelSpec):
        super().__init__(name, spec, variant_space(spec))

    def _masses(self, theta: ParameterVector) -> np.ndarray:
        if self.spec.max_level == "poisson":
            return poisson_levels(theta["tau"]).masses
        return tabular_levels([theta[f"alpha_{m}"] for m in range(1, self.spec.max_level + 1)]).masses

    def _own_precision(self, theta: ParameterVector, level: int) -> float:
        if self.spec.precisions == "homogeneous":
            return theta["lambda"]
        return theta[f"lambda_{level}"]

    def hierarchy(self, game: Game, theta: ParameterVector) -> BeliefHierarchy:
        self.check(theta)
        accurate = self.spec.precision_beliefs == "accurate"

        def respond(role: int, path: Tuple[int, ...], mixture: np.ndarray) -> np.ndarray:
            if accurate or len(path) == 1:
                precision = self._own_precision(theta, path[-1])
            else:
                precision = theta[belief_parameter_name(path)]
            return quantal_best_response(game, role, mixture, precision)

        return BeliefHierarchy(
            game,
            self._masses(theta),
            self.spec.population_beliefs,
            respond=respond,
            key=(lambda path: path[-1]) if accurate else (lambda path: path),
        )

    def predict(self, game: Game, player: int, theta: ParameterVector) -> np.ndarray:
        return self.hierarchy(game, theta).population(player)

    def predict_profile(self, game: Game, theta: ParameterVector) -> Tuple[np.ndarray, np.ndarray]:
        hierarchy = self.hierarchy(game, theta)
        return hierarchy.population(1), hierarchy.population(2)


def predict_variant(game: Game, player: int, spec: ModelSpec, theta: ParameterVector) -> np.ndarray:
    return VariantModel(spec.variant_name, spec).predict(game, player, theta)


class VariantFamily(ModelFamily):
    def __init__(self):
        super().__init__("variants")
        self.description = "QLk/QCH variants over levels, population beliefs, precisions and precision beliefs"
        self._specs: Dict[str, ModelSpec] = {}

    def get_models(self) -> List[str]:
        return list(TABLE_VARIANTS)

    def can_handle(self, model_name: str) -> bool:
        return model_name == "QLk1" or VARIANT_PATTERN.match(model_name) is not None

    def nested_in(self, model_name: str) -> List[str]:
        # zero mass on the top level reduces a variant to the same variant one level down
        match = VARIANT_PATTERN.match(model_name)
        if not match or match["level"] == "p":
            return []
        prefix = model_name[: match.start("level")]
        return [f"{prefix}{level}" for level in range(NESTED_FROM_LEVEL, int(match["level"]))]

    def create(self, model_name: str) -> BehavioralModel:
        spec = parse_variant_name(model_name)
        logger.debug(f"Created {model_name} with {len(variant_space(spec))} parameters")
        return VariantModel(model_name, spec)
