"""
Behavioral model interface
Model specs, named parameter vectors with their constraints, and the
base classes that every model family plugin implements
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit, logit, softmax

from game import Game

PROPORTION = "proportion"
PRECISION = "precision"
RATE = "rate"
PROBABILITY = "probability"
KINDS = (PROPORTION, PRECISION, RATE, PROBABILITY)

FAMILIES = ("uniform", "QRE", "Lk", "PoissonCH", "QLk", "VariantGrid", "SpikePoissonQCH", "NEE")

_FLOOR = 1e-12
_SUM_TOLERANCE = 1e-9


class ParameterError(ValueError):
    """Raised when a parameter vector does not fit a model's parameter space"""


@dataclass(frozen=True)
class ModelSpec:
    family: str
    max_level: Union[int, str, None] = None
    population_beliefs: Optional[str] = None
    precisions: Optional[str] = None
    precision_beliefs: Optional[str] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown model family {self.family!r}")
        axes = (self.population_beliefs, self.precisions, self.precision_beliefs)
        if self.family != "VariantGrid":
            if any(axis is not None for axis in axes):
                raise ParameterError(f"variant axes only apply to VariantGrid models, not {self.family}")
            return
        if self.population_beliefs not in ("Lk", "CH"):
            raise ParameterError(f"population beliefs must be Lk or CH, got {self.population_beliefs!r}")
        if self.precisions not in ("homogeneous", "inhomogeneous"):
            raise ParameterError(f"precisions must be homogeneous or inhomogeneous, got {self.precisions!r}")
        if self.precision_beliefs not in ("accurate", "general"):
            raise ParameterError(f"precision beliefs must be accurate or general, got {self.precision_beliefs!r}")
        if self.max_level == "poisson":
            if self.precisions != "homogeneous" or self.precision_beliefs != "accurate":
                raise ParameterError("Poisson level distributions are only defined for ah variants")
        elif not (isinstance(self.max_level, int) and self.max_level >= 1):
            raise ParameterError(f"max level must be a positive integer or 'poisson', got {self.max_level!r}")

    @property
    def variant_name(self) -> str:
        """Naming used for the variant grid, e.g. ah-QCH3 or gi-QLk2"""
        prefix = ("a" if self.precision_beliefs == "accurate" else "g") + (
            "h" if self.precisions == "homogeneous" else "i"
        )
        level = "p" if self.max_level == "poisson" else str(self.max_level)
        return f"{prefix}-Q{self.population_beliefs}{level}"


@dataclass(frozen=True)
class ParameterSpace:
    """Ordered parameter names with their kinds; proportions share one simplex"""
    names: Tuple[str, ...]
    kinds: Tuple[str, ...]

    def __post_init__(self):
        if len(self.names) != len(self.kinds):
            raise ParameterError("every parameter needs exactly one kind")
        if len(set(self.names)) != len(self.names):
            raise ParameterError(f"duplicate parameter names in {self.names}")
        unknown = [k for k in self.kinds if k not in KINDS]
        if unknown:
            raise ParameterError(f"unknown parameter kinds {unknown}")

    @classmethod
    def build(cls, *groups: Tuple[str, Sequence[str]]) -> "ParameterSpace":
        names: List[str] = []
        kinds: List[str] = []
        for kind, group in groups:
            names.extend(group)
            kinds.extend([kind] * len(group))
        return cls(tuple(names), tuple(kinds))

    def __len__(self) -> int:
        return len(self.names)

    def indices(self, kind: str) -> np.ndarray:
        return np.array([i for i, k in enumerate(self.kinds) if k == kind], dtype=int)

    def kind_of(self, name: str) -> str:
        try:
            return self.kinds[self.names.index(name)]
        except ValueError:
            raise ParameterError(f"unknown parameter {name!r}; expected one of {list(self.names)}") from None

    def validate(self, values: Sequence[float]) -> np.ndarray:
        array = np.array(values, dtype=float).reshape(-1)
        if array.size != len(self.names):
            raise ParameterError(f"expected {len(self.names)} parameters {list(self.names)}, got {array.size}")
        if not np.all(np.isfinite(array)):
            raise ParameterError("parameters must be finite")
        for name, kind, value in zip(self.names, self.kinds, array):
            if kind == PROBABILITY and not 0.0 <= value <= 1.0:
                raise ParameterError(f"{name} must lie in [0, 1], got {value}")
            if kind in (PRECISION, RATE) and value < 0.0:
                raise ParameterError(f"{name} must be non-negative, got {value}")
            if kind == PROPORTION and not 0.0 <= value <= 1.0:
                raise ParameterError(f"{name} must lie in [0, 1], got {value}")
        proportions = array[self.indices(PROPORTION)]
        if proportions.sum() > 1.0 + _SUM_TOLERANCE:
            raise ParameterError(f"level proportions sum to {proportions.sum():.12g} > 1")
        return array

    def vector(self, values: Union[Sequence[float], Mapping[str, float]]) -> "ParameterVector":
        if isinstance(values, Mapping):
            missing = [n for n in self.names if n not in values]
            extra = [n for n in values if n not in self.names]
            if missing or extra:
                raise ParameterError(f"parameter mismatch: missing {missing}, unexpected {extra}")
            values = [values[n] for n in self.names]
        array = self.validate(values)
        return ParameterVector(self.names, tuple(float(v) for v in array))

    # Unconstrained reparameterization used by the optimizer.
    def to_unconstrained(self, values: Sequence[float]) -> np.ndarray:
        array = self.validate(values)
        z = np.zeros_like(array)
        props = self.indices(PROPORTION)
        if props.size:
            alpha = np.clip(array[props], _FLOOR, None)
            alpha0 = max(1.0 - array[props].sum(), _FLOOR)
            z[props] = np.log(alpha) - np.log(alpha0)
        positive = np.concatenate([self.indices(PRECISION), self.indices(RATE)])
        if positive.size:
            x = np.clip(array[positive], _FLOOR, None)
            z[positive] = x + np.log(-np.expm1(-x))
        probs = self.indices(PROBABILITY)
        if probs.size:
            z[probs] = logit(np.clip(array[probs], _FLOOR, 1.0 - _FLOOR))
        return z

    def from_unconstrained(self, z: Sequence[float]) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        values = np.zeros_like(z)
        props = self.indices(PROPORTION)
        if props.size:
            values[props] = softmax(np.concatenate([[0.0], z[props]]))[1:]
        positive = np.concatenate([self.indices(PRECISION), self.indices(RATE)])
        if positive.size:
            values[positive] = np.logaddexp(0.0, z[positive])
        probs = self.indices(PROBABILITY)
        if probs.size:
            values[probs] = expit(z[probs])
        return values


@dataclass(frozen=True)
class ParameterVector:
    names: Tuple[str, ...]
    values: Tuple[float, ...]

    def __getitem__(self, name: str) -> float:
        try:
            return self.values[self.names.index(name)]
        except ValueError:
            raise ParameterError(f"unknown parameter {name!r}") from None

    def get(self, name: str, default: Optional[float] = None) -> Optional[float]:
        return self[name] if name in self.names else default

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def __len__(self) -> int:
        return len(self.names)

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(self.names, self.values))

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)

    def __str__(self) -> str:
        return ", ".join(f"{n}={v:.6g}" for n, v in zip(self.names, self.values))


class BehavioralModel(ABC):
    """A named, fully parameterized prediction model"""

    def __init__(self, name: str, spec: ModelSpec, space: ParameterSpace):
        self.name = name
        self.spec = spec
        self.space = space

    @property
    def parameter_count(self) -> int:
        return len(self.space)

    def vector(self, values: Union[Sequence[float], Mapping[str, float], None] = None, **named: float) -> ParameterVector:
        return self.space.vector(named if values is None else values)

    def check(self, theta: ParameterVector) -> ParameterVector:
        if tuple(theta.names) != self.space.names:
            raise ParameterError(
                f"model {self.name} expects parameters {list(self.space.names)}, got {list(theta.names)}"
            )
        self.space.validate(theta.values)
        return theta

    @abstractmethod
    def predict(self, game: Game, player: int, theta: ParameterVector) -> np.ndarray:
        """Predicted action distribution of `player` in `game`"""
        pass

    def predict_profile(self, game: Game, theta: ParameterVector) -> Tuple[np.ndarray, np.ndarray]:
        return self.predict(game, 1, theta), self.predict(game, 2, theta)

    def get_info(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "family": self.spec.family,
            "parameters": list(self.space.names),
            "parameter_count": self.parameter_count,
        }

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r})"


class ModelFamily(ABC):
    """Base interface that every model family plugin implements"""

    def __init__(self, name: str):
        self.name = name
        self.enabled = True
        self.version = "1.0.0"
        self.description = "A behavioral model family"

    @abstractmethod
    def get_models(self) -> List[str]:
        """Return the model names this family lists in the registry"""
        pass

    @abstractmethod
    def create(self, model_name: str) -> BehavioralModel:
        """Build the model registered under `model_name`"""
        pass

    def initialize(self, config: Dict[str, Any]) -> bool:
        """Apply family settings from the configuration. Return True if successful."""
        return True

    def can_handle(self, model_name: str) -> bool:
        return model_name in self.get_models()

    def nested_in(self, model_name: str) -> List[str]:
        """Smaller models that `model_name` nests, smallest first"""
        return []

    def get_info(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "version": self.version,
            "description": self.description,
            "enabled": self.enabled,
            "models": self.get_models(),
        }
