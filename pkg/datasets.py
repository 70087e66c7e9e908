"""
Dataset ingestion and manipulation
Manifests, observation CSVs, unit normalization, combined-dataset
subsampling, feature filters and synthetic data generation
"""
import json
import logging
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from estimation import Dataset, Observation, work_item_seed
from game import Game, GameError, classify_dominance, enumerate_nash, normalize_payoffs
from models.model_interface import BehavioralModel, ParameterVector

logger = logging.getLogger("bgt.datasets")

OBSERVATION_COLUMNS = ["game_id", "player_role", "action_index", "count"]
MANIFEST_NAME = "manifest.json"

PathLike = Union[str, Path]


class DatasetError(ValueError):
    """Malformed or inconsistent dataset input; carries the location when known"""

    def __init__(self, message: str, path: Optional[PathLike] = None, line: Optional[int] = None, column: Optional[int] = None):
        self.path = Path(path) if path is not None else None
        self.line = line
        self.column = column
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f": line {line}"
            if column is not None:
                where += f" column {column}"
            where += ": "
        super().__init__(where + message)


@dataclass(frozen=True)
class DatasetManifest:
    source: str
    unit_factor: float
    games: Tuple[Path, ...]
    observations: Path

    def __post_init__(self):
        if not self.unit_factor > 0:
            raise DatasetError(f"unit_factor must be positive, got {self.unit_factor}")

    def to_dict(self, base_dir: Optional[Path] = None) -> Dict:
        def rel(path: Path) -> str:
            if base_dir is not None:
                try:
                    return path.relative_to(base_dir).as_posix()
                except ValueError:
                    pass
            return path.as_posix()

        return {
            "source": self.source,
            "unit_factor": self.unit_factor,
            "games": [rel(p) for p in self.games],
            "observations": rel(self.observations),
        }


def load_manifest(path: PathLike) -> DatasetManifest:
    """Read a manifest; relative paths resolve against the manifest's directory.

    `unit_factor` is cents per payoff point; `unit_dollars` gives the same
    conversion in dollars and is multiplied by 100.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DatasetError("manifest not found", path) from None
    except json.JSONDecodeError as e:
        raise DatasetError(e.msg, path, e.lineno, e.colno) from e
    missing = [key for key in ("source", "games", "observations") if key not in data]
    if missing:
        raise DatasetError(f"manifest is missing {', '.join(missing)}", path)
    if "unit_dollars" in data:
        unit_factor = float(data["unit_dollars"]) * 100.0
    else:
        unit_factor = float(data.get("unit_factor", 1.0))
    base = path.parent
    games = tuple((base / p) for p in data["games"])
    observations = base / data["observations"]
    for referenced in games + (observations,):
        if not referenced.exists():
            raise DatasetError(f"referenced file {referenced} does not exist", path)
    try:
        return DatasetManifest(str(data["source"]), unit_factor, games, observations)
    except DatasetError as e:
        raise DatasetError(str(e), path) from e


def _load_game(path: Path, unit_factor: float) -> Game:
    try:
        game = Game.from_json(path)
    except GameError as e:
        raise DatasetError(str(e), path) from e
    if game.unit_factor != 1.0 and game.unit_factor != unit_factor:
        logger.warning(
            f"Game {game.id} declares unit_factor {game.unit_factor}, manifest says {unit_factor}; using the manifest"
        )
    return normalize_payoffs(game.with_payoffs(game.payoffs, unit_factor=unit_factor))


def _read_observations(path: Path, games: Dict[str, Game]) -> List[Observation]:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.ParserError as e:
        raise DatasetError(str(e), path) from e
    except pd.errors.EmptyDataError:
        raise DatasetError("observation file is empty", path, 1) from None
    if list(frame.columns) != OBSERVATION_COLUMNS:
        raise DatasetError(f"expected header {','.join(OBSERVATION_COLUMNS)}, got {','.join(frame.columns)}", path, 1)

    observations = []
    for row_number, row in enumerate(frame.itertuples(index=False), start=2):
        values = {}
        for col_number, name in enumerate(OBSERVATION_COLUMNS[1:], start=2):
            raw = getattr(row, name).strip()
            if not re.fullmatch(r"-?\d+", raw):
                raise DatasetError(f"{name} must be an integer, got {raw!r}", path, row_number, col_number)
            values[name] = int(raw)
        game_id = row.game_id.strip()
        game = games.get(game_id)
        if game is None:
            raise DatasetError(f"unknown game {game_id!r}", path, row_number, 1)
        if values["player_role"] not in (1, 2):
            raise DatasetError(f"player_role must be 1 or 2, got {values['player_role']}", path, row_number, 2)
        if not 0 <= values["action_index"] < game.num_actions(values["player_role"]):
            raise DatasetError(
                f"action_index {values['action_index']} out of range for game {game_id!r}", path, row_number, 3
            )
        if values["count"] < 1:
            raise DatasetError(f"count must be at least 1, got {values['count']}", path, row_number, 4)
        observations.append(Observation(game_id, values["player_role"], values["action_index"], values["count"]))
    return observations


def load_dataset(manifest: Union[DatasetManifest, PathLike]) -> Dataset:
    if not isinstance(manifest, DatasetManifest):
        manifest = load_manifest(manifest)
    games: Dict[str, Game] = {}
    for path in manifest.games:
        game = _load_game(path, manifest.unit_factor)
        if game.id in games:
            raise DatasetError(f"duplicate game id {game.id!r}", path)
        games[game.id] = game
    observations = _read_observations(manifest.observations, games)
    dataset = Dataset(games, tuple(observations), manifest.source)
    logger.info(f"Loaded {manifest.source}: {len(games)} games, {dataset.size} observations")
    return dataset


def _file_stem(game_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", game_id)


def save_dataset(dataset: Dataset, directory: PathLike) -> Path:
    """Write games, observations and a manifest; returns the manifest path"""
    directory = Path(directory)
    games_dir = directory / "games"
    games_dir.mkdir(parents=True, exist_ok=True)
    game_paths = []
    used = set()
    for game_id in sorted(dataset.games):
        stem = _file_stem(game_id)
        while stem in used:
            stem += "_"
        used.add(stem)
        path = games_dir / f"{stem}.json"
        dataset.games[game_id].to_json(path)
        game_paths.append(path)
    observations = directory / "observations.csv"
    frame = pd.DataFrame(
        [(o.game_id, o.player_role, o.action, o.count) for o in dataset.observations],
        columns=OBSERVATION_COLUMNS,
    )
    frame.to_csv(observations, index=False, encoding="utf-8")
    manifest = DatasetManifest(dataset.source or directory.name, 1.0, tuple(game_paths), observations)
    manifest_path = directory / MANIFEST_NAME
    manifest_path.write_text(json.dumps(manifest.to_dict(directory), indent=2) + "\n", encoding="utf-8")
    return manifest_path


def merge_datasets(datasets: Sequence[Dataset]) -> Dataset:
    """Union of datasets; game ids are prefixed with their source when more than one source is merged"""
    if not datasets:
        raise DatasetError("nothing to merge")
    if len(datasets) == 1:
        return datasets[0]
    sources = [ds.source or f"source{i}" for i, ds in enumerate(datasets)]
    if len(set(sources)) != len(sources):
        raise DatasetError(f"merged datasets need distinct sources, got {sources}")
    games: Dict[str, Game] = {}
    observations: List[Observation] = []
    for source, ds in zip(sources, datasets):
        for gid, game in ds.games.items():
            games[f"{source}/{gid}"] = game.renamed(f"{source}/{gid}")
        observations.extend(
            Observation(f"{source}/{o.game_id}", o.player_role, o.action, o.count) for o in ds.observations
        )
    return Dataset(games, tuple(observations), "+".join(sources))


def subsample_combine(datasets: Sequence[Dataset], n_per: int, seed: int) -> Dataset:
    """n_per unit observations drawn without replacement from every source, then merged"""
    samples = []
    for i, ds in enumerate(datasets):
        if ds.size < n_per:
            raise DatasetError(f"source {ds.source!r} has {ds.size} observations, fewer than {n_per}")
        rng = np.random.default_rng(work_item_seed(seed, i))
        units = np.sort(rng.choice(ds.size, size=n_per, replace=False))
        samples.append(ds.from_units(units))
    combined = merge_datasets(samples)
    logger.info(f"Combined {len(datasets)} sources at {n_per} observations each: {combined.size} observations")
    return combined


class FeatureFilter(str, Enum):
    D1 = "D1"
    D2 = "D2"
    D2s = "D2s"
    DS = "DS"
    DSs = "DSs"
    ND = "ND"
    PSNE1 = "PSNE1"
    MSNE1 = "MSNE1"
    MultiEqm = "MultiEqm"

    @property
    def description(self) -> str:
        return _DESCRIPTIONS[self]

    @classmethod
    def parse(cls, name: str) -> "FeatureFilter":
        try:
            return cls(name)
        except ValueError:
            raise DatasetError(f"unknown feature filter {name!r}; choose from {[f.value for f in cls]}") from None

    def game_matches(self, game: Game) -> bool:
        features = game_features(game)
        return bool(features[self.value])


_DESCRIPTIONS = {
    FeatureFilter.D1: "Weak dominance solvable in one round",
    FeatureFilter.D2: "Weak dominance solvable in two rounds",
    FeatureFilter.D2s: "Strict dominance solvable in two rounds",
    FeatureFilter.DS: "Weak dominance solvable",
    FeatureFilter.DSs: "Strict dominance solvable",
    FeatureFilter.ND: "Not weak dominance solvable",
    FeatureFilter.PSNE1: "Single pure-strategy Nash equilibrium",
    FeatureFilter.MSNE1: "Single Nash equilibrium, in mixed strategies",
    FeatureFilter.MultiEqm: "Multiple Nash equilibria",
}


def game_features(game: Game) -> Dict[str, object]:
    """Dominance and equilibrium structure of one game, with a flag per feature filter"""
    try:
        dominance = classify_dominance(game)
        equilibria = enumerate_nash(game)
    except GameError as e:
        raise DatasetError(f"cannot classify game {game.id!r}: {e}") from e
    weak_rounds = dominance.rounds_weak
    strict_rounds = dominance.rounds_strict
    structure = equilibria.structure
    return {
        "game_id": game.id,
        "rows": game.shape[0],
        "columns": game.shape[1],
        "strict_solvable": dominance.solvable_strict,
        "strict_rounds": strict_rounds,
        "weak_solvable": dominance.solvable_weak,
        "weak_rounds": weak_rounds,
        "equilibria": len(equilibria),
        "structure": structure,
        "degenerate": equilibria.degenerate,
        "D1": weak_rounds is not None and weak_rounds <= 1,
        "D2": weak_rounds is not None and weak_rounds <= 2,
        "D2s": strict_rounds is not None and strict_rounds <= 2,
        "DS": dominance.solvable_weak,
        "DSs": dominance.solvable_strict,
        "ND": not dominance.solvable_weak,
        "PSNE1": structure == "single-pure",
        "MSNE1": structure == "single-mixed",
        "MultiEqm": structure == "multiple",
    }


def filter_by_feature(datasets: Union[Dataset, Sequence[Dataset]], feature: Union[FeatureFilter, str]) -> Dataset:
    """Games satisfying the feature, with all of their observations"""
    if isinstance(datasets, Dataset):
        datasets = [datasets]
    feature = feature if isinstance(feature, FeatureFilter) else FeatureFilter.parse(feature)
    pool = merge_datasets(list(datasets))
    kept = [gid for gid, game in pool.games.items() if feature.game_matches(game)]
    filtered = pool.restrict_games(kept, source=f"{pool.source}[{feature.value}]")
    logger.info(f"Filter {feature.value}: kept {len(kept)} of {len(pool.games)} games, {filtered.size} observations")
    return filtered


def generate_synthetic(model: BehavioralModel, theta: ParameterVector, games: Sequence[Game],
                       n_obs: int, seed: int, source: str = "synthetic") -> Dataset:
    """i.i.d. draws from the model's predictions, spread evenly over every (game, role) cell"""
    theta = model.check(theta)
    if n_obs < 0:
        raise DatasetError(f"n_obs must be non-negative, got {n_obs}")
    if not games:
        raise DatasetError("need at least one game to generate observations")
    rng = np.random.default_rng(work_item_seed(seed))
    cells = [(game, role) for game in games for role in (1, 2)]
    per_cell, extra = divmod(n_obs, len(cells))
    observations = []
    profiles = {}
    for i, (game, role) in enumerate(cells):
        if game.id not in profiles:
            profiles[game.id] = model.predict_profile(game, theta)
        probs = profiles[game.id][role - 1]
        draws = rng.multinomial(per_cell + (1 if i < extra else 0), probs / probs.sum())
        observations.extend(Observation(game.id, role, action, int(n)) for action, n in enumerate(draws) if n > 0)
    return Dataset({game.id: game for game in games}, tuple(observations), source)
