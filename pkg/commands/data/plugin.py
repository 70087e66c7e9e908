import argparse
import logging
from pathlib import Path
from typing import List, Optional

from commands.command_interface import CommandPlugin, CommandResult, add_data_arguments
from datasets import DatasetError, generate_synthetic, save_dataset
from game import Game, GameError, normalize_payoffs
from models.model_interface import ParameterError
from models.registry import UnknownModelError


def parse_theta(pairs: List[str]) -> dict:
    """name=value pairs into a mapping"""
    theta = {}
    for pair in pairs:
        name, sep, value = pair.partition("=")
        if not sep:
            raise ParameterError(f"expected name=value, got {pair!r}")
        theta[name.strip()] = float(value)
    return theta


class DataPlugin(CommandPlugin):
    def __init__(self):
        super().__init__("data")
        self.description = "Synthetic dataset generation"
        self.logger = logging.getLogger(f"command.{self.name}")

    def get_commands(self) -> List[str]:
        return ["generate"]

    def configure_parser(self, command: str, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--model", required=True)
        parser.add_argument("--theta", nargs="*", default=[], help="parameter values as name=value")
        parser.add_argument("--games", nargs="*", default=[], help="game JSON files")
        parser.add_argument("--n-obs", type=int)
        parser.add_argument("--source", default="synthetic")
        add_data_arguments(parser)

    async def handle_command(self, command: str, args: argparse.Namespace, app) -> Optional[CommandResult]:
        if command != "generate":
            return None
        n_obs = args.n_obs if args.n_obs is not None else int(app.config.setting("data", "n_obs", 2000))
        run = app.run_config("generate", args, section="data", model=args.model, theta=args.theta, n_obs=n_obs)
        valid, error = run.validate()
        if not valid:
            return CommandResult(False, f"❌ {error}")
        try:
            model = app.registry.resolve(args.model)
            theta = model.vector(parse_theta(args.theta))
            games = [normalize_payoffs(Game.from_json(Path(p))) for p in args.games]
            if run.manifests:
                dataset = app.load_data(run)
                games.extend(dataset.games[gid] for gid in sorted(dataset.games))
            synthetic = generate_synthetic(model, theta, games, n_obs, run.seed, source=args.source)
        except (UnknownModelError, ParameterError, GameError, DatasetError, OSError) as e:
            return CommandResult(False, f"❌ {e}")

        manifest = save_dataset(synthetic, Path(run.output_dir))
        self.logger.info(f"Generated {synthetic.size} observations from {model.name} at {theta}")
        return CommandResult(True, f"💾 {synthetic.size} synthetic observations over {len(games)} games", [manifest])
