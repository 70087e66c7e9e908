import argparse
import logging
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd

from commands.command_interface import CommandPlugin, CommandResult, add_data_arguments
from datasets import DatasetError, FeatureFilter, game_features
from game import Game, GameError, normalize_payoffs
from qre import QreConvergenceError, qre_path
from reports import write_report


class GamesPlugin(CommandPlugin):
    def __init__(self):
        super().__init__("games")
        self.description = "Game classification and QRE continuation paths"
        self.logger = logging.getLogger(f"command.{self.name}")

    def get_commands(self) -> List[str]:
        return ["classify", "qre-path"]

    def configure_parser(self, command: str, parser: argparse.ArgumentParser) -> None:
        if command == "classify":
            parser.add_argument("--games", nargs="*", default=[], help="game JSON files")
            add_data_arguments(parser)
        elif command == "qre-path":
            parser.add_argument("--game", required=True, help="game JSON file")
            parser.add_argument("--lambda-max", type=float)
            parser.add_argument("--steps", type=int)
            parser.add_argument("--out", help="output directory")

    async def handle_command(self, command: str, args: argparse.Namespace, app) -> Optional[CommandResult]:
        self.logger.info(f"Handling {command} command")
        if command == "classify":
            return await self._handle_classify(args, app)
        elif command == "qre-path":
            return await self._handle_qre_path(args, app)
        return None

    def _collect_games(self, args: argparse.Namespace, app, failures: Dict[str, str]) -> List[Game]:
        games = []
        for path in args.games:
            try:
                games.append(normalize_payoffs(Game.from_json(Path(path))))
            except (GameError, OSError) as e:
                failures[str(path)] = str(e)
        if args.manifest:
            run = app.run_config("classify", args, section="games")
            run.feature_filter = None
            dataset = app.load_data(run)
            games.extend(dataset.games[gid] for gid in sorted(dataset.games))
        return games

    async def _handle_classify(self, args: argparse.Namespace, app) -> CommandResult:
        failures: Dict[str, str] = {}
        try:
            games = self._collect_games(args, app, failures)
        except DatasetError as e:
            return CommandResult(False, f"❌ {e}")
        if not games and not failures:
            return CommandResult(False, "❌ Give --games or --manifest")

        rows = []
        for game in games:
            try:
                rows.append(game_features(game))
            except DatasetError as e:
                self.logger.error(f"Classification failed for {game.id}: {e}", exc_info=True)
                failures[game.id] = str(e)

        run = app.run_config("classify", args, section="games", games=[str(p) for p in args.games] or None)
        out = app.output_dir(run)
        header = run.as_header()
        table = pd.DataFrame(rows)
        counts = pd.DataFrame(
            [
                (f.value, f.description, int(table[f.value].sum()) if len(table) else 0)
                for f in FeatureFilter
            ],
            columns=["feature", "description", "games"],
        )
        outputs = [
            await write_report(out / "classification.csv", table, header),
            await write_report(out / "feature_counts.csv", counts, header),
        ]
        message = f"🎲 Classified {len(rows)} games"
        return CommandResult(not failures, message, outputs, failures)

    async def _handle_qre_path(self, args: argparse.Namespace, app) -> CommandResult:
        lambda_max = args.lambda_max if args.lambda_max is not None else app.config.setting("games", "lambda_max", 10.0)
        steps = args.steps if args.steps is not None else app.config.setting("games", "path_steps", 100)
        try:
            game = normalize_payoffs(Game.from_json(Path(args.game)))
            points = qre_path(game, float(lambda_max), int(steps))
        except (GameError, OSError) as e:
            return CommandResult(False, f"❌ {e}")
        except QreConvergenceError as e:
            return CommandResult(False, f"❌ QRE path stalled at lambda={e.precision:.4g} (residual {e.residual:.3g})")

        rows = []
        for point in points:
            row = {"precision": point.precision, "residual": point.residual}
            row.update({f"row_{i}": p for i, p in enumerate(point.profile.row)})
            row.update({f"column_{j}": p for j, p in enumerate(point.profile.column)})
            rows.append(row)

        run = app.run_config("qre-path", args, section="games", game=args.game, lambda_max=lambda_max, steps=steps)
        out = app.output_dir(run)
        path = await write_report(out / f"qre_path_{game.id}.csv", pd.DataFrame(rows), run.as_header())
        return CommandResult(True, f"🎲 {len(points)} QRE path points for {game.id}", [path])
