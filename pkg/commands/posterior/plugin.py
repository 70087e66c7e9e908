import argparse
import asyncio
import logging
from typing import Dict, List, Optional

from commands.command_interface import CommandPlugin, CommandResult, add_data_arguments
from datasets import DatasetError
from models.model_interface import ParameterError
from posterior import PosteriorSampleSet, WeightCollapseError, ais_posterior, grid_posterior_1d
from reports import posterior_cdf_frame, posterior_diagnostics, posterior_interval_frame, write_report


class PosteriorPlugin(CommandPlugin):
    def __init__(self):
        super().__init__("posterior")
        self.description = "Bayesian posterior analysis by grid or annealed importance sampling"
        self.logger = logging.getLogger(f"command.{self.name}")

    def get_commands(self) -> List[str]:
        return ["posterior"]

    def configure_parser(self, command: str, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--models", help="comma-separated model names")
        parser.add_argument("--method", choices=["grid", "ais"])
        parser.add_argument("--grid-lo", type=float)
        parser.add_argument("--grid-hi", type=float)
        parser.add_argument("--grid-step", type=float)
        parser.add_argument("--samples", type=int, help="AIS chains")
        parser.add_argument("--masses", help="comma-separated credible masses, e.g. 0.95,0.99")
        add_data_arguments(parser)

    def _option(self, args: argparse.Namespace, app, name: str, default):
        value = getattr(args, name, None)
        return value if value is not None else app.config.setting("posterior", name, default)

    async def handle_command(self, command: str, args: argparse.Namespace, app) -> Optional[CommandResult]:
        if command != "posterior":
            return None
        method = self._option(args, app, "method", "grid")
        masses = self._option(args, app, "masses", [0.95, 0.99])
        if isinstance(masses, str):
            masses = [float(m) for m in masses.split(",") if m.strip()]
        options = {
            "method": method,
            "grid_lo": float(self._option(args, app, "grid_lo", 0.0)),
            "grid_hi": float(self._option(args, app, "grid_hi", 10.0)),
            "grid_step": float(self._option(args, app, "grid_step", 0.01)),
            "samples": int(self._option(args, app, "samples", 1000)),
            "masses": [float(m) for m in masses],
        }
        run = app.run_config("posterior", args, section="posterior", **options)
        valid, error = run.validate(app.registry)
        if not valid:
            return CommandResult(False, f"❌ {error}")
        if not run.models:
            return CommandResult(False, "❌ No models given (--models or posterior.models in analysis.yaml)")
        try:
            dataset = app.load_data(run)
        except DatasetError as e:
            return CommandResult(False, f"❌ {e}")

        out = app.output_dir(run)
        outputs = []
        failures: Dict[str, str] = {}
        for name in run.models:
            model = app.registry.resolve(name)
            try:
                if method == "grid":
                    grid = await asyncio.to_thread(
                        grid_posterior_1d, model, dataset, options["grid_lo"], options["grid_hi"], options["grid_step"]
                    )
                    values, probabilities = zip(*grid)
                    samples = PosteriorSampleSet.from_grid(model.space.names[0], values, probabilities)
                else:
                    samples = await asyncio.to_thread(
                        ais_posterior, model, dataset, options["samples"], seed=run.seed, max_workers=app.max_workers
                    )
            except (WeightCollapseError, ParameterError, ValueError) as e:
                self.logger.error(f"Posterior for {name} failed: {e}", exc_info=True)
                failures[name] = str(e)
                continue

            header = run.as_header()
            header["posterior"] = {"model": name, "observations": dataset.size, **posterior_diagnostics(samples)}
            outputs.append(await write_report(out / f"posterior_{name}_cdf.csv", posterior_cdf_frame(samples), header))
            outputs.append(await write_report(
                out / f"posterior_{name}_intervals.csv", posterior_interval_frame(samples, options["masses"]), header
            ))
            outputs.append(await write_report(out / f"posterior_{name}_samples.csv", samples.to_frame(), header))

        message = f"🔭 Posterior ({method}) for {len(run.models) - len(failures)} of {len(run.models)} models"
        return CommandResult(not failures, message, outputs, failures)
