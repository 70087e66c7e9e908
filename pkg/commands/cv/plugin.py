import argparse
import asyncio
import logging
from typing import Dict, List, Optional

import pandas as pd

from commands.command_interface import CommandPlugin, CommandResult, add_data_arguments, add_fold_arguments
from datasets import DatasetError
from estimation import CvScore, EstimationError, FitCache, FoldPlan, cross_validate, efficient_frontier, nee_bounds
from reports import (
    CV_ROUND_COLUMNS,
    chart_frame,
    cv_round_frame,
    cv_summary_row,
    frontier_frame,
    nee_summary_rows,
    summary_frame,
    write_report,
)

NEE_MODEL = "NEE"


class CrossValidationPlugin(CommandPlugin):
    def __init__(self):
        super().__init__("cv")
        self.description = "Cross-validated model comparison against the uniform baseline"
        self.logger = logging.getLogger(f"command.{self.name}")

    def get_commands(self) -> List[str]:
        return ["cv"]

    def configure_parser(self, command: str, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--models", help="comma-separated model names")
        parser.add_argument("--weak-frontier", action="store_true", help="only require beating efficient smaller models")
        add_data_arguments(parser)
        add_fold_arguments(parser)

    async def handle_command(self, command: str, args: argparse.Namespace, app) -> Optional[CommandResult]:
        if command != "cv":
            return None
        run = app.run_config("cv", args, section="cv")
        if app.config.setting("cv", "include_nee", False) and NEE_MODEL not in run.models:
            run.models.append(NEE_MODEL)
        valid, error = run.validate(app.registry)
        if not valid:
            return CommandResult(False, f"❌ {error}")
        if not run.models:
            return CommandResult(False, "❌ No models given (--models or cv.models in analysis.yaml)")

        try:
            dataset = app.load_data(run)
            plan = FoldPlan.create(dataset, run.folds, run.rounds, run.fold_unit, run.seed)
        except (DatasetError, EstimationError) as e:
            return CommandResult(False, f"❌ {e}")
        self.logger.info(
            f"Cross-validating {len(run.models)} models on {dataset.size} observations "
            f"({run.rounds} rounds x {run.folds} folds by {run.fold_unit})"
        )

        semaphore = asyncio.Semaphore(max(1, app.max_workers))
        nested_starts = bool(app.config.setting("cv", "nested_starts", True))
        fit_cache: FitCache = {}

        async def score(name: str):
            async with semaphore:
                if name == NEE_MODEL:
                    return await asyncio.to_thread(nee_bounds, dataset, plan)
                model = app.registry.resolve(name)
                nested = app.registry.nested_chain(name) if nested_starts else []
                return await asyncio.to_thread(
                    cross_validate, model, dataset, plan, run.restarts, None, nested, fit_cache
                )

        results = await asyncio.gather(*(score(name) for name in run.models), return_exceptions=True)

        label = dataset.source
        failures: Dict[str, str] = {}
        scores: Dict[str, CvScore] = {}
        counts: Dict[str, int] = {}
        summary_rows = []
        round_frames = []
        for name, result in zip(run.models, results):
            if isinstance(result, Exception):
                self.logger.error(f"Cross-validation of {name} failed: {result}", exc_info=result)
                failures[name] = str(result)
                summary_rows.append(cv_summary_row(name, label, app.registry.resolve(name).parameter_count, None, f"error: {result}"))
                continue
            if name == NEE_MODEL:
                summary_rows.extend(nee_summary_rows(label, result))
                for variant, bound in (("best", result.best), ("average", result.average), ("worst", result.worst)):
                    round_frames.append(cv_round_frame(f"NEE-{variant}", label, bound))
                continue
            counts[name] = app.registry.resolve(name).parameter_count
            scores[name] = result
            summary_rows.append(cv_summary_row(name, label, counts[name], result))
            round_frames.append(cv_round_frame(name, label, result))

        summary = summary_frame(summary_rows)
        frontier = efficient_frontier(scores, counts, weak=args.weak_frontier) if scores else []
        out = app.output_dir(run)
        header = run.as_header()
        rounds = pd.concat(round_frames, ignore_index=True) if round_frames else pd.DataFrame(columns=CV_ROUND_COLUMNS)
        outputs = [
            await write_report(out / "cv_rounds.csv", rounds, header),
            await write_report(out / "cv_summary.csv", summary, header),
            await write_report(out / "ratio_chart.csv", chart_frame(summary), header),
            await write_report(out / "frontier.csv", frontier_frame(summary[summary["model"].isin(list(scores))], frontier), header),
        ]
        message = f"📊 Cross-validated {len(run.models) - len(failures)} of {len(run.models)} models"
        if frontier:
            message += f"; efficient frontier: {', '.join(frontier)}"
        return CommandResult(not failures, message, outputs, failures)
