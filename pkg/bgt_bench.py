#!/usr/bin/env python3
"""
Behavioral game theory bench
Command-line front end: classification, QRE paths, cross-validated model
comparison, posterior analysis and synthetic data generation
"""
import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import Any, List, Optional

from commands.command_manager import CommandManager
from config import AnalysisConfig, RunConfig
from datasets import DatasetError, filter_by_feature, load_dataset, merge_datasets, subsample_combine
from estimation import Dataset
from models.registry import ModelRegistry
from utils.logging_setup import setup_logging

logger = logging.getLogger("bgt.bench")


class BenchApp:
    """Shared state handed to every command plugin"""

    def __init__(self, config: Optional[AnalysisConfig] = None, registry: Optional[ModelRegistry] = None,
                 command_manager: Optional[CommandManager] = None):
        self.config = config or AnalysisConfig()
        if registry is None:
            registry = ModelRegistry(family_config=self.config.model_family_config())
            registry.discover()
        self.registry = registry
        self.command_manager = command_manager or CommandManager()
        self.max_workers = self.config.max_workers

    async def setup(self) -> None:
        await self.command_manager.discover_and_load_plugins(self)

    def build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(prog="bgt_bench", description="Behavioral game theory model bench")
        parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
        subparsers = parser.add_subparsers(dest="command", required=True)
        self.command_manager.build_parsers(subparsers)
        return parser

    def _setting(self, args: argparse.Namespace, flag: str, section: str, name: str, default: Any) -> Any:
        value = getattr(args, flag, None)
        return value if value is not None else self.config.setting(section, name, default)

    def run_config(self, command: str, args: argparse.Namespace, section: str = "cv", **extra: Any) -> RunConfig:
        """RunConfig from command-line flags, falling back to analysis.yaml and the environment"""
        models = getattr(args, "models", None)
        if models is None:
            models = self.config.setting(section, "models", [])
        if isinstance(models, str):
            models = [m.strip() for m in models.split(",") if m.strip()]
        seed = getattr(args, "seed", None)
        if seed is None:
            seed = self.config.seed
        return RunConfig(
            command=command,
            models=list(models or []),
            manifests=[str(Path(m)) for m in getattr(args, "manifest", []) or []],
            feature_filter=getattr(args, "feature_filter", None),
            folds=int(self._setting(args, "folds", "cv", "folds", 10)),
            rounds=int(self._setting(args, "rounds", "cv", "rounds", 10)),
            fold_unit=str(self._setting(args, "fold_unit", "cv", "fold_unit", "obs")),
            restarts=int(self._setting(args, "restarts", "cv", "restarts", 10)),
            seed=seed,
            output_dir=str(getattr(args, "out", None) or self.config.output_dir),
            combine_per=getattr(args, "combine_per", None),
            extra={k: v for k, v in extra.items() if v is not None},
        )

    def load_data(self, run: RunConfig) -> Dataset:
        """Load every manifest, optionally subsample and combine, then apply the feature filter"""
        if not run.manifests:
            raise DatasetError("no --manifest given")
        datasets = [load_dataset(path) for path in run.manifests]
        if run.combine_per is not None:
            dataset = subsample_combine(datasets, run.combine_per, run.seed if run.seed is not None else 0)
        else:
            dataset = merge_datasets(datasets)
        if run.feature_filter:
            dataset = filter_by_feature(dataset, run.feature_filter)
        return dataset

    def output_dir(self, run: RunConfig) -> Path:
        path = Path(run.output_dir)
        path.mkdir(parents=True, exist_ok=True)
        return path

    async def run(self, argv: Optional[List[str]] = None) -> int:
        """Parse arguments, dispatch the command; 0 iff every requested output was produced"""
        parser = self.build_parser()
        args = parser.parse_args(argv)
        if args.log_level:
            setup_logging(args.log_level, self.config.log_file)
        result = await self.command_manager.handle_command(args.command, args)
        if result.message:
            print(result.message)
        for path in result.outputs:
            print(f"📄 {path}")
        for item, error in result.failures.items():
            print(f"❌ {item}: {error}")
        return 0 if result.ok else 1

    async def cleanup(self) -> None:
        await self.command_manager.cleanup()


async def main(argv: Optional[List[str]] = None) -> int:
    config = AnalysisConfig()
    setup_logging(config.log_level, config.log_file)
    app = BenchApp(config)
    try:
        await app.setup()
        return await app.run(argv)
    finally:
        await app.cleanup()


if __name__ == "__main__":
    try:
        sys.exit(asyncio.run(main()))
    except KeyboardInterrupt:
        print("\n👋 Interrupted")
        sys.exit(130)
