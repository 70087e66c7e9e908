import argparse
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional


@dataclass
class CommandResult:
    """Outcome of one command; ok is False when any requested output is missing"""
    ok: bool
    message: str = ""
    outputs: List[Path] = field(default_factory=list)
    failures: Dict[str, str] = field(default_factory=dict)


class CommandPlugin(ABC):
    """Base interface that all command plugins must implement"""

    def __init__(self, name: str):
        self.name = name
        self.enabled = True
        self.version = "1.0.0"
        self.description = "A bench command plugin"

    @abstractmethod
    def get_commands(self) -> List[str]:
        """Return list of commands this plugin handles"""
        pass

    def configure_parser(self, command: str, parser: argparse.ArgumentParser) -> None:
        """Add the command's flags to its sub-parser"""
        pass

    @abstractmethod
    async def handle_command(self, command: str, args: argparse.Namespace, app) -> Optional[CommandResult]:
        """Handle a command and return its result, or None if not handled"""
        pass

    async def initialize(self, app) -> bool:
        """Initialize plugin with the application. Return True if successful."""
        return True

    async def cleanup(self):
        """Cleanup when the application shuts down"""
        pass

    def can_handle(self, command: str) -> bool:
        return command in self.get_commands()

    def get_info(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "version": self.version,
            "description": self.description,
            "enabled": self.enabled,
            "commands": self.get_commands(),
        }


def add_data_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--manifest", action="append", default=[], help="dataset manifest (repeatable)")
    parser.add_argument("--filter", dest="feature_filter", help="keep only games with this feature (D1, DS, ND, ...)")
    parser.add_argument("--combine-per", type=int, help="subsample this many observations from every manifest")
    parser.add_argument("--seed", type=int, help="master random seed")
    parser.add_argument("--out", help="output directory")


def add_fold_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--folds", type=int)
    parser.add_argument("--rounds", type=int)
    parser.add_argument("--fold-unit", choices=["obs", "game"])
    parser.add_argument("--restarts", type=int)
