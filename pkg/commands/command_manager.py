import argparse
import importlib.util
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional

from commands.command_interface import CommandPlugin, CommandResult

COMMANDS_DIR = Path(__file__).resolve().parent

logger = logging.getLogger("bgt.commands")


class CommandManager:
    def __init__(self, commands_dir: Optional[Path] = None):
        self.plugins: Dict[str, CommandPlugin] = {}
        self.commands_dir = Path(commands_dir) if commands_dir else COMMANDS_DIR
        self.failed_plugins: Dict[str, str] = {}
        self.app = None

    async def discover_and_load_plugins(self, app) -> Dict[str, bool]:
        """Discover and load every command plugin under commands/<group>/plugin.py"""
        self.app = app
        results = {}

        for plugin_dir in sorted(self.commands_dir.iterdir()):
            if plugin_dir.is_dir() and not plugin_dir.name.startswith('__'):
                plugin_file = plugin_dir / "plugin.py"
                if plugin_file.exists():
                    plugin_name = plugin_dir.name
                    results[plugin_name] = await self.load_plugin_from_file(plugin_file, app, plugin_name)

        logger.info(f"Command discovery complete: {len(self.plugins)} loaded, {len(self.failed_plugins)} failed")
        return results

    async def load_plugin_from_file(self, plugin_file: Path, app, plugin_name: str = None) -> bool:
        """Load a specific plugin from file"""
        if plugin_name is None:
            plugin_name = plugin_file.parent.name

        try:
            module_name = f"commands.{plugin_name}.plugin"
            module = sys.modules.get(module_name)
            if module is None:
                spec = importlib.util.spec_from_file_location(module_name, plugin_file)
                if not spec or not spec.loader:
                    raise ImportError(f"Could not load spec for {plugin_file}")
                module = importlib.util.module_from_spec(spec)
                spec.loader.exec_module(module)
                sys.modules[module_name] = module

            plugin_class = None
            for attr_name in dir(module):
                attr = getattr(module, attr_name)
                if isinstance(attr, type) and issubclass(attr, CommandPlugin) and attr is not CommandPlugin:
                    plugin_class = attr
                    break

            if not plugin_class:
                raise ImportError(f"No CommandPlugin subclass found in {plugin_file}")

            plugin = plugin_class()
            if app is not None and not app.config.section_config.get(plugin.name, {}).get("enabled", True):
                plugin.enabled = False

            if await plugin.initialize(app):
                self.plugins[plugin.name] = plugin
                self.failed_plugins.pop(plugin_name, None)
                logger.debug(f"Loaded command plugin: {plugin.name} v{plugin.version}")
                return True
            raise RuntimeError("Plugin initialization failed")

        except Exception as e:
            logger.error(f"Failed to load command plugin {plugin_name}: {e}", exc_info=True)
            self.failed_plugins[plugin_name] = str(e)
            return False

    def build_parsers(self, subparsers) -> None:
        """One sub-parser per enabled command, configured by its plugin"""
        for plugin in self.plugins.values():
            if not plugin.enabled:
                continue
            for command in plugin.get_commands():
                parser = subparsers.add_parser(command, help=f"{plugin.description}")
                plugin.configure_parser(command, parser)

    async def handle_command(self, command: str, args: argparse.Namespace) -> CommandResult:
        """Dispatch to the first enabled plugin that handles the command"""
        for plugin in self.plugins.values():
            if plugin.enabled and plugin.can_handle(command):
                try:
                    result = await plugin.handle_command(command, args, self.app)
                    if result is not None:
                        return result
                except Exception as e:
                    logger.error(f"Plugin {plugin.name} error handling {command}: {e}", exc_info=True)
                    return CommandResult(False, f"{command} failed: {e}")
        return CommandResult(False, f"Unknown command: {command}")

    def get_all_commands(self) -> Dict[str, str]:
        """All available commands mapped to plugin names"""
        commands = {}
        for plugin in self.plugins.values():
            if plugin.enabled:
                for cmd in plugin.get_commands():
                    commands[cmd] = plugin.name
        return commands

    def get_plugin_status(self) -> Dict[str, Any]:
        return {
            "loaded": {name: plugin.get_info() for name, plugin in self.plugins.items()},
            "failed": self.failed_plugins,
            "total_loaded": len(self.plugins),
            "total_failed": len(self.failed_plugins),
        }

    async def cleanup(self):
        for plugin in list(self.plugins.values()):
            await plugin.cleanup()
        self.plugins.clear()
