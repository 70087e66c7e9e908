import argparse
import logging
from typing import List, Optional

from commands.command_interface import CommandPlugin, CommandResult
from config_manager import ConfigManager


class CorePlugin(CommandPlugin):
    def __init__(self):
        super().__init__("core")
        self.description = "Core commands (help, model listing, configuration)"
        self.logger = logging.getLogger(f"command.{self.name}")
        self.config_manager = None

    async def initialize(self, app) -> bool:
        self.config_manager = ConfigManager(app.config.config_file if app is not None else None)
        return True

    def get_commands(self) -> List[str]:
        return ["help", "models", "config"]

    def configure_parser(self, command: str, parser: argparse.ArgumentParser) -> None:
        if command == "models":
            parser.add_argument("--family", help="only models of this family plugin")
        elif command == "config":
            parser.add_argument("action", nargs="?", choices=["list", "get", "set"])
            parser.add_argument("section", nargs="?")
            parser.add_argument("setting", nargs="?")
            parser.add_argument("value", nargs="*")

    async def handle_command(self, command: str, args: argparse.Namespace, app) -> Optional[CommandResult]:
        self.logger.info(f"Handling {command} command")
        if command == "help":
            return self._handle_help(app)
        elif command == "models":
            return self._handle_models(args, app)
        elif command == "config":
            return self._handle_config(args)
        return None

    def _handle_help(self, app) -> CommandResult:
        commands = app.command_manager.get_all_commands()
        by_plugin = {}
        for cmd, plugin_name in commands.items():
            by_plugin.setdefault(plugin_name, []).append(cmd)

        plugin_icons = {
            'core': '⚙️',
            'games': '🎲',
            'cv': '📊',
            'posterior': '🔭',
            'data': '💾',
        }

        lines = ["🤖 Behavioral game theory bench\n"]
        for plugin_name in sorted(by_plugin):
            icon = plugin_icons.get(plugin_name, '🔌')
            lines.append(f"{icon} {plugin_name}: {', '.join(sorted(by_plugin[plugin_name]))}")
        lines.append("\n💡 Usage: bgt_bench.py <command> --help")
        return CommandResult(True, "\n".join(lines))

    def _handle_models(self, args: argparse.Namespace, app) -> CommandResult:
        listed = app.registry.get_all_models()
        lines = ["📚 Registered models:"]
        for name, family in listed.items():
            if args.family and family != args.family:
                continue
            model = app.registry.resolve(name)
            lines.append(f"• {name} [{family}] {model.parameter_count} parameters: {', '.join(model.space.names) or '-'}")
        status = app.registry.get_family_status()
        for family, error in status["failed"].items():
            lines.append(f"❌ family {family}: {error}")
        lines.append("Variant names like gi-QCH4 or ah-QLk9 are also accepted.")
        return CommandResult(not status["failed"], "\n".join(lines))

    def _handle_config(self, args: argparse.Namespace) -> CommandResult:
        if not args.action:
            return CommandResult(True, self._get_config_help())
        if args.action == "list":
            return self._handle_config_list(args.section)
        if args.action == "get":
            return self._handle_config_get(args.section, args.setting)
        return self._handle_config_set(args.section, args.setting, args.value)

    def _get_config_help(self) -> str:
        return """⚙️ Configuration commands:
• config list <section> - Show all settings of a section
• config get <section> <setting> - Get the current value of a setting
• config set <section> <setting> <value> - Change a setting in analysis.yaml

Examples:
• config set cv folds 5
• config set posterior method ais"""

    def _handle_config_list(self, section: Optional[str]) -> CommandResult:
        if not section:
            return CommandResult(False, "❌ Usage: config list <section>")
        success, error, settings = self.config_manager.list_settings(section.lower())
        if not success:
            return CommandResult(False, f"❌ {error}")
        lines = [f"📋 {section} settings:"]
        for key, value in settings.items():
            lines.append(f"• {key}: {value}")
        return CommandResult(True, "\n".join(lines))

    def _handle_config_get(self, section: Optional[str], setting: Optional[str]) -> CommandResult:
        if not section or not setting:
            return CommandResult(False, "❌ Usage: config get <section> <setting>")
        success, error, value = self.config_manager.get_setting(section.lower(), setting)
        if not success:
            return CommandResult(False, f"❌ {error}")
        return CommandResult(True, f"⚙️ {section}.{setting} = {value}")

    def _handle_config_set(self, section: Optional[str], setting: Optional[str], value: List[str]) -> CommandResult:
        if not section or not setting or not value:
            return CommandResult(False, "❌ Usage: config set <section> <setting> <value>")
        is_valid, error, parsed_value = self.config_manager.validate_setting(section.lower(), setting, " ".join(value))
        if not is_valid:
            return CommandResult(False, f"❌ {error}")
        success, error = self.config_manager.set_setting(section.lower(), setting, parsed_value)
        if not success:
            return CommandResult(False, f"❌ {error}")
        self.config_manager.cleanup_backup()
        return CommandResult(True, f"✅ Set {section}.{setting} = {parsed_value}")
