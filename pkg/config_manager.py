"""
Configuration Manager
Validates, reads and updates analysis.yaml settings for the config command
"""
import re
import yaml
from pathlib import Path
from typing import Dict, Any, Optional, Tuple
from config import AnalysisConfig, CONFIG_FILE

# (section, setting) -> (lowest, highest), both inclusive
INTEGER_RANGES = {
    ("cv", "folds"): (2, 100),
    ("cv", "rounds"): (1, 1000),
    ("cv", "restarts"): (1, 1000),
    ("posterior", "samples"): (1, 1_000_000),
    ("core", "max_workers"): (1, 64),
    ("data", "n_obs"): (1, 10_000_000),
    ("games", "path_steps"): (2, 100_000),
}

CHOICES = {
    ("cv", "fold_unit"): ("obs", "game"),
    ("posterior", "method"): ("grid", "ais"),
    ("core", "log_level"): ("DEBUG", "INFO", "WARNING", "ERROR"),
}

PROTECTED = {
    ("core", "output_dir"): "output_dir comes from BGT_OUTPUT_DIR or the --out flag",
}


class ConfigManager:
    """Manages configuration changes to analysis.yaml"""

    def __init__(self, config_file: Optional[Path] = None):
        self.config_file = Path(config_file) if config_file else CONFIG_FILE
        self.backup_file = self.config_file.with_suffix(".yaml.backup")

    def validate_setting(self, section: str, setting: str, value: str) -> Tuple[bool, str, Any]:
        """
        Validate a setting change
        Returns: (is_valid, error_message, parsed_value)
        """
        if not re.match(r'^[a-zA-Z_][a-zA-Z0-9_]*$', section):
            return False, "Invalid section name", None

        if not re.match(r'^[a-zA-Z_][a-zA-Z0-9_\.]*$', setting):
            return False, "Invalid setting name", None

        parsed_value = self._parse_config_value(value)

        validation_error = self._validate_section_specific(section, setting, parsed_value)
        if validation_error:
            return False, validation_error, None

        return True, "", parsed_value

    def _parse_config_value(self, value: str) -> Any:
        """Parse string value to appropriate type"""
        value = value.strip()

        if value.lower() in ['true', 'yes', 'on', 'enabled']:
            return True
        if value.lower() in ['false', 'no', 'off', 'disabled']:
            return False

        if re.fullmatch(r'-?\d+', value):
            return int(value)

        try:
            return float(value)
        except ValueError:
            pass

        if value.startswith('"') and value.endswith('"'):
            value = value[1:-1]
        elif value.startswith("'") and value.endswith("'"):
            value = value[1:-1]

        return value

    def _validate_section_specific(self, section: str, setting: str, value: Any) -> Optional[str]:
        """Range and choice rules per setting"""
        key = (section, setting)
        if key in PROTECTED:
            return PROTECTED[key]

        if key in INTEGER_RANGES:
            lo, hi = INTEGER_RANGES[key]
            if isinstance(value, bool) or not isinstance(value, int):
                return f"{setting} must be an integer"
            if not lo <= value <= hi:
                return f"{setting} must be between {lo} and {hi}"

        elif key in CHOICES:
            if value not in CHOICES[key]:
                return f"{setting} must be one of {', '.join(CHOICES[key])}"

        elif section == "posterior" and setting == "masses":
            return "masses is a list; edit analysis.yaml directly"

        elif section == "posterior" and setting in ("grid_lo", "grid_hi", "grid_step"):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                return f"{setting} must be a number"
            if setting == "grid_step" and value <= 0:
                return "grid_step must be positive"

        elif section == "games" and setting == "lambda_max":
            if isinstance(value, bool) or not isinstance(value, (int, float)) or value < 0:
                return "lambda_max must be a non-negative number"

        elif setting == "mass" or setting.endswith("_mass"):
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not 0 < value < 1:
                return f"{setting} must lie strictly between 0 and 1"

        return None

    def _load(self) -> AnalysisConfig:
        return AnalysisConfig(config_file=self.config_file)

    def get_setting(self, section: str, setting: str) -> Tuple[bool, str, Any]:
        """Get current value of a setting"""
        try:
            section_config = self._load().get_section_config(section)

            if not section_config:
                return False, f"Section '{section}' not found", None

            value = section_config
            for part in setting.split('.'):
                if isinstance(value, dict) and part in value:
                    value = value[part]
                else:
                    return False, f"Setting '{setting}' not found in section '{section}'", None

            return True, "", value

        except Exception as e:
            return False, f"Error reading setting: {e}", None

    def set_setting(self, section: str, setting: str, value: Any) -> Tuple[bool, str]:
        """Set a setting in analysis.yaml"""
        try:
            if not self.config_file.exists():
                return False, f"{self.config_file.name} not found"

            content = self.config_file.read_text(encoding="utf-8")
            self.backup_file.write_text(content, encoding="utf-8")

            data = yaml.safe_load(content) or {}

            if section not in data:
                data[section] = {"enabled": True, "config": {}}
            if not data[section].get("config"):
                data[section]["config"] = {}

            config_section = data[section]["config"]
            setting_parts = setting.split('.')
            for part in setting_parts[:-1]:
                if part not in config_section:
                    config_section[part] = {}
                config_section = config_section[part]

            config_section[setting_parts[-1]] = value

            with open(self.config_file, 'w', encoding="utf-8") as f:
                yaml.dump(data, f, default_flow_style=False, sort_keys=False)

            return True, ""

        except Exception as e:
            if self.backup_file.exists():
                self.config_file.write_text(self.backup_file.read_text(encoding="utf-8"), encoding="utf-8")

            return False, f"Error updating config: {e}"

    def list_settings(self, section: str) -> Tuple[bool, str, Dict[str, Any]]:
        """List all settings of a section"""
        try:
            section_config = self._load().get_section_config(section)

            if not section_config:
                return False, f"Section '{section}' not found", {}

            return True, "", section_config

        except Exception as e:
            return False, f"Error reading config: {e}", {}

    def cleanup_backup(self):
        """Remove backup file after successful operation"""
        if self.backup_file.exists():
            self.backup_file.unlink()
