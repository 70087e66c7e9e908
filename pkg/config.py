import os
import re
import yaml
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple
from dataclasses import dataclass, field, asdict

from dotenv import load_dotenv

CONFIG_FILE = Path(__file__).resolve().parent / "config" / "analysis.yaml"

# Comma-separated environment variables expanded into YAML lists
LIST_VARIABLES = ("BGT_MODELS",)

STOCHASTIC_COMMANDS = ("cv", "posterior", "generate")


class AnalysisConfig:
    def __init__(self, env_file: str = ".env", config_file: Optional[Path] = None):
        self.env_file = env_file
        self.config_file = Path(config_file) if config_file else CONFIG_FILE
        self.load_env_file()

        self.section_config = self._load_section_config()

    def load_env_file(self):
        """Load environment variables from file without overriding the real environment"""
        if Path(self.env_file).exists():
            load_dotenv(self.env_file, override=False)

    def _load_section_config(self) -> Dict[str, Any]:
        """Load analysis.yaml with environment variable interpolation"""
        if self.config_file.exists():
            content = self.config_file.read_text(encoding="utf-8")
            content = self._substitute_env_vars(content)
            return yaml.safe_load(content) or {}
        return {}

    def _substitute_env_vars(self, content: str) -> str:
        """Substitute ${VAR_NAME} patterns with environment variable values"""
        def replace_var(match):
            var_name = match.group(1)
            env_value = os.getenv(var_name)
            if env_value is None:
                return match.group(0)  # left for _unset() to treat as missing

            if var_name in LIST_VARIABLES:
                items = [item.strip() for item in env_value.split(',') if item.strip()]
                return '[' + ', '.join(f'"{item}"' for item in items) + ']'

            return env_value

        pattern = r'\$\{([A-Z_][A-Z0-9_]*)\}'
        return re.sub(pattern, replace_var, content)

    def is_section_enabled(self, section: str) -> bool:
        return self.section_config.get(section, {}).get("enabled", False)

    def get_section_config(self, section: str) -> Dict[str, Any]:
        return self.section_config.get(section, {}).get("config", {}) or {}

    def setting(self, section: str, name: str, default: Any = None) -> Any:
        """A section setting, with unresolved ${VAR} placeholders treated as unset"""
        value = self.get_section_config(section).get(name, default)
        return default if _unset(value) else value

    def model_family_config(self) -> Dict[str, Any]:
        """Per-family {enabled, config} blocks for the model registry"""
        return self.get_section_config("models").get("families", {}) or {}

    @property
    def output_dir(self) -> Path:
        return Path(os.getenv("BGT_OUTPUT_DIR") or self.setting("core", "output_dir", "results"))

    @property
    def log_level(self) -> str:
        return os.getenv("BGT_LOG_LEVEL") or self.setting("core", "log_level", "INFO")

    @property
    def log_file(self) -> Optional[str]:
        return os.getenv("BGT_LOG_FILE") or self.setting("core", "log_file", None)

    @property
    def seed(self) -> Optional[int]:
        value = os.getenv("BGT_SEED") or self.setting("core", "seed", None)
        return None if value is None else int(value)

    @property
    def max_workers(self) -> int:
        return int(os.getenv("BGT_MAX_WORKERS") or self.setting("core", "max_workers", 1))


def _unset(value: Any) -> bool:
    return value is None or (isinstance(value, str) and re.fullmatch(r'\$\{[A-Z_][A-Z0-9_]*\}', value) is not None)


@dataclass
class RunConfig:
    """Everything that determines a command's output; embedded in every report header"""
    command: str
    models: List[str] = field(default_factory=list)
    manifests: List[str] = field(default_factory=list)
    feature_filter: Optional[str] = None
    folds: int = 10
    rounds: int = 10
    fold_unit: str = "obs"
    restarts: int = 10
    seed: Optional[int] = None
    output_dir: str = "results"
    combine_per: Optional[int] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    def validate(self, registry=None) -> Tuple[bool, str]:
        """(is_valid, error_message)"""
        stochastic = (self.command in STOCHASTIC_COMMANDS and self.extra.get("method") != "grid") or self.combine_per is not None
        if stochastic and self.seed is None:
            return False, f"command '{self.command}' needs a seed (--seed or BGT_SEED)"
        if registry is not None:
            unknown = [name for name in self.models if name not in registry]
            if unknown:
                return False, f"unknown model(s): {', '.join(unknown)}"
        if self.fold_unit not in ("obs", "game"):
            return False, "fold unit must be 'obs' or 'game'"
        if self.folds < 2 or self.rounds < 1 or self.restarts < 1:
            return False, "need folds >= 2, rounds >= 1 and restarts >= 1"
        return True, ""

    def as_header(self) -> Dict[str, Any]:
        header = asdict(self)
        if not header["extra"]:
            header.pop("extra")
        return {"run": header}
