import importlib.util
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from models.model_interface import BehavioralModel, ModelFamily, ParameterError

logger = logging.getLogger("bgt.registry")

MODELS_DIR = Path(__file__).resolve().parent


class UnknownModelError(KeyError):
    """Raised when no enabled family handles a model name"""


class ModelRegistry:
    """Discovers model family plugins under models/<family>/plugin.py and resolves names to models"""

    def __init__(self, models_dir: Optional[Path] = None, family_config: Optional[Dict[str, Any]] = None):
        self.models_dir = Path(models_dir) if models_dir else MODELS_DIR
        self.family_config = family_config or {}
        self.families: Dict[str, ModelFamily] = {}
        self.failed_families: Dict[str, str] = {}
        self._models: Dict[str, BehavioralModel] = {}

    def discover(self) -> Dict[str, bool]:
        """Load every family plugin found in the models directory"""
        results = {}
        for family_dir in sorted(self.models_dir.iterdir()):
            if family_dir.is_dir() and not family_dir.name.startswith("__"):
                plugin_file = family_dir / "plugin.py"
                if plugin_file.exists():
                    results[family_dir.name] = self.load_family_from_file(plugin_file, family_dir.name)
        logger.info(f"Model discovery complete: {len(self.families)} families loaded, {len(self.failed_families)} failed")
        return results

    def load_family_from_file(self, plugin_file: Path, family_name: str) -> bool:
        try:
            module_name = f"models.{family_name}.plugin"
            module = sys.modules.get(module_name)
            if module is None:
                spec = importlib.util.spec_from_file_location(module_name, plugin_file)
                if not spec or not spec.loader:
                    raise ImportError(f"Could not load spec for {plugin_file}")
                module = importlib.util.module_from_spec(spec)
                spec.loader.exec_module(module)
                sys.modules[module_name] = module

            family_class = None
            for attr_name in dir(module):
                attr = getattr(module, attr_name)
                if isinstance(attr, type) and issubclass(attr, ModelFamily) and attr is not ModelFamily:
                    family_class = attr
                    break
            if not family_class:
                raise ImportError(f"No ModelFamily subclass found in {plugin_file}")

            family = family_class()
            settings = self.family_config.get(family.name, {})
            if settings.get("enabled") is False:
                family.enabled = False
            if not family.initialize(settings.get("config", {})):
                raise RuntimeError("Family initialization failed")
            self.families[family.name] = family
            self.failed_families.pop(family_name, None)
            logger.debug(f"Loaded model family: {family.name} v{family.version}")
            return True
        except Exception as e:
            logger.error(f"Failed to load model family {family_name}: {e}", exc_info=True)
            self.failed_families[family_name] = str(e)
            return False

    def resolve(self, model_name: str) -> BehavioralModel:
        """Model registered under `model_name`, built on first use"""
        if model_name in self._models:
            return self._models[model_name]
        for family in self.families.values():
            if family.enabled and family.can_handle(model_name):
                try:
                    model = family.create(model_name)
                except ParameterError as e:
                    raise UnknownModelError(f"model {model_name!r}: {e}") from e
                self._models[model_name] = model
                return model
        raise UnknownModelError(f"no enabled model family handles {model_name!r}")

    def nested_chain(self, model_name: str) -> List[BehavioralModel]:
        """Enabled smaller models that `model_name` nests, smallest first"""
        self.resolve(model_name)
        for family in self.families.values():
            if family.enabled and family.can_handle(model_name):
                return [self.resolve(name) for name in family.nested_in(model_name) if name in self]
        return []

    def __contains__(self, model_name: str) -> bool:
        try:
            self.resolve(model_name)
        except UnknownModelError:
            return False
        return True

    def list_models(self) -> List[str]:
        names: List[str] = []
        for family in self.families.values():
            if family.enabled:
                names.extend(family.get_models())
        return names

    def get_all_models(self) -> Dict[str, str]:
        """Listed model names mapped to the family that provides them"""
        return {name: family.name for family in self.families.values() if family.enabled for name in family.get_models()}

    def get_family_status(self) -> Dict[str, Any]:
        return {
            "loaded": {name: family.get_info() for name, family in self.families.items()},
            "failed": self.failed_families,
            "total_loaded": len(self.families),
            "total_failed": len(self.failed_families),
        }


_default_registry: Optional[ModelRegistry] = None


def default_registry() -> ModelRegistry:
    """Process-wide registry with every bundled family discovered"""
    global _default_registry
    if _default_registry is None:
        registry = ModelRegistry()
        registry.discover()
        _default_registry = registry
    return _default_registry
