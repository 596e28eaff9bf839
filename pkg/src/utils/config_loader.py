import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml

# DEFINITIONS
CONFIGS_PATH = os.environ.get(
    "ANOSCOPE_CONFIG_DIR", os.path.join(os.path.expanduser("~"), ".anoscope", "configs")
)


def _read_yaml(path: Path) -> Dict[str, Any]:
    with open(path, "r") as f:
        config = yaml.safe_load(f)
    if config is None:
        return {}
    if not isinstance(config, dict):
        raise ValueError(f"Configuration file {path} must contain a mapping at the top level")
    return config


def load_config(path: Optional[Union[str, Path]] = None, name: Optional[str] = None) -> Dict[str, Any]:
    """
    Load a run configuration either from an explicit path or by name
    from the configs directory. Returns an empty mapping when neither is given.
    """

    if path is not None:
        config_path = Path(path)
        if not config_path.exists():
            raise FileNotFoundError(f"Configuration file not found: {config_path}")
        return _read_yaml(config_path)

    if name is not None:
        config_path = Path(CONFIGS_PATH) / f"{name}.yaml"
        if not config_path.exists():
            raise FileNotFoundError(
                f"No configuration named '{name}' in {CONFIGS_PATH}. "
                f"Available: {', '.join(get_config_names()) or 'none'}"
            )
        return _read_yaml(config_path)

    return {}


def get_config_names() -> List[str]:
    """
    Gets the available configurations names.
    """

    if not os.path.isdir(CONFIGS_PATH):
        return []
    names = [n.replace('.yaml', '') for n in os.listdir(CONFIGS_PATH) if n.endswith('.yaml')]
    return sorted(names)
