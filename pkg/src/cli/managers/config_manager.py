from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from src.anoscope.errors import ConfigError
from src.utils.config_loader import load_config
from src.utils.logging import get_logger

logger = get_logger(__name__)

COMMANDS = ["generate", "fit", "score", "eval", "explain", "bench-toy", "thyroid-pipeline"]

TOY_KINDS = ["two-moons", "nuisance", "uniform"]
KERNEL_KINDS = ["rbf", "linear", "mahalanobis"]
REPORT_FORMATS = ["json", "csv"]

# fields that must be set (by file or flag) before a command may run
REQUIRED_FIELDS = {
    "generate": ["toy", "output"],
    "fit": ["method", "input", "output"],
    "score": ["model", "input", "output"],
    "eval": ["input", "output"],
    "explain": ["model", "input", "output"],
    "bench-toy": ["output"],
    "thyroid-pipeline": ["input", "output"],
}


@dataclass
class RunConfig:
    """Everything one CLI command needs; file values first, flags on top."""

    command: str
    method: Optional[str] = None
    hyperparameters: Dict[str, Any] = field(default_factory=dict)
    input: Optional[str] = None
    output: Optional[str] = None
    model: Optional[str] = None
    labels_col: Optional[str] = None
    seed: int = 0
    seeds: List[int] = field(default_factory=list)
    alpha: Optional[float] = None
    tau: Optional[float] = None
    nu: Optional[float] = None
    gamma: Optional[float] = None
    k: Optional[int] = None
    d: Optional[int] = None
    bottleneck: Optional[int] = None
    kernel: Optional[str] = None
    metric_diag: Optional[List[float]] = None
    toy: Optional[str] = None
    n: Optional[int] = None
    anomalies: int = 0
    contamination: float = 0.0
    ks: List[int] = field(default_factory=list)
    format: str = "json"
    masks: Optional[str] = None
    gradient: str = "analytic"
    wrt: str = "training_points"
    pgm_shape: Optional[List[int]] = None
    scale: bool = True
    methods: List[str] = field(default_factory=list)
    tune_kernels: bool = False
    threads: Optional[int] = None
    verbosity: int = 3

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


RUN_CONFIG_KEYS = [f.name for f in fields(RunConfig)]


class ConfigurationManager:
    """Builds and validates the RunConfig of one command."""

    def __init__(
        self,
        command: str,
        config_path: Optional[Union[str, Path]] = None,
        config_name: Optional[str] = None,
    ):
        if command not in COMMANDS:
            raise ConfigError(f"unknown command '{command}'; expected one of {COMMANDS}", key="command")
        self.command = command
        self.file_values = self._load_config(config_path, config_name)

    def _load_config(self, config_path, config_name) -> Dict[str, Any]:
        """Read the YAML run configuration and reject keys RunConfig does not know."""
        if config_path is not None and config_name is not None:
            raise ConfigError("give either a config path or a config name, not both")
        try:
            values = load_config(path=config_path, name=config_name)
        except FileNotFoundError as e:
            raise ConfigError(str(e), key="config") from None
        except ValueError as e:
            raise ConfigError(str(e), key="config") from None

        # a file may carry its own command section, e.g. {fit: {...}, score: {...}}
        section = values.get(self.command)
        if isinstance(section, dict):
            values = {**{k: v for k, v in values.items() if k not in COMMANDS}, **section}
        values = {k: v for k, v in values.items() if k not in COMMANDS}
        values = {k.replace("-", "_"): v for k, v in values.items()}

        unknown = sorted(set(values) - set(RUN_CONFIG_KEYS) - {"command"})
        if unknown:
            raise ConfigError(
                f"unknown configuration keys {unknown}; allowed: {sorted(RUN_CONFIG_KEYS)}", key=unknown[0]
            )
        if "command" in values and values["command"] != self.command:
            raise ConfigError(
                f"configuration is for command '{values['command']}', not '{self.command}'", key="command"
            )
        values.pop("command", None)
        if config_path or config_name:
            logger.debug(f"loaded configuration keys {sorted(values)} from {config_path or config_name}")
        return values

    def build(self, overrides: Dict[str, Any]) -> RunConfig:
        """Merge flag overrides (None = not given) over the file values and validate."""
        merged = dict(self.file_values)
        for key, value in overrides.items():
            if key not in RUN_CONFIG_KEYS:
                raise ConfigError(f"unknown option '{key}'", key=key)
            if value is None or (isinstance(value, (list, tuple)) and len(value) == 0):
                continue
            if key == "hyperparameters":
                merged["hyperparameters"] = {**(merged.get("hyperparameters") or {}), **value}
                continue
            merged[key] = list(value) if isinstance(value, tuple) else value

        config = RunConfig(command=self.command, **merged)
        self.validate(config)
        return config

    def validate(self, config: RunConfig) -> None:
        missing = [name for name in REQUIRED_FIELDS[config.command] if getattr(config, name) in (None, "")]
        if missing:
            raise ConfigError(
                f"command '{config.command}' requires {', '.join(missing)}", key=missing[0]
            )
        if not isinstance(config.hyperparameters, dict):
            raise ConfigError("hyperparameters must be a mapping", key="hyperparameters")
        if config.toy is not None and config.toy not in TOY_KINDS:
            raise ConfigError(f"toy must be one of {TOY_KINDS}, got '{config.toy}'", key="toy")
        if config.kernel is not None and config.kernel not in KERNEL_KINDS:
            raise ConfigError(f"kernel must be one of {KERNEL_KINDS}, got '{config.kernel}'", key="kernel")
        if config.kernel == "mahalanobis" and not config.metric_diag:
            raise ConfigError("a mahalanobis kernel needs metric_diag", key="metric_diag")
        if config.format not in REPORT_FORMATS:
            raise ConfigError(f"format must be one of {REPORT_FORMATS}, got '{config.format}'", key="format")
        if config.n is not None and config.n < 1:
            raise ConfigError(f"n must be >= 1, got {config.n}", key="n")
        if config.anomalies < 0:
            raise ConfigError(f"anomalies must be >= 0, got {config.anomalies}", key="anomalies")
        if config.pgm_shape is not None and len(config.pgm_shape) != 2:
            raise ConfigError("pgm_shape must be two integers (height, width)", key="pgm_shape")
        if config.alpha is not None and not 0.0 <= config.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {config.alpha}", key="alpha")
        if not 0 <= config.verbosity <= 4:
            raise ConfigError(f"verbosity must lie in 0..4, got {config.verbosity}", key="verbosity")

    def method_regularization(self, config: RunConfig, parameters: Dict[str, Any]) -> Dict[str, Any]:
        """
        Hyperparameters for the registry: the ``hyperparameters`` mapping plus
        the dedicated flags the chosen method takes.
        """
        unknown = sorted(set(config.hyperparameters) - set(parameters))
        if unknown:
            raise ConfigError(
                f"method '{config.method}' does not take {unknown}; allowed: {sorted(parameters)}", key=unknown[0]
            )
        regularization = dict(config.hyperparameters)
        flags = {"nu": config.nu, "gamma": config.gamma, "k": config.k, "d": config.d, "bottleneck": config.bottleneck}
        for key, value in flags.items():
            if value is None:
                continue
            if key not in parameters:
                raise ConfigError(
                    f"method '{config.method}' does not take --{key}; allowed: {sorted(parameters)}", key=key
                )
            regularization[key] = value
        if "seed" in parameters and "seed" not in regularization:
            regularization["seed"] = config.seed
        return regularization
