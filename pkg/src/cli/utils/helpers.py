import functools
import json
import traceback
from typing import Any, Callable, Dict, List, Optional

import click
import yaml

from src.anoscope.errors import AnoscopeError, ConfigError
from src.utils.logging import get_logger

logger = get_logger(__name__)

EXIT_CONFIG_ERROR = 2
EXIT_FAILURE = 1


class CommandFailed(click.ClickException):
    """A failed command, shown as one JSON object on stderr."""

    def __init__(self, command: str, error: BaseException):
        super().__init__(str(error))
        self.command = command
        self.error_name = type(error).__name__
        self.exit_code = EXIT_CONFIG_ERROR if isinstance(error, ConfigError) else EXIT_FAILURE

    def payload(self) -> Dict[str, Any]:
        return {"error": self.error_name, "message": self.message, "command": self.command}

    def show(self, file=None) -> None:
        click.echo(json.dumps(self.payload(), sort_keys=True), err=True)


def report_errors(command: str) -> Callable:
    """
    Wrap a command body so library and I/O errors leave as CommandFailed.
    With verbosity 4 the traceback is printed first.
    """

    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except (AnoscopeError, OSError, yaml.YAMLError) as e:
                if (kwargs.get("verbosity") or 0) >= 4:
                    traceback.print_exc()
                logger.debug(f"{command} failed with {type(e).__name__}: {e}")
                raise CommandFailed(command, e) from e

        return wrapper

    return decorator


def parse_float_list_option(ctx, param, value) -> Optional[List[float]]:
    """Parse a comma-separated list of reals, e.g. ``1,1,0.01,0.01``."""
    if value is None:
        return None
    try:
        return [float(x.strip()) for x in value.split(",") if x.strip()]
    except ValueError:
        raise click.BadParameter(f"--{param.name.replace('_', '-')} must be comma-separated numbers")


def parse_int_list_option(ctx, param, value) -> Optional[List[int]]:
    """Parse a comma-separated list of integers, e.g. ``10,50,100``."""
    if value is None:
        return None
    try:
        return [int(x.strip()) for x in value.split(",") if x.strip()]
    except ValueError:
        raise click.BadParameter(f"--{param.name.replace('_', '-')} must be comma-separated integers")


def parse_hyperparameters_option(ctx, param, value) -> Optional[Dict[str, Any]]:
    """Parse repeated ``--param key=value`` options; values are read as YAML scalars or lists."""
    if not value:
        return None
    parsed = {}
    for item in value:
        if "=" not in item:
            raise click.BadParameter(f"'{item}' is not of the form key=value")
        key, raw = item.split("=", 1)
        parsed[key.strip()] = yaml.safe_load(raw)
    return parsed


def output_stem_path(output: str, suffix: str) -> str:
    """``out/data.csv`` + ``_test.csv`` -> ``out/data_test.csv``."""
    base, dot, _ = output.rpartition(".")
    return f"{base}{suffix}" if dot else f"{output}{suffix}"


def parse_list_option(ctx, param, value) -> Optional[List[str]]:
    if value is None:
        return None
    return [x.strip() for x in value.split(",") if x.strip()]
