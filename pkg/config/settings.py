"""
Configuration settings for the censored expectile regression toolkit
"""
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

from dotenv import dotenv_values, load_dotenv
from pydantic import ValidationError

from core.exceptions import ConfigError
from models.schemas import RunConfig

load_dotenv()

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    return default if value in (None, "") else int(value)


@dataclass
class HarnessSettings:
    """Environment defaults for runs"""
    seed: int = field(default_factory=lambda: _env_int("DAERNN_SEED", 2024))
    jobs: int = field(default_factory=lambda: _env_int("DAERNN_JOBS", 1))
    log_level: str = field(default_factory=lambda: os.getenv("DAERNN_LOG_LEVEL", "INFO").upper())
    replications: int = field(default_factory=lambda: _env_int("DAERNN_REPLICATIONS", 20))

    def __post_init__(self):
        if self.seed < 0:
            raise ValueError("DAERNN_SEED must be non-negative")
        if self.jobs < 1:
            raise ValueError("DAERNN_JOBS must be at least 1")
        if self.replications < 1:
            raise ValueError("DAERNN_REPLICATIONS must be at least 1")
        if self.log_level not in LOG_LEVELS:
            raise ValueError(f"DAERNN_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}")


# Method registry
METHOD_CONFIG: Dict[str, Any] = {
    "daernn": {
        "name": "daernn",
        "description": "Data-augmented expectile regression neural network",
        "enabled": True
    },
    "full": {
        "name": "full",
        "description": "Expectile network on observed responses, censoring ignored",
        "enabled": True
    },
    "oracle": {
        "name": "oracle",
        "description": "Expectile network on true responses (simulation only)",
        "enabled": True
    },
    "dalinear": {
        "name": "dalinear",
        "description": "Data-augmented linear expectile regression",
        "enabled": True
    }
}


def configure_logging(level: str = "INFO") -> None:
    level = level.upper()
    if level not in LOG_LEVELS:
        raise ConfigError(f"Unknown log level '{level}'")
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(level)


def load_run_config(path: Union[str, Path]) -> Dict[str, str]:
    """KEY=VALUE settings; keys are RunConfig fields, case-insensitive"""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file {path} does not exist")
    values = {}
    for key, value in dotenv_values(path).items():
        name = key.strip().lower().replace("-", "_")
        if name not in RunConfig.model_fields or name == "subcommand":
            raise ConfigError(f"Unknown config key '{key}'")
        if value is not None:
            values[name] = value
    return values


def build_run_config(
    subcommand: str,
    flags: Dict[str, Any],
    config_file: Optional[Union[str, Path]] = None,
    settings: Optional[HarnessSettings] = None,
) -> RunConfig:
    """Merge defaults, config file and flags; flags win"""
    settings = settings or HarnessSettings()
    merged: Dict[str, Any] = {
        "seed": settings.seed,
        "jobs": settings.jobs,
        "log_level": settings.log_level,
        "replications": settings.replications,
    }
    if config_file is not None:
        merged.update(load_run_config(config_file))
    for name, value in flags.items():
        if name not in RunConfig.model_fields:
            raise ConfigError(f"Unknown option '{name}'")
        if value is not None:
            merged[name] = value
    merged["subcommand"] = subcommand
    try:
        return RunConfig(**merged)
    except ValidationError as exc:
        error = exc.errors()[0]
        where = ".".join(str(part) for part in error["loc"])
        raise ConfigError(f"Invalid value for '{where}': {error['msg']}") from exc
