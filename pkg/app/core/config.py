from pathlib import Path
from typing import Optional
import json
import logging
import os

from dotenv import load_dotenv
from pydantic import ValidationError
import psutil

from app.core.errors import ConfigError
from app.models.scenario import ScenarioConfig

logger = logging.getLogger("config")

load_dotenv()

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parents[2] / "config" / "scenario.json"

# Caches
_config_cache = {}


def _format_validation_error(e: ValidationError) -> str:
    parts = []
    for err in e.errors():
        loc = ".".join(str(x) for x in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def parse_scenario_config(data: dict) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid scenario config: {_format_validation_error(e)}") from e


def config_path_from_env(path: Optional[str] = None) -> Path:
    if path:
        return Path(path)
    return Path(os.environ.get("COEXSIM_CONFIG", DEFAULT_CONFIG_PATH))


def load_scenario_config(path: Optional[str] = None) -> ScenarioConfig:
    p = config_path_from_env(path).resolve()
    key = str(p)
    if key not in _config_cache:
        try:
            with open(p, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as e:
            raise ConfigError(f"Cannot read config file {p}: {e.strerror}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config file {p} is not valid JSON: {e}") from e
        _config_cache[key] = parse_scenario_config(data)
        logger.debug(f"Scenario config cache refreshed from {p}")
    return _config_cache[key]


def refresh_config_cache():
    _config_cache.clear()


def resolve_threads(threads: Optional[int] = None) -> int:
    if threads:
        return max(1, int(threads))
    env = os.environ.get("COEXSIM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"COEXSIM_THREADS must be an integer, got '{env}'")
    return psutil.cpu_count(logical=False) or 1


def resolve_out_dir(out_dir: Optional[str] = None) -> Path:
    return Path(out_dir or os.environ.get("COEXSIM_OUT_DIR", "results"))
