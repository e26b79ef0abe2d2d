"""
INI experiment files -> validated ExperimentConfig.

Every section maps onto one pydantic model; keys outside the documented
schema are rejected so typos surface as config errors, not silent defaults.
"""
import configparser
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import ValidationError

from models.experiment_models import ExperimentConfig
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

SECTION_KEYS = {
    "experiment": {"schema_version", "kind", "trials", "seed", "max_bit_errors",
                   "sizes", "k_values", "se_iterations", "workers"},
    "system": {"n", "delta", "snr_db", "constellation", "transform", "channel_model"},
    "channel": {"paths", "max_delay_taps", "doppler_max_hz", "symbol_rate_hz",
                "rrc_rolloff", "rrc_taps", "seed"},
    "mimo": {"tx", "rx", "correlation"},
    "detector": {"variant", "max_iters", "damping_window", "convergence_tol", "optimize_xi", "adaptive_theta",
                 "linear_solver", "svd_limit", "trace_probes", "probe_seed"},
    "power": {"pa_scheme", "pa_schemes"},
    "output": {"path", "format"},
}
LIST_KEYS = {"snr_db", "sizes", "k_values", "pa_schemes"}


def _split(value: str):
    return [item.strip() for item in value.split(",") if item.strip()]


def read_ini(path) -> Dict[str, Dict[str, Any]]:
    """Raw section dictionaries with list-valued keys split on commas."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}", field="path")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as e:
        raise ConfigError(f"cannot parse {path}: {e}") from e

    raw = {}
    for section in parser.sections():
        if section not in SECTION_KEYS:
            raise ConfigError(f"unknown section [{section}]", field=section)
        values = {}
        for key, value in parser.items(section):
            if key not in SECTION_KEYS[section]:
                raise ConfigError(f"unknown key in [{section}]", field=f"{section}.{key}")
            values[key] = _split(value) if key in LIST_KEYS else value.strip()
        raw[section] = values
    return raw


def build_config_dict(raw: Dict[str, Dict[str, Any]]) -> Dict[str, Any]:
    """Arrange raw sections into the ExperimentConfig field layout."""
    experiment = dict(raw.get("experiment", {}))
    if "kind" not in experiment:
        raise ConfigError("missing experiment kind", field="experiment.kind")
    data: Dict[str, Any] = {"experiment": experiment.pop("kind")}
    if "schema_version" not in experiment:
        raise ConfigError("missing schema_version", field="experiment.schema_version")
    data.update(experiment)

    system = dict(raw.get("system", {}))
    if "snr_db" in system:
        system["snr_grid_db"] = system.pop("snr_db")
    if "transform" in system:
        system["transform_kind"] = system.pop("transform")
    channel = dict(raw.get("channel", {}))
    if "mimo" in raw:
        channel["mimo"] = dict(raw["mimo"])
    if channel:
        channel.setdefault("n", system.get("n", 256))
        channel.setdefault("delta", system.get("delta", 1.0))
        system["channel"] = channel
    data["system"] = system

    if "detector" in raw:
        data["detector"] = dict(raw["detector"])
    data.update(raw.get("power", {}))
    output = raw.get("output", {})
    if "path" in output:
        data["output_path"] = output["path"]
    if "format" in output:
        data["format"] = output["format"]
    return data


def apply_overrides(data: Dict[str, Any], overrides: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    """Command-line values replace file values before validation."""
    if not overrides:
        return data
    data = dict(data)
    mapping = {"seed": "seed", "trials": "trials", "output": "output_path",
               "workers": "workers", "format": "format"}
    for key, target in mapping.items():
        if overrides.get(key) is not None:
            data[target] = overrides[key]
    if overrides.get("snr_db") is not None:
        system = dict(data.get("system", {}))
        system["snr_grid_db"] = list(overrides["snr_db"])
        data["system"] = system
    return data


def validate_config(data: Dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or None
        raise ConfigError(first["msg"], field=field) from e


def load_experiment_config(path, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Read, override and validate one experiment file."""
    config = validate_config(apply_overrides(build_config_dict(read_ini(path)), overrides))
    logger.debug("Loaded %s experiment from %s", config.experiment.value, path)
    return config
