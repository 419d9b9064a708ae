"""Unit-aware configuration loading.

Config documents are YAML mappings whose numeric fields carry explicit unit
strings ("45 mm", "301.51 kPa"). Bare numbers are taken as SI. Unknown keys
are rejected, and every value is validated and converted to SI on load; an
empty document yields the built-in defaults.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np
import yaml

from .control import ActuatorFit, ControlConfig
from .environment import ElasticPatch
from .errors import ConfigError, InvalidParameterError
from .mechanics import SfaParams
from .model import SeeGeometry, max_injected_volume
from .workspace import KminEstimate, Requirement

# unit string -> (dimension, factor to SI)
UNIT_TABLE = {
    "m": ("length", 1.0),
    "mm": ("length", 1e-3),
    "cm": ("length", 1e-2),
    "m^2": ("area", 1.0),
    "mm^2": ("area", 1e-6),
    "cm^2": ("area", 1e-4),
    "m^3": ("volume", 1.0),
    "mm^3": ("volume", 1e-9),
    "ml": ("volume", 1e-6),
    "l": ("volume", 1e-3),
    "m^4": ("second_moment", 1.0),
    "mm^4": ("second_moment", 1e-12),
    "cm^4": ("second_moment", 1e-8),
    "Pa": ("pressure", 1.0),
    "kPa": ("pressure", 1e3),
    "MPa": ("pressure", 1e6),
    "N": ("force", 1.0),
    "N/m": ("stiffness", 1.0),
    "N/mm": ("stiffness", 1e3),
    "rad": ("angle", 1.0),
    "deg": ("angle", math.pi / 180.0),
    "Hz": ("frequency", 1.0),
    "s": ("time", 1.0),
    "ms": ("time", 1e-3),
    "m^3/s": ("volume_rate", 1.0),
    "ml/s": ("volume_rate", 1e-6),
    "m/s": ("speed", 1.0),
    "mm/s": ("speed", 1e-3),
    "rad/s": ("angular_rate", 1.0),
    "deg/s": ("angular_rate", math.pi / 180.0),
    "m/m^3": ("extension_per_volume", 1.0),
    "mm/ml": ("extension_per_volume", 1e3),
    "m^3/m": ("gain_p", 1.0),
    "ml/mm": ("gain_p", 1e-3),
    "m^3/(m s)": ("gain_i", 1.0),
    "ml/(mm s)": ("gain_i", 1e-3),
    "ml/(mm*s)": ("gain_i", 1e-3),
    "m s": ("length_time", 1.0),
    "mm s": ("length_time", 1e-3),
    "mm*s": ("length_time", 1e-3),
    "": ("dimensionless", 1.0),
}

_NUMBER_RE = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*(.*?)\s*$")


def parse_quantity(value, dimension: str, fieldpath: str) -> float:
    """Convert a config value to SI, checking its unit against the dimension."""
    if isinstance(value, bool):
        raise ConfigError(fieldpath, "expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(fieldpath, f"expected a number or quantity string, got {type(value).__name__}")
    m = _NUMBER_RE.match(value)
    if not m:
        raise ConfigError(fieldpath, f"cannot parse quantity {value!r}")
    number, unit = float(m.group(1)), re.sub(r"\s+", " ", m.group(2))
    if unit not in UNIT_TABLE:
        raise ConfigError(fieldpath, f"unknown unit {unit!r}")
    dim, factor = UNIT_TABLE[unit]
    if unit and dim != dimension:
        raise ConfigError(fieldpath, f"unit {unit!r} has dimension {dim}, expected {dimension}")
    return number * factor


@dataclass(frozen=True)
class EnvironmentConfig:
    """Contact selection for scenario runs."""

    kind: str = "none"
    normal_stiffness: float = 5.0e3
    preload_force: float = 5.0

    def make_patch(self) -> ElasticPatch | None:
        if self.kind == "none":
            return None
        if self.kind == "patch":
            return ElasticPatch.with_preload_force(
                self.preload_force, normal_stiffness=self.normal_stiffness
            )
        raise ConfigError("environment.kind", f"unknown environment {self.kind!r}")


@dataclass(frozen=True)
class TeleopConfig:
    """Rate limits and safety timeout of the live steering session."""

    max_axial_rate: float = 2e-3
    max_tilt_rate: float = math.radians(2.0)
    command_timeout: float = 0.5

    def __post_init__(self):
        if self.max_axial_rate <= 0 or self.max_tilt_rate <= 0 or self.command_timeout <= 0:
            raise InvalidParameterError("teleop limits must be positive")


@dataclass(frozen=True)
class RobotConfig:
    """Full robot description: geometry, actuation, control, environment."""

    geometry: SeeGeometry = field(default_factory=SeeGeometry)
    fit: ActuatorFit = field(default_factory=ActuatorFit)
    control: ControlConfig = field(default_factory=ControlConfig)
    requirement: Requirement = field(default_factory=Requirement)
    stiffness_floor: KminEstimate = field(default_factory=KminEstimate)
    environment: EnvironmentConfig = field(default_factory=EnvironmentConfig)
    teleop: TeleopConfig = field(default_factory=TeleopConfig)
    sensor_sigma: float = 0.2e-3
    seed: int = 1234


# section -> key -> (dimension, positivity: one of ">0", ">=0", None)
_SCHEMA = {
    "geometry": {
        "n_sfa": ("dimensionless", ">0"),
        "placement_radius": ("length", ">0"),
        "angular_spacing": ("angle", ">0"),
        "tilt_angle": ("angle", ">=0"),
        "tilt_direction": (None, None),
    },
    "sfa": {
        "length": ("length", ">0"),
        "cross_section_area": ("area", ">0"),
        "channel_area": ("area", ">0"),
        "youngs_modulus": ("pressure", ">0"),
        "shear_modulus": ("pressure", ">0"),
        "second_moment": ("second_moment", ">0"),
        "torsion_constant": ("second_moment", ">0"),
        "shear_correction": ("dimensionless", ">0"),
    },
    "actuator_fit": {
        "slope": ("extension_per_volume", ">0"),
        "intercept": ("length", None),
        "linear_region_start": ("volume", ">=0"),
    },
    "control": {
        "k_p": ("gain_p", ">=0"),
        "k_i": ("gain_i", ">=0"),
        "target_rate": ("frequency", ">0"),
        "control_rate": ("frequency", ">0"),
        "pump_rate_limit": ("volume_rate", ">0"),
        "pump_time_constant": ("time", ">0"),
        "integral_limit": ("length_time", ">0"),
    },
    "requirement": {
        "axial_translation": ("length", ">=0"),
        "radial_translation": ("length", ">=0"),
        "tilt": ("angle", ">=0"),
        "normal_force": ("force", ">=0"),
        "tangential_force": ("force", ">=0"),
    },
    "stiffness_floor": {
        "axial": ("stiffness", ">0"),
        "transversal": ("stiffness", ">0"),
    },
    "environment": {
        "kind": (None, None),
        "normal_stiffness": ("stiffness", ">=0"),
        "preload_force": ("force", ">=0"),
    },
    "teleop": {
        "max_axial_rate": ("speed", ">0"),
        "max_tilt_rate": ("angular_rate", ">0"),
        "command_timeout": ("time", ">0"),
    },
    "noise": {
        "sensor_sigma": ("length", ">=0"),
        "seed": ("dimensionless", None),
    },
}


def _check_sign(value: float, rule: str | None, fieldpath: str) -> float:
    if rule == ">0" and value <= 0:
        raise ConfigError(fieldpath, f"must be positive, got {value}")
    if rule == ">=0" and value < 0:
        raise ConfigError(fieldpath, f"must be non-negative, got {value}")
    return value


def _parse_section(doc: dict, section: str) -> dict:
    raw = doc.get(section) or {}
    if not isinstance(raw, dict):
        raise ConfigError(section, "expected a mapping")
    schema = _SCHEMA[section]
    out = {}
    for key, value in raw.items():
        if key not in schema:
            raise ConfigError(f"{section}.{key}", "unknown key")
        dimension, sign = schema[key]
        path = f"{section}.{key}"
        if dimension is None:
            out[key] = value
        else:
            out[key] = _check_sign(parse_quantity(value, dimension, path), sign, path)
    return out


def config_from_dict(doc: dict | None) -> RobotConfig:
    """Build a validated RobotConfig from a parsed YAML mapping."""
    doc = doc or {}
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config document must be a mapping")
    unknown = set(doc) - set(_SCHEMA)
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown section")
    sec = {name: _parse_section(doc, name) for name in _SCHEMA}

    sfa_kw = {}
    mapping = {
        "length": "length",
        "cross_section_area": "area",
        "channel_area": "channel_area",
        "youngs_modulus": "youngs_modulus",
        "shear_modulus": "shear_modulus",
        "second_moment": "second_moment",
        "torsion_constant": "torsion_constant",
        "shear_correction": "shear_correction",
    }
    for cfg_key, attr in mapping.items():
        if cfg_key in sec["sfa"]:
            sfa_kw[attr] = sec["sfa"][cfg_key]
    if "youngs_modulus" in sfa_kw and "shear_modulus" not in sfa_kw:
        sfa_kw["shear_modulus"] = 0.5 * sfa_kw["youngs_modulus"]
    try:
        sfa = SfaParams(**sfa_kw)
        geometry = SeeGeometry(
            n_sfa=int(sec["geometry"].get("n_sfa", 3)),
            placement_radius=sec["geometry"].get("placement_radius", 15e-3),
            angular_spacing=sec["geometry"].get("angular_spacing", 2 * math.pi / 3),
            tilt_angle=sec["geometry"].get("tilt_angle", math.radians(15.0)),
            tilt_direction=sec["geometry"].get("tilt_direction", "inward"),
            sfa=sfa,
        )
        fit_defaults = ActuatorFit(channel_area=sfa.channel_area)
        fit = ActuatorFit(
            slope=sec["actuator_fit"].get("slope", fit_defaults.slope),
            intercept=sec["actuator_fit"].get("intercept", fit_defaults.intercept),
            linear_region_start=sec["actuator_fit"].get(
                "linear_region_start", fit_defaults.linear_region_start
            ),
            channel_area=sfa.channel_area,
        )
        control_kw = {k: v for k, v in sec["control"].items()}
        control = ControlConfig(volume_limits=(0.0, max_injected_volume()), **control_kw)
        requirement = Requirement(**sec["requirement"]) if sec["requirement"] else Requirement()
        floor = KminEstimate(**sec["stiffness_floor"]) if sec["stiffness_floor"] else KminEstimate()
        environment = EnvironmentConfig(**sec["environment"]) if sec["environment"] else EnvironmentConfig()
        if environment.kind not in ("none", "patch"):
            raise ConfigError("environment.kind", f"unknown environment {environment.kind!r}")
        teleop = TeleopConfig(**sec["teleop"]) if sec["teleop"] else TeleopConfig()
    except InvalidParameterError as exc:
        raise ConfigError("<validation>", str(exc)) from exc
    noise = sec["noise"]
    seed = noise.get("seed", 1234)
    if not float(seed).is_integer():
        raise ConfigError("noise.seed", f"must be an integer, got {seed}")
    return RobotConfig(
        geometry=geometry,
        fit=fit,
        control=control,
        requirement=requirement,
        stiffness_floor=floor,
        environment=environment,
        teleop=teleop,
        sensor_sigma=noise.get("sensor_sigma", 0.2e-3),
        seed=int(seed),
    )


def load_config(path) -> RobotConfig:
    """Load and validate a robot config document; missing fields use defaults."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(str(path), "config file not found")
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"YAML parse error: {exc}")
    return config_from_dict(doc)
