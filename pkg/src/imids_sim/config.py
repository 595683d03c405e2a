"""Scenario configuration: JSON loading, strict validation, dotted overrides.

A scenario file is a JSON object; every key is optional except `seed`.
Unknown keys anywhere in the tree are hard errors so typos cannot silently
fall back to defaults.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .attack import AttackConfig
from .energy import EnergyParams
from .ids import DetectionConfig
from .itids import ItidsConfig

MODES = ("imids", "itids", "imids-no-sectors")


class ConfigError(Exception):
    pass


@dataclass
class DeploymentConfig:
    node_count: int = 70
    area_width: float = 80.0
    area_height: float = 100.0
    transmission_range: float = 40.0
    sink_position: tuple | None = None
    positions: list | None = None
    leader_fraction: float = 0.15
    leader_initial_energy: float = 2.0
    follower_initial_energy: float = 0.2
    sink_initial_energy: float = 500.0
    leader_energy_threshold: float = 1.0

    def validate(self) -> None:
        if self.node_count < 3:
            raise ConfigError("node_count must be at least 3")
        if self.area_width <= 0 or self.area_height <= 0:
            raise ConfigError("area dimensions must be positive")
        if self.transmission_range <= 0:
            raise ConfigError("transmission_range must be positive")
        if not 0 < self.leader_fraction < 1:
            raise ConfigError("leader_fraction must lie in (0, 1)")
        for name in ("leader_initial_energy", "follower_initial_energy",
                     "sink_initial_energy", "leader_energy_threshold"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.positions is not None and len(self.positions) != self.node_count:
            raise ConfigError("positions list must have node_count entries")


@dataclass
class TrafficConfig:
    data_bits: int = 3000
    aggregate_bits: int = 800
    control_bits: int = 200

    def validate(self) -> None:
        for name in ("data_bits", "aggregate_bits", "control_bits"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")


@dataclass
class ScenarioConfig:
    seed: int
    mode: str = "imids"
    rounds: int = 500
    slots_per_round: int = 10
    sleep_probability: float = 0.5
    rotation_hysteresis: float = 0.9
    seconds_per_round: float = 1.0
    deployment: DeploymentConfig = field(default_factory=DeploymentConfig)
    energy: EnergyParams = field(default_factory=EnergyParams)
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    attack: AttackConfig = field(default_factory=AttackConfig)
    detection: DetectionConfig = field(default_factory=DetectionConfig)
    itids: ItidsConfig = field(default_factory=ItidsConfig)

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.rounds < 0:
            raise ConfigError("rounds must be non-negative")
        if self.slots_per_round < 1:
            raise ConfigError("slots_per_round must be at least 1")
        if not 0 <= self.sleep_probability <= 1:
            raise ConfigError("sleep_probability must lie in [0, 1]")
        if not 0 < self.rotation_hysteresis <= 1:
            raise ConfigError("rotation_hysteresis must lie in (0, 1]")
        if self.seconds_per_round <= 0:
            raise ConfigError("seconds_per_round must be positive")
        self.deployment.validate()
        self.traffic.validate()
        try:
            self.energy.validate()
            self.attack.validate()
            self.detection.validate()
            self.itids.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


_SECTION_TYPES = {
    "deployment": DeploymentConfig,
    "energy": EnergyParams,
    "traffic": TrafficConfig,
    "attack": AttackConfig,
    "detection": DetectionConfig,
    "itids": ItidsConfig,
}

_TUPLE_KEYS = {"sink_position", "injected_false_strikes"}


def _build_section(cls, raw: dict, path: str):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown key(s) under '{path}': {sorted(unknown)}")
    values = {}
    for key, value in raw.items():
        if key in _TUPLE_KEYS and isinstance(value, list):
            value = tuple(tuple(v) if isinstance(v, list) else v for v in value)
        values[key] = value
    try:
        return cls(**values)
    except TypeError as exc:
        raise ConfigError(f"bad value under '{path}': {exc}") from exc


def parse_config(raw: dict) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ConfigError("scenario must be a JSON object")
    if "seed" not in raw:
        raise ConfigError("scenario must set an explicit integer seed")
    if not isinstance(raw["seed"], int) or isinstance(raw["seed"], bool):
        raise ConfigError("seed must be an integer")
    top_fields = {f.name for f in dataclasses.fields(ScenarioConfig)}
    unknown = set(raw) - top_fields
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {sorted(unknown)}")
    kwargs = {}
    for key, value in raw.items():
        if key in _SECTION_TYPES:
            if not isinstance(value, dict):
                raise ConfigError(f"section '{key}' must be an object")
            kwargs[key] = _build_section(_SECTION_TYPES[key], value, key)
        else:
            kwargs[key] = value
    try:
        config = ScenarioConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    config.validate()
    return config


def load_raw(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("scenario must be a JSON object")
    return raw


def load_config(path: str, overrides=()) -> ScenarioConfig:
    raw = load_raw(path)
    if overrides:
        raw = apply_overrides(raw, overrides)
    return parse_config(raw)


def apply_overrides(raw: dict, overrides) -> dict:
    """Apply `section.key=value` pairs onto a raw scenario dict.

    Values parse as JSON when possible and fall back to bare strings, so
    `--override mode=itids` and `--override rounds=10` both work.
    """
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not of the form key=value")
        dotted, _, text = item.partition("=")
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        target = raw
        parts = dotted.split(".")
        for part in parts[:-1]:
            target = target.setdefault(part, {})
            if not isinstance(target, dict):
                raise ConfigError(f"override '{item}' descends into a non-object")
        target[parts[-1]] = value
    return raw


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def config_to_dict(config: ScenarioConfig) -> dict:
    # tuples become lists so the echo survives a JSON round trip unchanged
    return _jsonable(dataclasses.asdict(config))
