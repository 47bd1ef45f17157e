"""Scenario files: INI-style sections of flat key/value pairs.

Every key is optional; missing keys take the defaults below. Example::

    [highway]
    lanes_per_direction = 4
    density_per_lane = 30
    density_scale = 0.5

    [experiment]
    seeds = 1, 2, 3
    penetrations = 0, 0.25, 0.5, 0.75, 1
    output_dir = out
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from cbfsim.access import AccessConfig, TrafficClass
from cbfsim.channel import ChannelConfig
from cbfsim.facilities import CamConfig, DenmConfig
from cbfsim.geonet import CbfParams
from cbfsim.mobility import KMH, ConfigError, HighwayConfig


@dataclass
class ScenarioConfig:
    highway: HighwayConfig = field(default_factory=HighwayConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    cbf: CbfParams = field(default_factory=CbfParams)
    access: AccessConfig = field(default_factory=AccessConfig)
    cam: CamConfig = field(default_factory=CamConfig)
    denm: DenmConfig = field(default_factory=DenmConfig)
    warmup_s: float = 120.0
    measure_s: float = 30.0
    drain_s: float = 10.0
    seeds: list[int] = field(default_factory=lambda: [1, 2, 3])
    penetrations: list[float] = field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])
    output_dir: Path = Path("results")

    def validate(self) -> None:
        self.highway.validate()
        self.channel.validate()
        self.cbf.validate(self.channel.max_range)
        self.access.validate()
        for name in ("warmup_s", "measure_s"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"experiment.{name} must be > 0")
        if self.drain_s < 0:
            raise ConfigError("experiment.drain_s must be >= 0")
        if not self.seeds:
            raise ConfigError("experiment.seeds must not be empty")
        for p in self.penetrations:
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"experiment.penetrations value {p} outside [0, 1]")
        if self.denm.period <= 0 or self.denm.lifetime <= 0 or self.denm.size <= 0:
            raise ConfigError("denm.period_ms, denm.lifetime_s and denm.size must be > 0")
        if self.cam.size <= 0 or self.cam.check_period <= 0:
            raise ConfigError("cam.size and cam.check_period_ms must be > 0")


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.replace(";", ",").split(",") if v.strip()]


_US_PER_MS = 1_000
_US_PER_S = 1_000_000

# section -> key -> (target object attribute path, converter)
_SCHEMA = {
    "highway": {
        "lanes_per_direction": ("highway.lanes_per_direction", int),
        "density_per_lane": ("highway.density_per_lane", float),
        "road_length": ("highway.road_length", float),
        "area_length": ("highway.area_length", float),
        "lane_width": ("highway.lane_width", float),
        "speed_per_lane_kmh": ("highway.speed_per_lane", lambda v: [x * KMH for x in _floats(v)]),
        "penetration_r2": ("highway.penetration_r2", float),
        "density_scale": ("highway.density_scale", float),
        "shoulder_offset": ("highway.shoulder_offset", float),
    },
    "channel": {
        "max_range": ("channel.max_range", float),
        "data_rate": ("channel.data_rate", float),
        "preamble_overhead_us": ("channel.preamble_overhead", int),
        "propagation_speed": ("channel.propagation_speed", float),
    },
    "cbf": {
        "to_max_ms": ("cbf.to_max", lambda v: int(round(float(v) * _US_PER_MS))),
        "to_min_ms": ("cbf.to_min", lambda v: int(round(float(v) * _US_PER_MS))),
        "dist_max": ("cbf.dist_max", float),
    },
    "access": {
        "slot_us": ("access.slot", int),
        "cbr_window_ms": ("access.cbr_window", lambda v: int(round(float(v) * _US_PER_MS))),
        "cbr_smoothing": ("access.cbr_smoothing", float),
        "cbr_target": ("access.cbr_target", float),
        "duty_step_up": ("access.duty_step_up", float),
        "duty_factor_down": ("access.duty_factor_down", float),
        "duty_init": ("access.duty_init", float),
    },
    "cam": {
        "enabled": ("cam.enabled", lambda v: v.strip().lower() in ("1", "true", "yes", "on")),
        "check_period_ms": ("cam.check_period", lambda v: int(round(float(v) * _US_PER_MS))),
        "distance_threshold": ("cam.distance_threshold", float),
        "speed_threshold": ("cam.speed_threshold", float),
        "heading_threshold": ("cam.heading_threshold", float),
        "size": ("cam.size", int),
    },
    "denm": {
        "period_ms": ("denm.period", lambda v: int(round(float(v) * _US_PER_MS))),
        "lifetime_s": ("denm.lifetime", lambda v: int(round(float(v) * _US_PER_S))),
        "size": ("denm.size", int),
        "lead_s": ("denm.lead", lambda v: int(round(float(v) * _US_PER_S))),
    },
    "experiment": {
        "warmup_s": ("warmup_s", float),
        "measure_s": ("measure_s", float),
        "drain_s": ("drain_s", float),
        "seeds": ("seeds", _ints),
        "penetrations": ("penetrations", _floats),
        "output_dir": ("output_dir", Path),
    },
}


def _set(cfg: ScenarioConfig, path: str, value) -> None:
    obj = cfg
    *parents, leaf = path.split(".")
    for p in parents:
        obj = getattr(obj, p)
    setattr(obj, leaf, value)


def _apply_access(cfg: ScenarioConfig, key: str, raw: str) -> bool:
    # tc0_aifs, tc0_cw, tc0_capacity, ... tc3_capacity
    if len(key) < 4 or not key.startswith("tc") or key[3] != "_" or not key[2].isdigit():
        return False
    tc = int(key[2])
    if tc not in TrafficClass.__members__.values():
        return False
    what = key[4:]
    aifs, cw = cfg.access.edca[tc]
    if what == "aifs":
        cfg.access.edca[tc] = (int(raw), cw)
    elif what == "cw":
        cfg.access.edca[tc] = (aifs, int(raw))
    elif what == "capacity":
        cfg.access.queue_capacity[tc] = int(raw)
    else:
        return False
    return True


def parse_scenario(text: str) -> ScenarioConfig:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"scenario parse error: {exc}") from exc
    cfg = ScenarioConfig()
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in parser.items(section):
            field_name = f"{section}.{key}"
            try:
                if section == "access" and _apply_access(cfg, key, raw):
                    continue
                if key not in _SCHEMA[section]:
                    raise ConfigError(f"unknown key {field_name}")
                path, conv = _SCHEMA[section][key]
                _set(cfg, path, conv(raw))
            except ConfigError:
                raise
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{field_name}: invalid value {raw!r} ({exc})") from exc
    cfg.validate()
    return cfg


def load_scenario(path: str | Path, create_output: bool = True) -> ScenarioConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"scenario file not found: {path}")
    cfg = parse_scenario(path.read_text())
    if create_output:
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
    return cfg
