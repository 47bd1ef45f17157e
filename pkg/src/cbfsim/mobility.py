"""Ring-road highway fleet with constant per-lane speeds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

KMH = 1 / 3.6


class Release(str, Enum):
    R1 = "R1"
    R2 = "R2"


class ConfigError(ValueError):
    pass


@dataclass(slots=True)
class PositionVector:
    x: float
    y: float
    speed: float
    heading: int
    at: int


@dataclass(frozen=True)
class DestinationArea:
    """Axis-aligned rectangle with closed boundary, on a ring of ``road_length``."""

    cx: float
    cy: float
    half_length: float
    half_width: float
    road_length: float = math.inf

    def contains(self, x: float, y: float) -> bool:
        dx = abs(x - self.cx)
        if self.road_length != math.inf:
            dx %= self.road_length
            dx = min(dx, self.road_length - dx)
        return dx <= self.half_length and abs(y - self.cy) <= self.half_width

    def contains_many(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        dx = np.abs(xs - self.cx)
        if self.road_length != math.inf:
            dx = np.mod(dx, self.road_length)
            dx = np.minimum(dx, self.road_length - dx)
        return (dx <= self.half_length) & (np.abs(ys - self.cy) <= self.half_width)


@dataclass
class HighwayConfig:
    lanes_per_direction: int = 4
    density_per_lane: float = 30.0  # veh/km
    road_length: float = 6000.0
    area_length: float = 4000.0
    lane_width: float = 3.5
    # outer -> inner, mirrored for the opposite direction
    speed_per_lane: list[float] = field(
        default_factory=lambda: [110 * KMH, 100 * KMH, 90 * KMH, 80 * KMH]
    )
    penetration_r2: float = 0.0
    density_scale: float = 1.0
    shoulder_offset: float = 2.0

    def validate(self) -> None:
        if self.lanes_per_direction < 1:
            raise ConfigError("highway.lanes_per_direction must be >= 1")
        if not 0.0 <= self.penetration_r2 <= 1.0:
            raise ConfigError(f"highway.penetration_r2={self.penetration_r2} outside [0, 1]")
        if self.density_per_lane < 0 or self.density_scale < 0:
            raise ConfigError("highway.density_per_lane and density_scale must be >= 0")
        if self.area_length <= 0 or self.area_length > self.road_length:
            raise ConfigError("highway.area_length must be in (0, road_length]")
        if len(self.speed_per_lane) != self.lanes_per_direction:
            raise ConfigError("highway.speed_per_lane needs one entry per lane")
        if any(v < 0 for v in self.speed_per_lane):
            raise ConfigError("highway.speed_per_lane must be >= 0")

    @property
    def road_width(self) -> float:
        return 2 * self.lanes_per_direction * self.lane_width

    def area(self) -> DestinationArea:
        # covers every lane plus the shoulder the source stands on
        return DestinationArea(
            cx=self.road_length / 2,
            cy=self.road_width / 2,
            half_length=self.area_length / 2,
            half_width=self.road_width / 2 + self.lane_width,
            road_length=self.road_length,
        )


@dataclass(frozen=True, slots=True)
class VehicleNode:
    id: int
    lane: int  # -1 for the shoulder
    release: Release
    stationary: bool = False


class Fleet:
    """Node table plus analytic kinematics. Node 0 is always the stationary source."""

    def __init__(self, nodes: list[VehicleNode], x0, y, speed, heading, road_length: float):
        self.nodes = nodes
        self.x0 = np.asarray(x0, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.speed = np.asarray(speed, dtype=float)
        self.heading = np.asarray(heading, dtype=float)
        self.vel = self.speed * self.heading
        self.road_length = float(road_length)
        self._ring = self.road_length != math.inf
        # python-side copies for scalar queries in hot paths
        self._x0 = self.x0.tolist()
        self._y = self.y.tolist()
        self._vel = self.vel.tolist()

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def source(self) -> VehicleNode:
        return self.nodes[0]

    def x_at(self, i: int, t: int) -> float:
        x = self._x0[i] + self._vel[i] * t * 1e-6
        return x % self.road_length if self._ring else x

    def xy_at(self, i: int, t: int) -> tuple[float, float]:
        return self.x_at(i, t), self._y[i]

    def xs_at(self, t: int) -> np.ndarray:
        xs = self.x0 + self.vel * (t * 1e-6)
        return np.mod(xs, self.road_length) if self._ring else xs

    def position_at(self, node: VehicleNode | int, t: int) -> PositionVector:
        i = node if isinstance(node, int) else node.id
        return PositionVector(
            x=self.x_at(i, t),
            y=self._y[i],
            speed=float(self.speed[i]),
            heading=int(self.heading[i]),
            at=t,
        )

    def in_area_at(self, node: VehicleNode | int, t: int, area: DestinationArea) -> bool:
        i = node if isinstance(node, int) else node.id
        x, y = self.xy_at(i, t)
        return area.contains(x, y)

    def distance(self, x1: float, y1: float, x2: float, y2: float) -> float:
        return ring_distance(x1, y1, x2, y2, self.road_length)


def ring_distance(x1: float, y1: float, x2: float, y2: float, road_length: float) -> float:
    dx = abs(x1 - x2)
    if road_length != math.inf:
        dx %= road_length
        if dx > road_length - dx:
            dx = road_length - dx
    return math.hypot(dx, y1 - y2)


def ring_dx(xs: np.ndarray, x: float, road_length: float) -> np.ndarray:
    dx = np.abs(xs - x)
    if road_length != math.inf:
        dx = np.mod(dx, road_length)
        dx = np.minimum(dx, road_length - dx)
    return dx


def lane_layout(cfg: HighwayConfig) -> list[tuple[float, float, int]]:
    """(y, speed, heading) per lane; lanes 0..n-1 head +x, n..2n-1 head -x."""
    n = cfg.lanes_per_direction
    lanes = []
    for i in range(n):
        lanes.append(((i + 0.5) * cfg.lane_width, cfg.speed_per_lane[i], 1))
    for i in range(n):
        # mirror: outermost lane of the opposite carriageway is at the far edge
        lanes.append((cfg.road_width - (i + 0.5) * cfg.lane_width, cfg.speed_per_lane[i], -1))
    return lanes


def vehicles_per_lane(cfg: HighwayConfig) -> int:
    return int(round(cfg.density_per_lane * cfg.road_length / 1000 * cfg.density_scale))


def build_fleet(cfg: HighwayConfig, placement: np.random.Generator, assignment: np.random.Generator) -> Fleet:
    cfg.validate()
    per_lane = vehicles_per_lane(cfg)
    lanes = lane_layout(cfg)
    total = per_lane * len(lanes)
    if total == 0:
        raise ConfigError("highway configuration yields zero vehicles")

    x0, ys, speeds, headings, lane_idx = [], [], [], [], []
    spacing = cfg.road_length / per_lane
    for li, (y, v, h) in enumerate(lanes):
        phase = placement.uniform(0, spacing)
        jitter = placement.uniform(-0.4 * spacing, 0.4 * spacing, size=per_lane)
        xs = np.mod(phase + spacing * np.arange(per_lane) + jitter, cfg.road_length)
        x0.extend(xs.tolist())
        ys.extend([y] * per_lane)
        speeds.extend([v] * per_lane)
        headings.extend([h] * per_lane)
        lane_idx.extend([li] * per_lane)

    n_r2 = int(round(total * cfg.penetration_r2))
    order = assignment.permutation(total)
    is_r2 = np.zeros(total, dtype=bool)
    is_r2[order[:n_r2]] = True

    area = cfg.area()
    src_release = Release.R2 if cfg.penetration_r2 >= 1.0 else Release.R1
    nodes = [VehicleNode(0, -1, src_release, stationary=True)]
    for k in range(total):
        nodes.append(VehicleNode(k + 1, lane_idx[k], Release.R2 if is_r2[k] else Release.R1))
    return Fleet(
        nodes,
        x0=[area.cx] + x0,
        y=[-cfg.shoulder_offset] + ys,
        speed=[0.0] + speeds,
        heading=[1] + headings,
        road_length=cfg.road_length,
    )


def static_line(positions: list[float], releases: list[Release], road_length: float = math.inf) -> Fleet:
    """Motionless nodes along y=0; node 0 is the source."""
    nodes = [VehicleNode(i, 0, r, stationary=True) for i, r in enumerate(releases)]
    n = len(positions)
    return Fleet(nodes, positions, [0.0] * n, [0.0] * n, [1] * n, road_length)
