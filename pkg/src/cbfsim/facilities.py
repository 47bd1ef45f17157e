"""CA service (every vehicle) and DEN service (the stationary source)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from cbfsim.access import AccessLayer
from cbfsim.engine import EventKind, Simulator
from cbfsim.geonet import GbcPacket, Router
from cbfsim.mobility import DestinationArea, Fleet, PositionVector


@dataclass
class CamConfig:
    enabled: bool = True
    check_period: int = 100_000  # us
    min_interval: int = 100_000
    max_interval: int = 1_000_000
    distance_threshold: float = 4.0
    speed_threshold: float = 0.5
    heading_threshold: float = 4.0  # degrees
    size: int = 285


@dataclass
class DenmConfig:
    period: int = 1_000_000
    lifetime: int = 10_000_000
    size: int = 301
    # start this long before the measurement window so it opens in steady state
    lead: int = 10_000_000


class CamDecision(str, Enum):
    GENERATE = "Generate"
    SKIP = "Skip"


def cam_trigger_check(
    now: int,
    last_at: int | None,
    last_pv: PositionVector | None,
    pv: PositionVector,
    gate_open: bool,
    cfg: CamConfig,
    distance: Callable[[float, float, float, float], float] = lambda x1, y1, x2, y2: math.hypot(x1 - x2, y1 - y2),
) -> CamDecision:
    if not gate_open:
        return CamDecision.SKIP
    if last_at is None or last_pv is None:
        return CamDecision.GENERATE
    elapsed = now - last_at
    if elapsed >= cfg.max_interval:
        return CamDecision.GENERATE
    if elapsed < cfg.min_interval:
        return CamDecision.SKIP
    moved = distance(pv.x, pv.y, last_pv.x, last_pv.y)
    dv = abs(pv.speed - last_pv.speed)
    dh = 0.0 if pv.heading == last_pv.heading else 180.0
    if moved >= cfg.distance_threshold or dv >= cfg.speed_threshold or dh >= cfg.heading_threshold:
        return CamDecision.GENERATE
    return CamDecision.SKIP


class CamService:
    def __init__(self, node: int, sim: Simulator, fleet: Fleet, router: Router, access: AccessLayer, cfg: CamConfig):
        self.node = node
        self.sim = sim
        self.fleet = fleet
        self.router = router
        self.access = access
        self.cfg = cfg
        self.last_at: int | None = None
        self.last_pv: PositionVector | None = None
        self.generated: list[int] = []

    def start(self, phase: int) -> None:
        self.sim.schedule(self.sim.now + phase, EventKind.CAM_TRIGGER, self._check)

    def _check(self) -> None:
        now = self.sim.now
        pv = self.fleet.position_at(self.node, now)
        decision = cam_trigger_check(
            now, self.last_at, self.last_pv, pv, self.access.gate_open(now), self.cfg, self.fleet.distance
        )
        if decision is CamDecision.GENERATE:
            self.router.send_shb(self.cfg.size, now)
            self.last_at = now
            self.last_pv = pv
            self.generated.append(now)
        self.sim.schedule(now + self.cfg.check_period, EventKind.CAM_TRIGGER, self._check)


class DenService:
    """Emits one fresh geo-broadcast per period into ``area``."""

    def __init__(
        self,
        sim: Simulator,
        router: Router,
        area: DestinationArea,
        cfg: DenmConfig,
        on_generate: Callable[[GbcPacket, int], None] | None = None,
    ):
        self.sim = sim
        self.router = router
        self.area = area
        self.cfg = cfg
        self.on_generate = on_generate
        self.sent: list[GbcPacket] = []

    def schedule(self, start: int, stop: int) -> None:
        """Ticks at start, start+period, ... strictly before ``stop``."""
        t = start
        while t < stop:
            self.sim.schedule(t, EventKind.DENM_TRIGGER, self.denm_tick)
            t += self.cfg.period

    def denm_tick(self) -> GbcPacket:
        now = self.sim.now
        pkt = self.router.originate_gbc(self.cfg.size, self.area, now, self.cfg.lifetime)
        self.sent.append(pkt)
        if self.on_generate is not None:
            self.on_generate(pkt, now)
        return pkt
