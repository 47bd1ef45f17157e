"""Access layer: per-class EDCA queues, CSMA/CA with backoff freezing, adaptive DCC gate."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Any, Callable

from cbfsim.channel import Channel, Tx
from cbfsim.engine import EventHandle, EventKind, Simulator
from cbfsim.trace import Rec, Trace

DUTY_MIN = 0.0006
DUTY_MAX = 0.03
GATE_MIN = 25_000  # us
GATE_MAX = 1_000_000


class TrafficClass(IntEnum):
    TC0 = 0
    TC1 = 1
    TC2 = 2
    TC3 = 3


class EnqueueResult(str, Enum):
    ACCEPTED = "Accepted"
    DROPPED_QUEUE_FULL = "DroppedQueueFull"


@dataclass
class AccessConfig:
    slot: int = 13  # us
    # (aifs_slots, cw_min) per class
    edca: dict[int, tuple[int, int]] = field(
        default_factory=lambda: {0: (2, 3), 1: (2, 7), 2: (3, 15), 3: (7, 15)}
    )
    queue_capacity: dict[int, int] = field(default_factory=lambda: {0: 4, 1: 4, 2: 4, 3: 4})
    cbr_window: int = 100_000
    cbr_smoothing: float = 0.5
    cbr_target: float = 0.68
    duty_step_up: float = 0.0002
    duty_factor_down: float = 0.95
    duty_init: float = DUTY_MAX

    def validate(self) -> None:
        from cbfsim.mobility import ConfigError

        for tc in TrafficClass:
            if tc not in self.edca or tc not in self.queue_capacity:
                raise ConfigError(f"access: missing parameters for {tc.name}")
            aifs, cw = self.edca[tc]
            if aifs < 0 or cw < 0:
                raise ConfigError(f"access.{tc.name.lower()}: aifs/cw must be >= 0")
            if self.queue_capacity[tc] < 1:
                raise ConfigError(f"access.{tc.name.lower()}_capacity must be >= 1")
        if not DUTY_MIN <= self.duty_init <= DUTY_MAX:
            raise ConfigError("access.duty_init outside [0.0006, 0.03]")
        if self.cbr_window <= 0 or self.slot <= 0:
            raise ConfigError("access.cbr_window and access.slot must be > 0")


@dataclass
class DccState:
    cbr: float = 0.0
    duty: float = DUTY_MAX
    gate_next: int = 0
    last_tx_airtime: int = 0


def smooth_cbr(prev: float, window: float, alpha: float = 0.5) -> float:
    return alpha * prev + (1 - alpha) * window


def dcc_update(duty: float, cbr: float, target: float = 0.68, step: float = 0.0002, factor: float = 0.95) -> float:
    if cbr < target:
        return min(DUTY_MAX, duty + step)
    return max(DUTY_MIN, duty * factor)


def gate_interval(duty: float, last_tx_airtime: int) -> int:
    raw = last_tx_airtime * (1 - duty) / duty
    return int(round(min(max(raw, GATE_MIN), GATE_MAX)))


class _State(Enum):
    IDLE = 0
    GATED = 1
    CONTENDING = 2
    TRANSMITTING = 3


class AccessLayer:
    """One station's MAC + DCC."""

    def __init__(
        self,
        node: int,
        sim: Simulator,
        channel: Channel,
        cfg: AccessConfig,
        rng: random.Random,
        trace: Trace,
        on_tx_start: Callable[[Tx], None] | None = None,
    ):
        self.node = node
        self.sim = sim
        self.channel = channel
        self.cfg = cfg
        self.rng = rng
        self.trace = trace
        self.on_tx_start = on_tx_start
        self.dcc = DccState(duty=cfg.duty_init)
        self.queues: list[deque] = [deque() for _ in TrafficClass]
        self.state = _State.IDLE
        self._gate_event: EventHandle | None = None
        self._frame: tuple[Any, int, int] | None = None
        self._slots = 0
        self._cont_start = 0
        self.drops = 0

    def pending(self) -> int:
        return sum(len(q) for q in self.queues) + (self._frame is not None)

    def next_permitted_tx(self, now: int) -> int:
        return max(now, self.dcc.gate_next)

    def gate_open(self, now: int) -> bool:
        return self.dcc.gate_next <= now

    def enqueue(self, payload: Any, nbytes: int, tc: TrafficClass) -> EnqueueResult:
        q = self.queues[tc]
        if len(q) >= self.cfg.queue_capacity[tc]:
            self.drops += 1
            self.trace.emit(self.sim.now, self.node, Rec.QUEUE_DROP, getattr(payload, "msg_id", None), info=int(tc))
            return EnqueueResult.DROPPED_QUEUE_FULL
        q.append((payload, nbytes, int(tc)))
        if self.state is _State.IDLE:
            self._kick()
        return EnqueueResult.ACCEPTED

    def on_cbr_window(self, busy_us: float) -> None:
        cfg = self.cfg
        d = self.dcc
        d.cbr = smooth_cbr(d.cbr, busy_us / cfg.cbr_window, cfg.cbr_smoothing)
        d.duty = dcc_update(d.duty, d.cbr, cfg.cbr_target, cfg.duty_step_up, cfg.duty_factor_down)

    # -- driver ---------------------------------------------------------
    def _kick(self) -> None:
        now = self.sim.now
        if not any(self.queues):
            self.state = _State.IDLE
            return
        if now < self.dcc.gate_next:
            self.state = _State.GATED
            if self._gate_event is None or not self._gate_event.pending:
                self.trace.emit(now, self.node, Rec.GATE_WAIT, info=self.dcc.gate_next - now)
                self._gate_event = self.sim.schedule(self.dcc.gate_next, EventKind.DCC_GATE_OPEN, self._kick)
            return
        for q in self.queues:  # TC0 first
            if q:
                self._frame = q.popleft()
                break
        cw = self.cfg.edca[self._frame[2]][1]
        self.state = _State.CONTENDING
        self._contend(self.rng.randint(0, cw))

    def _contend(self, slots: int) -> None:
        now = self.sim.now
        sensed = self.channel.sensed(self.node, now)
        if sensed:
            until = max(tx.end for tx in sensed)
            self.sim.schedule(until, EventKind.TX_START, self._contend, slots)
            return
        self._slots = slots
        self._cont_start = now
        aifs = self.cfg.edca[self._frame[2]][0]
        self.sim.schedule(now + (aifs + slots) * self.cfg.slot, EventKind.TX_START, self._contend_end)

    def _contend_end(self) -> None:
        now = self.sim.now
        sensed = self.channel.sensed(self.node, now)
        if sensed:
            # freeze: keep the slots not yet counted down when the medium went busy
            first = min(tx.start for tx in sensed)
            aifs_us = self.cfg.edca[self._frame[2]][0] * self.cfg.slot
            consumed = max(0, (first - self._cont_start - aifs_us) // self.cfg.slot)
            remaining = max(0, self._slots - consumed)
            until = max(tx.end for tx in sensed)
            self.sim.schedule(until, EventKind.TX_START, self._contend, remaining)
            return
        payload, nbytes, _tc = self._frame
        self._frame = None
        tx = self.channel.broadcast(self.node, payload, nbytes)
        self.dcc.last_tx_airtime = tx.airtime
        self.dcc.gate_next = tx.end + gate_interval(self.dcc.duty, tx.airtime)
        self.state = _State.TRANSMITTING
        self.sim.schedule(tx.end, EventKind.TX_END, self._tx_end)
        if self.on_tx_start is not None:
            self.on_tx_start(tx)

    def _tx_end(self) -> None:
        self.state = _State.IDLE
        self._kick()
