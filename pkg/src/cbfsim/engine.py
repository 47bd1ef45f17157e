"""Event queue, integer-microsecond clock and named random streams."""

from __future__ import annotations

import hashlib
import heapq
import random
from enum import Enum
from itertools import count
from typing import Any, Callable

import numpy as np


def ms(value: float) -> int:
    return int(round(value * 1_000))


def s(value: float) -> int:
    return int(round(value * 1_000_000))


class EventKind(str, Enum):
    CAM_TRIGGER = "CamTrigger"
    DENM_TRIGGER = "DenmTrigger"
    CBF_TIMER_EXPIRY = "CbfTimerExpiry"
    DCC_GATE_OPEN = "DccGateOpen"
    TX_START = "TxStart"
    TX_END = "TxEnd"
    RX_END = "RxEnd"
    CBR_WINDOW_END = "CbrWindowEnd"
    MEASUREMENT_START = "MeasurementStart"
    MEASUREMENT_END = "MeasurementEnd"


class SchedulingError(RuntimeError):
    """An event was scheduled before the current clock."""


class Event:
    __slots__ = ("fire_at", "seqno", "kind", "action", "args", "pending")

    def __init__(self, fire_at: int, seqno: int, kind: EventKind, action: Callable, args: tuple):
        self.fire_at = fire_at
        self.seqno = seqno
        self.kind = kind
        self.action = action
        self.args = args
        self.pending = True

    def __repr__(self) -> str:
        state = "pending" if self.pending else "done"
        return f"Event({self.kind.value}@{self.fire_at}us #{self.seqno} {state})"


# the Event itself doubles as the cancellation handle
EventHandle = Event


class Simulator:
    """Single-threaded event loop.

    Events are ordered by ``(fire_at, seqno)``; ``seqno`` is the insertion
    counter, so simultaneous events run in the order they were scheduled.
    """

    def __init__(self) -> None:
        self.now = 0
        self._heap: list[tuple[int, int, Event]] = []
        self._seq = count()
        self.processed = 0

    def schedule(self, fire_at: int, kind: EventKind, action: Callable, *args: Any) -> EventHandle:
        if fire_at < self.now:
            raise SchedulingError(f"{kind.value} at {fire_at}us is before clock {self.now}us")
        seqno = next(self._seq)
        ev = Event(int(fire_at), seqno, kind, action, args)
        heapq.heappush(self._heap, (ev.fire_at, seqno, ev))
        return ev

    def schedule_in(self, delay: int, kind: EventKind, action: Callable, *args: Any) -> EventHandle:
        return self.schedule(self.now + delay, kind, action, *args)

    @staticmethod
    def cancel(handle: EventHandle | None) -> bool:
        if handle is None or not handle.pending:
            return False
        handle.pending = False
        return True

    def pending_count(self) -> int:
        return sum(1 for _, _, ev in self._heap if ev.pending)

    def run_until(self, t_end: int) -> int:
        if t_end < self.now:
            raise SchedulingError(f"run_until({t_end}) is before clock {self.now}")
        heap = self._heap
        n = 0
        while heap and heap[0][0] <= t_end:
            fire_at, _, ev = heapq.heappop(heap)
            if not ev.pending:
                continue
            ev.pending = False
            self.now = fire_at
            ev.action(*ev.args)
            n += 1
        self.now = t_end
        self.processed += n
        return n


def _derive_seed(seed: int, stream_id: str) -> int:
    digest = hashlib.blake2b(f"{seed}:{stream_id}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def py_stream(seed: int, stream_id: str) -> random.Random:
    """Scalar draws (backoff slots, phases). Same (seed, stream_id) -> same sequence."""
    return random.Random(_derive_seed(seed, stream_id))


def np_stream(seed: int, stream_id: str) -> np.random.Generator:
    """Vector draws (fleet placement, release shuffle)."""
    return np.random.Generator(np.random.PCG64(_derive_seed(seed, stream_id)))
