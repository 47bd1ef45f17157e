"""Unit-disk broadcast medium: reception sets, collisions, carrier sense and CBR."""

from __future__ import annotations

from array import array
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable

import numpy as np

from cbfsim.engine import EventKind, Simulator
from cbfsim.mobility import Fleet, ring_dx


@dataclass
class ChannelConfig:
    max_range: float = 1500.0
    data_rate: float = 6e6
    preamble_overhead: int = 40  # us
    propagation_speed: float = 3e8

    def validate(self) -> None:
        from cbfsim.mobility import ConfigError

        if self.max_range <= 0:
            raise ConfigError("channel.max_range must be > 0")
        if self.data_rate <= 0:
            raise ConfigError("channel.data_rate must be > 0")
        if self.preamble_overhead < 0:
            raise ConfigError("channel.preamble_overhead must be >= 0")


def airtime(nbytes: int, cfg: ChannelConfig) -> int:
    if nbytes <= 0:
        raise ValueError("frame size must be positive")
    return cfg.preamble_overhead + int(round(nbytes * 8 / cfg.data_rate * 1e6))


def propagation_delay(distance: float, cfg: ChannelConfig) -> int:
    return int(round(distance / cfg.propagation_speed * 1e6))


class RxOutcome(str, Enum):
    DELIVERED = "Delivered"
    COLLIDED = "Collided"


class Tx:
    """One frame on the air."""

    __slots__ = ("node", "start", "end", "x", "y", "payload", "nbytes", "heard", "dist")

    def __init__(self, node: int, start: int, end: int, x: float, y: float, payload: Any, nbytes: int):
        self.node = node
        self.start = start
        self.end = end
        self.x = x
        self.y = y
        self.payload = payload
        self.nbytes = nbytes
        self.heard: bytes = b""  # per node: 1 if within range at start (own node included)
        self.dist: np.ndarray | None = None

    @property
    def airtime(self) -> int:
        return self.end - self.start


def resolve_reception(
    frame_window: tuple[int, int], others: list[tuple[int, int]]
) -> RxOutcome:
    """Outcome at one receiver given the arrival windows of every other in-range frame there."""
    s0, e0 = frame_window
    for s1, e1 in others:
        if s1 < e0 and e1 > s0:
            return RxOutcome.COLLIDED
    return RxOutcome.DELIVERED


# signature: (tx, receiver_ids, rx_end_times, delivered_mask)
RxHandler = Callable[[Tx, np.ndarray, np.ndarray, np.ndarray], None]


class Channel:
    """Shared medium for one run.

    Only frames whose payload asks for it (``payload.deliver`` truthy) get
    per-receiver reception processing; every frame still occupies the medium
    for sensing, collisions and CBR.
    """

    # frames overlapping a reception can only have started this long before it
    LOOKBACK = 5_000

    def __init__(self, sim: Simulator, fleet: Fleet, cfg: ChannelConfig, on_rx: RxHandler | None = None):
        self.sim = sim
        self.fleet = fleet
        self.cfg = cfg
        self.on_rx = on_rx
        self.range = cfg.max_range
        self.active: list[Tx] = []
        self.recent: list[Tx] = []  # start-ordered, pruned by prune()
        self.log_node = array("q")
        self.log_start = array("q")
        self.log_end = array("q")
        self.log_gbc = array("b")
        self.collided = 0
        self.delivered = 0

    # -- transmission ---------------------------------------------------
    def transmitting(self, node: int, t: int) -> bool:
        for tx in self.active:
            if tx.node == node and tx.start <= t < tx.end:
                return True
        return False

    def broadcast(self, node: int, payload: Any, nbytes: int) -> Tx:
        now = self.sim.now
        if self.transmitting(node, now):
            raise RuntimeError(f"node {node} is already transmitting at {now}us")
        x, y = self.fleet.xy_at(node, now)
        tx = Tx(node, now, now + airtime(nbytes, self.cfg), x, y, payload, nbytes)
        xs = self.fleet.xs_at(now)
        dist = np.hypot(ring_dx(xs, x, self.fleet.road_length), self.fleet.y - y)
        mask = dist <= self.range
        mask[node] = True
        tx.heard = mask.tobytes()
        tx.dist = dist
        self._prune_active(now)
        self.active.append(tx)
        self.recent.append(tx)
        self.log_node.append(node)
        self.log_start.append(tx.start)
        self.log_end.append(tx.end)
        deliver = getattr(payload, "deliver", False)
        self.log_gbc.append(1 if deliver else 0)
        if deliver:
            mask[node] = False
            ids = np.flatnonzero(mask)
            if len(ids):
                d = dist[ids]
                props = np.rint(d / self.cfg.propagation_speed * 1e6).astype(np.int64)
                self.sim.schedule(tx.end + int(props.max()), EventKind.RX_END, self._rx_end, tx, ids, d, props)
        return tx

    def receivers(self, tx: Tx) -> tuple[np.ndarray, np.ndarray]:
        mask = np.frombuffer(tx.heard, dtype=bool).copy()
        mask[tx.node] = False
        ids = np.flatnonzero(mask)
        return ids, tx.dist[ids]

    def _rx_end(self, tx: Tx, ids: np.ndarray, dist: np.ndarray, props: np.ndarray) -> None:
        rx_start = tx.start + props
        rx_end = tx.end + props
        collided = np.zeros(len(ids), dtype=bool)
        for other in self._overlapping(tx):
            d = other.dist[ids]
            p = np.rint(d / self.cfg.propagation_speed * 1e6).astype(np.int64)
            hit = (d <= self.range) & (other.start + p < rx_end) & (other.end + p > rx_start)
            collided |= hit
        delivered = ~collided
        self.delivered += int(delivered.sum())
        self.collided += int(collided.sum())
        if self.on_rx is not None:
            self.on_rx(tx, ids, rx_end, delivered)

    def _overlapping(self, tx: Tx) -> list[Tx]:
        out = []
        lo = tx.start - self.LOOKBACK
        for other in reversed(self.recent):
            if other.start < lo:
                break
            if other is not tx and other.start <= tx.end + 10 and other.end >= tx.start - 10:
                out.append(other)
        return out

    # -- sensing ----------------------------------------------------------
    def _prune_active(self, t: int) -> None:
        self.active = [tx for tx in self.active if tx.end > t]

    def is_busy(self, node: int, t: int) -> bool:
        """Any in-range frame on air at ``t``; a frame starting exactly at ``t`` is not yet sensed."""
        for tx in self.active:
            if (tx.start < t or tx.node == node and tx.start == t) and t < tx.end and tx.heard[node]:
                return True
        return False

    def sensed(self, node: int, t: int) -> list[Tx]:
        return [tx for tx in self.active if tx.start < t < tx.end and tx.heard[node]]

    def prune(self, before: int) -> None:
        i = 0
        recent = self.recent
        while i < len(recent) and recent[i].end < before:
            i += 1
        if i:
            del recent[:i]

    # -- channel busy ratio -------------------------------------------------
    def busy_time(self, w0: int, w1: int) -> np.ndarray:
        """Per-node sensed busy time (us) within [w0, w1): union of in-range frame intervals."""
        txs = [tx for tx in self.recent if tx.end > w0 and tx.start < w1]
        n = len(self.fleet)
        if not txs:
            return np.zeros(n)
        starts = np.array([max(tx.start, w0) for tx in txs], dtype=float)
        ends = np.array([min(tx.end, w1) for tx in txs], dtype=float)
        mask = np.frombuffer(b"".join(tx.heard for tx in txs), dtype=bool).reshape(len(txs), n).T
        # starts are sorted (frames are appended in start order) so union = sweep
        masked_end = np.where(mask, ends[None, :], -np.inf)
        run_max = np.maximum.accumulate(masked_end, axis=1)
        prev = np.empty_like(run_max)
        prev[:, 0] = -np.inf
        prev[:, 1:] = run_max[:, :-1]
        contrib = np.clip(ends[None, :] - np.maximum(starts[None, :], prev), 0, None)
        return np.where(mask, contrib, 0.0).sum(axis=1)

    def tx_log(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return (
            np.frombuffer(self.log_node, dtype=np.int64),
            np.frombuffer(self.log_start, dtype=np.int64),
            np.frombuffer(self.log_end, dtype=np.int64),
            np.frombuffer(self.log_gbc, dtype=np.int8),
        )
