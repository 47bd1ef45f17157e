"""Per-message delivery and transmission accounting."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from cbfsim.channel import Tx
from cbfsim.geonet import GbcPacket, MsgId
from cbfsim.mobility import DestinationArea, Fleet

BIN_WIDTH = 100.0


@dataclass
class MessageReport:
    message: MsgId
    generated_at: int
    valid_until: int
    denominator: int
    receptions: int = 0
    tx_count: int = 0
    bin_expected: Counter = field(default_factory=Counter)
    bin_received: Counter = field(default_factory=Counter)


@dataclass
class _Pending:
    report: MessageReport
    members: set[int]
    received: set[int] = field(default_factory=set)


def signed_offset(x: float, origin: float, road_length: float) -> float:
    d = x - origin
    if road_length != math.inf:
        d = (d + road_length / 2) % road_length - road_length / 2
    return d


def bin_of(offset: float, half_length: float, width: float = BIN_WIDTH) -> int:
    """Lower edge (m) of the bin holding ``offset``; the closed far edge folds into the last bin."""
    b = math.floor(offset / width) * width
    top = math.ceil(half_length / width) * width - width
    return int(min(b, top))


class MetricsCollector:
    def __init__(self, fleet: Fleet, area: DestinationArea, source_id: int = 0, bin_width: float = BIN_WIDTH):
        self.fleet = fleet
        self.area = area
        self.source_id = source_id
        self.bin_width = bin_width
        self.pending: dict[MsgId, _Pending] = {}
        self.order: list[MsgId] = []

    def _origin(self) -> float:
        return self.fleet.x_at(self.source_id, 0)

    def on_generate(self, pkt: GbcPacket, now: int) -> None:
        xs = self.fleet.xs_at(now)
        inside = self.area.contains_many(xs, self.fleet.y)
        inside[self.source_id] = False
        members = np.flatnonzero(inside)
        rep = MessageReport(pkt.msg_id, now, now + pkt.lifetime, denominator=len(members))
        origin = self._origin()
        for i in members.tolist():
            rep.bin_expected[self._bin(xs[i], origin)] += 1
        self.pending[pkt.msg_id] = _Pending(rep, set(members.tolist()))
        self.order.append(pkt.msg_id)

    def _bin(self, x: float, origin: float) -> int:
        off = signed_offset(x, origin, self.fleet.road_length)
        return bin_of(off, self.area.half_length, self.bin_width)

    def on_tx_start(self, tx: Tx) -> None:
        msg = getattr(tx.payload, "msg_id", None)
        if msg is not None and msg in self.pending:
            self.pending[msg].report.tx_count += 1

    def on_deliver(self, node: int, pkt: GbcPacket, now: int) -> bool:
        p = self.pending.get(pkt.msg_id)
        if p is None or now > p.report.valid_until or node in p.received:
            return False
        p.received.add(node)
        if node in p.members:
            p.report.receptions += 1
        p.report.bin_received[self._bin(self.fleet.x_at(node, now), self._origin())] += 1
        return True

    def reports(self, t_from: int = 0, t_to: int | None = None) -> list[MessageReport]:
        out = []
        for key in self.order:
            rep = self.pending[key].report
            if rep.generated_at >= t_from and (t_to is None or rep.generated_at < t_to):
                out.append(rep)
        return out


def compute_pdr(report: MessageReport) -> float:
    if report.denominator <= 0:
        raise ValueError(f"message {report.message} has no vehicles in the area")
    return report.receptions / report.denominator


def compute_tx_count(report: MessageReport) -> int:
    return report.tx_count


def pdr_distance_bins(reports: list[MessageReport]) -> dict[int, float]:
    """Bin lower edge -> pooled receptions / expected receivers; empty bins omitted."""
    expected: Counter = Counter()
    received: Counter = Counter()
    for r in reports:
        expected.update(r.bin_expected)
        received.update(r.bin_received)
    return {b: received[b] / expected[b] for b in sorted(expected) if expected[b] > 0}


@dataclass
class GateAudit:
    gaps: int
    violations: int
    min_slack: int  # us beyond the airtime + 25 ms floor, over all gaps
    max_occupancy: float


def gate_audit(nodes: np.ndarray, starts: np.ndarray, ends: np.ndarray, duration: int, floor: int = 25_000) -> GateAudit:
    """Per-node spacing of consecutive transmissions and share of airtime over ``duration``."""
    if len(nodes) == 0:
        return GateAudit(0, 0, 0, 0.0)
    order = np.lexsort((starts, nodes))
    n, st, en = nodes[order], starts[order], ends[order]
    same = n[1:] == n[:-1]
    slack = (st[1:] - en[:-1] - floor)[same]
    airtime = np.bincount(n, weights=(en - st).astype(float))
    return GateAudit(
        gaps=int(same.sum()),
        violations=int((slack < 0).sum()),
        min_slack=int(slack.min()) if len(slack) else 0,
        max_occupancy=float(airtime.max() / duration),
    )
