"""GeoNetworking router: single-hop broadcast and Area contention-based forwarding.

Both releases share the packet format; they differ only in what a receiver
does with a copy.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from typing import Callable

from cbfsim.access import AccessLayer, EnqueueResult, TrafficClass
from cbfsim.engine import EventHandle, EventKind, Simulator
from cbfsim.mobility import DestinationArea, Fleet, PositionVector, Release
from cbfsim.trace import Rec, Trace

DEFAULT_HOP_LIMIT = 10
SN_MODULO = 1 << 16

MsgId = tuple[int, int]


@dataclass
class CbfParams:
    to_max: int = 100_000  # us
    to_min: int = 1_000
    dist_max: float = 1000.0

    def validate(self, max_range: float | None = None) -> None:
        from cbfsim.mobility import ConfigError

        if not 0 <= self.to_min < self.to_max:
            raise ConfigError("cbf.to_min must be >= 0 and < cbf.to_max")
        if self.dist_max <= 0:
            raise ConfigError("cbf.dist_max must be > 0")
        if max_range is not None and self.dist_max > max_range:
            raise ConfigError("cbf.dist_max must not exceed channel.max_range")


@dataclass(slots=True)
class GbcPacket:
    source_id: int
    sn: int
    so_pv: PositionVector
    sender_pv: PositionVector
    area: DestinationArea
    hop_limit: int
    tc: TrafficClass
    bytes: int
    lifetime: int = 10_000_000
    sender_id: int = -1
    deliver: bool = True  # channel hint: needs per-receiver processing

    @property
    def msg_id(self) -> MsgId:
        return (self.source_id, self.sn)

    def expired(self, now: int) -> bool:
        return now > self.so_pv.at + self.lifetime


@dataclass(slots=True)
class ShbPacket:
    source_id: int
    sender_pv: PositionVector
    bytes: int
    tc: TrafficClass = TrafficClass.TC2
    deliver: bool = False
    msg_id: None = None


class DuplicatePacketList:
    """Per-source FIFO of recently seen sequence numbers."""

    def __init__(self, capacity: int = 32):
        self.capacity = capacity
        self._fifo: dict[int, deque[int]] = {}
        self._members: dict[int, set[int]] = {}

    def insert(self, source_id: int, sn: int) -> None:
        fifo = self._fifo.setdefault(source_id, deque())
        members = self._members.setdefault(source_id, set())
        if sn in members:
            return
        fifo.append(sn)
        members.add(sn)
        if len(fifo) > self.capacity:
            members.discard(fifo.popleft())

    def contains(self, source_id: int, sn: int) -> bool:
        members = self._members.get(source_id)
        return members is not None and sn in members


def compute_timer_r1(prog: float, params: CbfParams) -> int:
    if prog > params.dist_max:
        return params.to_min
    return int(round(params.to_max - (params.to_max - params.to_min) * prog / params.dist_max))


def compute_timer_r2(prog: float, params: CbfParams, dcc_wait: int) -> int:
    base = compute_timer_r1(min(prog, params.dist_max), params)
    return max(base, dcc_wait)


@dataclass(slots=True)
class CbfEntry:
    packet: GbcPacket
    timer: EventHandle
    armed_at: int
    ref_sender_pv: PositionVector
    receptions: int = 1


def better_forwarder_check(entry: CbfEntry, dup_sender_pv: PositionVector, own_pv: PositionVector, distance) -> bool:
    """True (cancel) when the duplicate's sender got at least as far from the reference sender as we are."""
    ref = entry.ref_sender_pv
    dup_progress = distance(dup_sender_pv.x, dup_sender_pv.y, ref.x, ref.y)
    own_progress = distance(own_pv.x, own_pv.y, ref.x, ref.y)
    return dup_progress >= own_progress


class Router:
    """GeoNetworking entity of one node."""

    def __init__(
        self,
        node: int,
        release: Release,
        sim: Simulator,
        fleet: Fleet,
        access: AccessLayer,
        params: CbfParams,
        trace: Trace,
        deliver: Callable[[int, GbcPacket, int], None] | None = None,
        dpl_capacity: int = 32,
    ):
        self.node = node
        self.release = release
        self.sim = sim
        self.fleet = fleet
        self.access = access
        self.params = params
        self.trace = trace
        self.deliver = deliver
        self.entries: dict[MsgId, CbfEntry] = {}
        self.dpl = DuplicatePacketList(dpl_capacity)
        self.delivered: set[MsgId] = set()
        self.next_sn = 0
        self.armed_count: dict[MsgId, int] = {}  # R2 only, for the no-re-entry audit
        self.reentry_violations = 0

    def own_pv(self, t: int) -> PositionVector:
        return self.fleet.position_at(self.node, t)

    # -- source side ------------------------------------------------------
    def originate_gbc(self, payload_bytes: int, area: DestinationArea, now: int, lifetime: int = 10_000_000) -> GbcPacket:
        pv = self.own_pv(now)
        if not area.contains(pv.x, pv.y):
            raise ValueError("source outside destination area: non-area forwarding is not supported")
        pkt = GbcPacket(
            source_id=self.node,
            sn=self.next_sn,
            so_pv=pv,
            sender_pv=pv,
            area=area,
            hop_limit=DEFAULT_HOP_LIMIT,
            tc=TrafficClass.TC0,
            bytes=payload_bytes,
            lifetime=lifetime,
            sender_id=self.node,
        )
        self.next_sn = (self.next_sn + 1) % SN_MODULO
        if self.release is Release.R2:
            self.dpl.insert(self.node, pkt.sn)
        # a queue-full drop is traced by the access layer; the message still counts as generated
        self.access.enqueue(pkt, payload_bytes, TrafficClass.TC0)
        return pkt

    def send_shb(self, cam_bytes: int, now: int) -> EnqueueResult:
        pkt = ShbPacket(self.node, self.own_pv(now), cam_bytes)
        return self.access.enqueue(pkt, cam_bytes, TrafficClass.TC2)

    def on_receive_shb(self, pkt: ShbPacket, now: int) -> None:
        # awareness only; never forwarded
        return None

    # -- receiver side ----------------------------------------------------
    def on_receive_gbc(self, pkt: GbcPacket, now: int) -> None:
        x, y = self.fleet.xy_at(self.node, now)
        if not pkt.area.contains(x, y):
            return
        sender = pkt.sender_pv
        self.handle_gbc(pkt, now, x, y, self.fleet.distance(x, y, sender.x, sender.y))

    def handle_gbc(self, pkt: GbcPacket, now: int, x: float, y: float, prog: float) -> None:
        """In-area reception at (x, y), ``prog`` metres from the packet's sender."""
        if pkt.source_id == self.node:
            return
        if self.release is Release.R1:
            self._receive_r1(pkt, now, x, prog)
        else:
            self._receive_r2(pkt, now, x, y, prog)

    def _receive_r1(self, pkt: GbcPacket, now: int, x: float, prog: float) -> None:
        key = (pkt.source_id, pkt.sn)
        entry = self.entries.pop(key, None)
        if entry is not None:
            # any copy cancels; nothing remembers the message afterwards
            entry.timer.pending = False
            self.trace.emit(now, self.node, Rec.CBF_CANCEL, key, x)
            return
        if key not in self.delivered:
            self._deliver(pkt, now)
        self._arm(pkt, now, x, compute_timer_r1(prog, self.params))

    def _receive_r2(self, pkt: GbcPacket, now: int, x: float, y: float, prog: float) -> None:
        key = (pkt.source_id, pkt.sn)
        entry = self.entries.get(key)
        if entry is not None:
            entry.receptions += 1
            own = PositionVector(x, y, 0.0, 1, now)
            if better_forwarder_check(entry, pkt.sender_pv, own, self.fleet.distance):
                del self.entries[key]
                entry.timer.pending = False
                self.trace.emit(now, self.node, Rec.CBF_CANCEL, key, x)
            else:
                self.trace.emit(now, self.node, Rec.CBF_KEEP, key, x)
            return
        if self.dpl.contains(pkt.source_id, pkt.sn):
            self.trace.emit(now, self.node, Rec.DPL_HIT, key, x)
            return
        self.dpl.insert(pkt.source_id, pkt.sn)
        self._deliver(pkt, now)
        dcc_wait = self.access.next_permitted_tx(now) - now
        self._arm(pkt, now, x, compute_timer_r2(prog, self.params, dcc_wait))

    def _deliver(self, pkt: GbcPacket, now: int) -> None:
        key = pkt.msg_id
        if key in self.delivered:
            return
        self.delivered.add(key)
        if self.deliver is not None:
            self.deliver(self.node, pkt, now)

    def _arm(self, pkt: GbcPacket, now: int, x: float, timeout: int) -> None:
        key = (pkt.source_id, pkt.sn)
        if self.release is Release.R2:
            n = self.armed_count.get(key, 0) + 1
            self.armed_count[key] = n
            if n > 1 and self.dpl.contains(*key):
                self.reentry_violations += 1
        # receptions are batched a few microseconds after their own timestamps
        fire_at = max(now + timeout, self.sim.now)
        handle = self.sim.schedule(fire_at, EventKind.CBF_TIMER_EXPIRY, self._timer_expired, key)
        self.entries[key] = CbfEntry(pkt, handle, now, pkt.sender_pv)
        self.trace.emit(now, self.node, Rec.CBF_ARM, key, x, timeout)

    def _timer_expired(self, key: MsgId) -> None:
        now = self.sim.now
        entry = self.entries.pop(key)
        pkt = entry.packet
        if pkt.hop_limit <= 1 or pkt.expired(now):
            self.trace.emit(now, self.node, Rec.CBF_DROP, key)
            return
        own = self.own_pv(now)
        fwd = replace(
            pkt,
            sender_pv=own,
            sender_id=self.node,
            hop_limit=pkt.hop_limit - 1,
            tc=TrafficClass.TC3,
        )
        self.trace.emit(now, self.node, Rec.CBF_FORWARD, key, own.x, fwd.hop_limit)
        self.access.enqueue(fwd, fwd.bytes, TrafficClass.TC3)
