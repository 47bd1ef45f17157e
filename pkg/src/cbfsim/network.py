"""Wires fleet, medium and per-node stacks into one runnable simulation."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from cbfsim.access import AccessConfig, AccessLayer
from cbfsim.channel import Channel, ChannelConfig, Tx
from cbfsim.engine import EventKind, Simulator, np_stream, py_stream, s
from cbfsim.facilities import CamConfig, CamService, DenmConfig, DenService
from cbfsim.geonet import CbfParams, GbcPacket, Router, ShbPacket
from cbfsim.metrics import GateAudit, MessageReport, MetricsCollector, gate_audit
from cbfsim.mobility import DestinationArea, Fleet, build_fleet, ring_dx
from cbfsim.scenario import ScenarioConfig
from cbfsim.trace import PROTOCOL, Rec, Trace


class Network:
    def __init__(
        self,
        fleet: Fleet,
        area: DestinationArea,
        *,
        channel: ChannelConfig | None = None,
        access: AccessConfig | None = None,
        cbf: CbfParams | None = None,
        cam: CamConfig | None = None,
        denm: DenmConfig | None = None,
        seed: int = 1,
        trace: Trace | None = None,
    ):
        self.fleet = fleet
        self.area = area
        self.channel_cfg = channel or ChannelConfig()
        self.access_cfg = access or AccessConfig()
        self.cbf = cbf or CbfParams()
        self.cam_cfg = cam or CamConfig()
        self.denm_cfg = denm or DenmConfig()
        self.seed = seed
        self.trace = trace if trace is not None else Trace(PROTOCOL)
        self.sim = Simulator()
        self.channel = Channel(self.sim, fleet, self.channel_cfg, self._on_rx)
        self.metrics = MetricsCollector(fleet, area, source_id=fleet.source.id)
        backoff = py_stream(seed, "backoff")
        self.access: list[AccessLayer] = []
        self.routers: list[Router] = []
        for node in fleet.nodes:
            acc = AccessLayer(node.id, self.sim, self.channel, self.access_cfg, backoff, self.trace, self._on_tx_start)
            self.access.append(acc)
            self.routers.append(
                Router(node.id, node.release, self.sim, fleet, acc, self.cbf, self.trace, self._on_deliver)
            )
        self.cams: list[CamService] = []
        if self.cam_cfg.enabled:
            phases = py_stream(seed, "cam-phase")
            for node in fleet.nodes:
                svc = CamService(node.id, self.sim, fleet, self.routers[node.id], self.access[node.id], self.cam_cfg)
                svc.start(phases.randrange(self.cam_cfg.check_period))
                self.cams.append(svc)
        src = fleet.source.id
        self.den = DenService(self.sim, self.routers[src], area, self.denm_cfg, self.metrics.on_generate)
        self.gbc_tx = 0
        self.deliveries = 0
        self.sim.schedule(self.access_cfg.cbr_window, EventKind.CBR_WINDOW_END, self._cbr_window)

    @classmethod
    def from_scenario(cls, cfg: ScenarioConfig, seed: int, penetration: float | None = None, trace: Trace | None = None):
        hw = cfg.highway if penetration is None else replace(cfg.highway, penetration_r2=penetration)
        fleet = build_fleet(hw, np_stream(seed, "placement"), np_stream(seed, "fleet-assignment"))
        return cls(
            fleet,
            hw.area(),
            channel=cfg.channel,
            access=cfg.access,
            cbf=cfg.cbf,
            cam=cfg.cam,
            denm=cfg.denm,
            seed=seed,
            trace=trace,
        )

    # -- hooks ------------------------------------------------------------
    def _on_tx_start(self, tx: Tx) -> None:
        payload = tx.payload
        if isinstance(payload, GbcPacket):
            self.gbc_tx += 1
            self.metrics.on_tx_start(tx)
            self.trace.emit(tx.start, tx.node, Rec.TX_START, payload.msg_id, tx.x, payload.hop_limit)
        elif self.trace.wants(Rec.TX_START):
            self.trace.emit(tx.start, tx.node, Rec.TX_START, None, tx.x)

    def _on_rx(self, tx: Tx, ids: np.ndarray, rx_end: np.ndarray, delivered: np.ndarray) -> None:
        pkt = tx.payload
        trace = self.trace
        if trace.wants(Rec.RX_DELIVERED):
            msg = getattr(pkt, "msg_id", None)
            for i, t, ok in zip(ids.tolist(), rx_end.tolist(), delivered.tolist()):
                trace.emit(t, i, Rec.RX_DELIVERED if ok else Rec.RX_COLLIDED, msg)
        ids = ids[delivered]
        rx_end = rx_end[delivered]
        if isinstance(pkt, ShbPacket):
            for i, t in zip(ids.tolist(), rx_end.tolist()):
                self.routers[i].on_receive_shb(pkt, t)
            return
        if not isinstance(pkt, GbcPacket) or not len(ids):
            return
        # nodes move < 1 mm between frame start and reception end
        xs = self.fleet.xs_at(tx.start)[ids]
        ys = self.fleet.y[ids]
        inside = pkt.area.contains_many(xs, ys)
        sender = pkt.sender_pv
        prog = np.hypot(ring_dx(xs, sender.x, self.fleet.road_length), ys - sender.y)
        routers = self.routers
        for i, t, x, y, p in zip(
            ids[inside].tolist(), rx_end[inside].tolist(), xs[inside].tolist(), ys[inside].tolist(), prog[inside].tolist()
        ):
            routers[i].handle_gbc(pkt, t, x, y, p)

    def _on_deliver(self, node: int, pkt: GbcPacket, now: int) -> None:
        if self.metrics.on_deliver(node, pkt, now):
            self.deliveries += 1

    def _cbr_window(self) -> None:
        w1 = self.sim.now
        w0 = w1 - self.access_cfg.cbr_window
        busy = self.channel.busy_time(w0, w1).tolist()
        for acc, b in zip(self.access, busy):
            acc.on_cbr_window(b)
        self.channel.prune(w1 - 2 * Channel.LOOKBACK)
        self.sim.schedule(w1 + self.access_cfg.cbr_window, EventKind.CBR_WINDOW_END, self._cbr_window)

    def run_until(self, t: int) -> int:
        return self.sim.run_until(t)

    @property
    def reentry_violations(self) -> int:
        return sum(r.reentry_violations for r in self.routers)


@dataclass
class RunResult:
    penetration: float
    seed: int
    reports: list[MessageReport]
    n_vehicles: int
    gbc_tx: int
    cam_tx: int
    collisions: int
    reentry_violations: int
    wall_s: float
    events: int
    gate: GateAudit | None = None
    tx_log: tuple = field(default=(), repr=False)


def run_once(cfg: ScenarioConfig, penetration: float, seed: int, trace: Trace | None = None, keep_log: bool = False) -> RunResult:
    """Warm-up, then a measurement window of 1 Hz geo-broadcasts, then a drain."""
    started = time.perf_counter()
    net = Network.from_scenario(cfg, seed, penetration, trace)
    t_meas = s(cfg.warmup_s)
    t_end_meas = t_meas + s(cfg.measure_s)
    net.den.schedule(max(0, t_meas - cfg.denm.lead), t_end_meas)
    net.sim.schedule(t_meas, EventKind.MEASUREMENT_START, lambda: None)
    net.sim.schedule(t_end_meas, EventKind.MEASUREMENT_END, lambda: None)
    net.run_until(t_end_meas + s(cfg.drain_s))
    t_stop = t_end_meas + s(cfg.drain_s)
    nodes, starts, ends, gbc = net.channel.tx_log()
    return RunResult(
        penetration=penetration,
        seed=seed,
        reports=net.metrics.reports(t_meas, t_end_meas),
        n_vehicles=len(net.fleet) - 1,
        gbc_tx=net.gbc_tx,
        cam_tx=int(len(gbc) - gbc.sum()),
        collisions=net.channel.collided,
        reentry_violations=net.reentry_violations,
        wall_s=time.perf_counter() - started,
        events=net.sim.processed,
        gate=gate_audit(nodes, starts, ends, t_stop),
        tx_log=(nodes.copy(), starts.copy(), ends.copy()) if keep_log else (),
    )
