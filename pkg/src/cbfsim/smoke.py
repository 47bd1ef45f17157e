"""Five motionless nodes on a line, one geo-broadcast, no CAM load."""

from __future__ import annotations

from cbfsim.access import AccessConfig
from cbfsim.channel import ChannelConfig
from cbfsim.facilities import CamConfig
from cbfsim.mobility import DestinationArea, Release, static_line
from cbfsim.network import Network
from cbfsim.trace import ALL, Rec, Trace

LINE = (0.0, 300.0, 600.0, 900.0, 1200.0)


def line_network(
    positions=LINE,
    releases=None,
    *,
    max_range: float = 1500.0,
    cw: int | None = 0,
    seed: int = 1,
    cbf=None,
) -> Network:
    releases = list(releases or [Release.R1] * len(positions))
    fleet = static_line(list(positions), releases)
    lo, hi = min(positions), max(positions)
    area = DestinationArea(cx=(lo + hi) / 2, cy=0.0, half_length=(hi - lo) / 2 + 1.0, half_width=5.0)
    access = AccessConfig()
    if cw is not None:
        access.edca = {tc: (aifs, cw) for tc, (aifs, _) in access.edca.items()}
    return Network(
        fleet,
        area,
        channel=ChannelConfig(max_range=max_range),
        access=access,
        cbf=cbf,
        cam=CamConfig(enabled=False),
        seed=seed,
        trace=Trace(ALL),
    )


def forwarding_schedule(net: Network, until: int = 2_000_000) -> list[tuple[int, int]]:
    """(node, tx start) of every geo-broadcast transmission after one origination at t=0."""
    net.den.denm_tick()
    net.run_until(until)
    return [(r.node, r.t) for r in net.trace.of(Rec.TX_START) if r.message is not None]


def run_smoke() -> dict[str, list[tuple[int, int]]]:
    out = {}
    for rel in (Release.R1, Release.R2):
        out[rel.value] = forwarding_schedule(line_network(releases=[rel] * len(LINE)))
    return out
