import random

import pytest
from hypothesis import given, strategies as st

from cbfsim.access import (
    DUTY_MAX,
    DUTY_MIN,
    AccessConfig,
    AccessLayer,
    EnqueueResult,
    TrafficClass,
    dcc_update,
    gate_interval,
    smooth_cbr,
)
from cbfsim.channel import Channel, ChannelConfig
from cbfsim.engine import EventKind, Simulator
from cbfsim.mobility import Release, static_line
from cbfsim.trace import ALL, Rec, Trace


class Frame:
    deliver = False
    msg_id = None

    def __init__(self, tag):
        self.tag = tag


def stations(positions, cw=None, seed=0):
    sim = Simulator()
    fleet = static_line(positions, [Release.R1] * len(positions))
    ch = Channel(sim, fleet, ChannelConfig())
    cfg = AccessConfig()
    if cw is not None:
        cfg.edca = {tc: (aifs, cw) for tc, (aifs, _) in cfg.edca.items()}
    started = []
    macs = [
        AccessLayer(i, sim, ch, cfg, random.Random(seed + i), Trace(ALL), lambda tx: started.append((tx.node, tx.payload.tag, tx.start)))
        for i in range(len(positions))
    ]
    return sim, ch, macs, started


# -- DCC arithmetic ---------------------------------------------------------

def test_cbr_smoothing():
    assert smooth_cbr(0.1, 0.1) == pytest.approx(0.1)
    assert smooth_cbr(0.2, 0.0) == pytest.approx(0.1)
    assert smooth_cbr(1.0, 1.0) == pytest.approx(1.0)


def test_dcc_update_clamps_and_decays():
    assert dcc_update(0.03, 0.1) == 0.03
    assert dcc_update(0.0006, 0.9) == 0.0006
    assert dcc_update(0.01, 0.9) == pytest.approx(0.0095)
    assert dcc_update(0.01, 0.1) == pytest.approx(0.0102)


def test_gate_interval_clamping():
    assert gate_interval(0.03, 441) == 25_000  # raw 14.26 ms
    assert gate_interval(0.0006, 441) == 734_559  # 441 * 0.9994 / 0.0006
    assert gate_interval(0.0006, 1_000) == 1_000_000


@given(st.lists(st.floats(min_value=0.0, max_value=1.0), max_size=300))
def test_duty_stays_in_band(cbrs):
    duty = DUTY_MAX
    for c in cbrs:
        duty = dcc_update(duty, c)
        assert DUTY_MIN <= duty <= DUTY_MAX


@given(st.floats(min_value=DUTY_MIN, max_value=DUTY_MAX), st.integers(min_value=1, max_value=5_000))
def test_gate_interval_bounds_rate_between_1_and_40_hz(duty, air):
    g = gate_interval(duty, air)
    assert 25_000 <= g <= 1_000_000


# -- queues -------------------------------------------------------------------

def test_enqueue_and_overflow():
    sim, ch, (m,), _ = stations([0.0])
    m.dcc.gate_next = 10**9  # hold everything in the queue
    results = [m.enqueue(Frame(i), 301, TrafficClass.TC3) for i in range(5)]
    assert results[:4] == [EnqueueResult.ACCEPTED] * 4
    assert results[4] is EnqueueResult.DROPPED_QUEUE_FULL
    assert len(m.trace.of(Rec.QUEUE_DROP)) == 1


def test_highest_priority_first():
    sim, ch, (m,), started = stations([0.0], cw=0)
    m.dcc.gate_next = 1_000
    m.enqueue(Frame("tc3"), 301, TrafficClass.TC3)
    m.enqueue(Frame("tc0"), 301, TrafficClass.TC0)
    sim.run_until(2_000_000)
    assert [tag for _, tag, _ in started] == ["tc0", "tc3"]


# -- gate and CSMA ------------------------------------------------------------

def test_next_permitted_tx():
    sim, ch, (m,), _ = stations([0.0])
    m.dcc.gate_next = 0
    assert m.next_permitted_tx(500) == 500
    m.dcc.gate_next = 10_500
    assert m.next_permitted_tx(500) == 10_500


def test_gate_closes_for_25ms_after_a_transmission():
    sim, ch, (m,), started = stations([0.0], cw=0)
    m.enqueue(Frame("a"), 301, TrafficClass.TC0)
    sim.run_until(1_000)
    (_, _, t0), = started
    tx_end = t0 + 441
    assert m.next_permitted_tx(sim.now) == tx_end + 25_000


def test_idle_channel_zero_backoff_starts_after_aifs():
    sim, ch, (m,), started = stations([0.0], cw=0)
    m.enqueue(Frame("a"), 301, TrafficClass.TC3)
    sim.run_until(10_000)
    assert started == [(0, "a", 7 * 13)]


def test_busy_channel_defers_past_busy_period():
    sim, ch, (a, b), started = stations([0.0, 500.0], cw=0)
    a.enqueue(Frame("a"), 301, TrafficClass.TC0)  # on air [26, 467)
    sim.schedule(100, EventKind.TX_START, b.enqueue, Frame("b"), 301, TrafficClass.TC0)
    sim.run_until(10_000)
    assert started == [(0, "a", 26), (1, "b", 467 + 26)]


def test_different_backoff_draws_do_not_collide():
    sim, ch, (a, b), started = stations([0.0, 500.0], cw=0)
    # hand timeline: a draws 0 slots, b draws 3: a starts at 26, b senses it and waits
    a.cfg = AccessConfig(edca={0: (2, 0), 1: (2, 0), 2: (3, 0), 3: (7, 0)})
    b.cfg = AccessConfig(edca={0: (2, 3), 1: (2, 3), 2: (3, 3), 3: (7, 3)})
    b.rng = type("R", (), {"randint": staticmethod(lambda lo, hi: 3)})()
    a.enqueue(Frame("a"), 301, TrafficClass.TC0)
    b.enqueue(Frame("b"), 301, TrafficClass.TC0)
    sim.run_until(10_000)
    assert started[0] == (0, "a", 26)
    # b had counted down 0 slots when a started; resumes after a ends: 467 + AIFS + 3 slots
    assert started[1] == (1, "b", 467 + 26 + 39)
    assert ch.collided == 0


def test_same_draw_collides():
    sim, ch, (a, b), started = stations([0.0, 500.0], cw=0)
    a.enqueue(Frame("a"), 301, TrafficClass.TC0)
    b.enqueue(Frame("b"), 301, TrafficClass.TC0)
    sim.run_until(10_000)
    assert [t for *_, t in started] == [26, 26]


def test_cbr_window_updates_dcc():
    sim, ch, (m,), _ = stations([0.0])
    m.dcc.cbr = 0.9
    m.dcc.duty = 0.01
    m.on_cbr_window(90_000)
    assert m.dcc.cbr == pytest.approx(0.9)
    assert m.dcc.duty == pytest.approx(0.0095)
