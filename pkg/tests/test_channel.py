from cbfsim.channel import Channel, ChannelConfig, RxOutcome, airtime, resolve_reception
from cbfsim.engine import EventKind, Simulator
from cbfsim.mobility import Release, static_line


class Blob:
    deliver = True
    msg_id = None

    def __init__(self, tag="f"):
        self.tag = tag


def medium(positions):
    sim = Simulator()
    fleet = static_line(positions, [Release.R1] * len(positions))
    got = []
    ch = Channel(sim, fleet, ChannelConfig(), lambda tx, ids, t, ok: got.append((tx.payload.tag, ids.tolist(), ok.tolist())))
    return sim, ch, got


def test_airtime_of_a_denm():
    assert airtime(301, ChannelConfig()) == 441  # 40 + 401.33
    assert airtime(285, ChannelConfig()) == 420


def test_range_cutoff():
    sim, ch, got = medium([0.0, 1500.0, 1501.0])
    ch.broadcast(0, Blob(), 301)
    sim.run_until(10_000)
    assert got == [("f", [1], [True])]


def test_lonely_transmitter_reaches_nobody():
    sim, ch, got = medium([0.0])
    ch.broadcast(0, Blob(), 301)
    sim.run_until(10_000)
    assert got == []


def test_resolve_reception_rules():
    assert resolve_reception((0, 441), []) is RxOutcome.DELIVERED
    assert resolve_reception((0, 441), [(440, 881)]) is RxOutcome.COLLIDED
    assert resolve_reception((0, 441), [(441, 882)]) is RxOutcome.DELIVERED


def test_collision_is_per_receiver():
    # B(-500)  T1(0)  A(800)  T2(1600): A hears both frames, B only T1
    sim, ch, got = medium([0.0, 1600.0, 800.0, -500.0])
    ch.broadcast(0, Blob("t1"), 301)
    sim.schedule(100, EventKind.TX_START, ch.broadcast, 1, Blob("t2"), 301)
    sim.run_until(10_000)
    outcome = {tag: dict(zip(ids, ok)) for tag, ids, ok in got}
    assert outcome["t1"][2] is False
    assert outcome["t1"][3] is True
    assert outcome["t2"][2] is False


def test_busy_sensing():
    sim, ch, _ = medium([0.0, 1499.0, 3200.0])
    assert not ch.is_busy(1, 0)
    tx = ch.broadcast(0, Blob(), 301)
    mid = (tx.start + tx.end) // 2
    assert ch.is_busy(0, mid)  # own transmission
    assert ch.is_busy(1, mid)
    assert not ch.is_busy(2, mid)
    assert not ch.is_busy(1, tx.end)


def test_single_transmitter_always_delivers():
    positions = [0.0, 100.0, 700.0, 1400.0]
    sim, ch, got = medium(positions)
    for k in range(5):
        sim.schedule(k * 2_000, EventKind.TX_START, ch.broadcast, 0, Blob(str(k)), 301)
    sim.run_until(20_000)
    assert len(got) == 5
    assert all(all(ok) and ids == [1, 2, 3] for _, ids, ok in got)


def test_busy_time_is_union_of_in_range_intervals():
    sim, ch, _ = medium([0.0, 1000.0, 2000.0])
    ch.broadcast(0, Blob(), 301)  # [0, 441)
    sim.schedule(200, EventKind.TX_START, ch.broadcast, 2, Blob(), 301)  # [200, 641)
    sim.run_until(1_000)
    busy = ch.busy_time(0, 100_000)
    assert busy.tolist() == [441.0, 641.0, 441.0]
