import pytest
from hypothesis import given, strategies as st

from cbfsim.engine import EventKind, SchedulingError, Simulator, np_stream, py_stream

K = EventKind.TX_START


def test_zero_time_event_runs_before_later_ones():
    sim = Simulator()
    seen = []
    sim.schedule(5, K, seen.append, "late")
    sim.schedule(0, K, seen.append, "now")
    sim.run_until(10)
    assert seen == ["now", "late"]


def test_simultaneous_events_keep_insertion_order():
    sim = Simulator()
    seen = []
    for tag in "abc":
        sim.schedule(7, K, seen.append, tag)
    sim.run_until(7)
    assert seen == ["a", "b", "c"]


def test_cancelled_event_never_fires():
    sim = Simulator()
    seen = []
    h = sim.schedule(3, K, seen.append, "x")
    assert sim.cancel(h) is True
    assert sim.cancel(h) is False
    assert sim.run_until(10) == 0
    assert seen == []


def test_cancel_after_fire_returns_false():
    sim = Simulator()
    h = sim.schedule(1, K, lambda: None)
    sim.run_until(2)
    assert sim.cancel(h) is False


def test_scheduling_in_the_past_is_fatal():
    sim = Simulator()
    sim.run_until(100)
    with pytest.raises(SchedulingError):
        sim.schedule(99, K, lambda: None)


def test_run_until_empty_queue_advances_clock():
    sim = Simulator()
    assert sim.run_until(1_000) == 0
    assert sim.now == 1_000


def test_run_until_counts_and_reentrancy():
    sim = Simulator()
    seen = []

    def spawn():
        seen.append(sim.now)
        sim.schedule(sim.now + 10, K, seen.append, "child")

    sim.schedule(1, K, spawn)
    sim.schedule(2, K, lambda: None)
    sim.schedule(3, K, lambda: None)
    assert sim.run_until(100) == 4
    assert seen == [1, "child"]
    assert sim.now == 100


@given(st.lists(st.integers(min_value=0, max_value=10_000), min_size=1, max_size=60))
def test_events_fire_in_time_order_and_never_in_the_past(times):
    sim = Simulator()
    fired = []

    def record(t):
        assert sim.now == t
        fired.append(t)

    for t in times:
        sim.schedule(t, K, record, t)
    sim.run_until(max(times))
    assert fired == sorted(times)


def test_named_streams_are_reproducible_and_independent():
    a = [py_stream(42, "backoff").random() for _ in range(3)]
    b = [py_stream(42, "backoff").random() for _ in range(3)]
    assert a == b
    assert py_stream(42, "backoff").random() != py_stream(42, "placement").random()
    assert (np_stream(7, "placement").uniform(size=4) == np_stream(7, "placement").uniform(size=4)).all()
