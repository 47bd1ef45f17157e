"""Discrete-event simulator of Area contention-based forwarding (Release 1 / Release 2)
in a mixed vehicular fleet."""

from cbfsim.engine import Simulator, ms, s
from cbfsim.scenario import ScenarioConfig, load_scenario

__all__ = ["Simulator", "ScenarioConfig", "load_scenario", "ms", "s"]
