from tmkit.sim.conform import ConformanceReport, UnmappedNode, Violation, conforms, node_event_map, project
from tmkit.sim.engine import (
    DEFAULT_MAX_STEPS,
    EffectFailure,
    Firing,
    SimulationError,
    Simulator,
    StepBudgetExhausted,
    Trace,
    simulate,
)

__all__ = [
    "ConformanceReport", "DEFAULT_MAX_STEPS", "EffectFailure", "Firing", "SimulationError",
    "Simulator", "StepBudgetExhausted", "Trace", "UnmappedNode", "Violation", "conforms",
    "node_event_map", "project", "simulate",
]
