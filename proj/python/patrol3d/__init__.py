"""Multi-robot patrolling simulator bindings."""

from ._core import (
    Params,
    Simulation,
    Strategy,
    build_graph_from_trajectories,
    detect_node_conflict,
    load_scenario,
    mixed_step_cost,
    parse_csv,
    run,
    summarize_csv,
    synchronize_idleness,
    traversability_cost,
)

__all__ = [
    "Params",
    "Simulation",
    "Strategy",
    "build_graph_from_trajectories",
    "detect_node_conflict",
    "load_scenario",
    "mixed_step_cost",
    "parse_csv",
    "run",
    "summarize_csv",
    "synchronize_idleness",
    "traversability_cost",
]
