import math
import os
from pathlib import Path

import pytest

import patrol3d as p3

SCENARIOS = Path(os.environ.get("PATROL_SCENARIOS", Path(__file__).resolve().parents[2] / "scenarios"))


def test_traversability_cost_examples():
    assert p3.traversability_cost(1, 0, 0, 0) == 1.0
    assert p3.traversability_cost(2, 1, 1, 1) == 16.0
    assert p3.traversability_cost(1.5, 0.5, 0, 0) == 2.25


def test_mixed_step_cost_matches_formula():
    a, b, g = (0, 0, 0), (0.3, 0.4, 0.1), (3, 4, 0)
    d = 0.5099019513592785
    h = math.dist(b, g)
    expected = (d + h + 2 * 0.1) * (1 * (2 - 1) / (3 - 1 + 1e-6) + 1)
    assert p3.mixed_step_cost(a, b, g, 2, 1, 3) == pytest.approx(expected, rel=1e-12)


def test_synchronize_keeps_latest_visit():
    assert p3.synchronize_idleness([15, 10, 17], [13, 18, 17]) == [15, 18, 17]


def test_conflict_goes_to_the_cheaper_robot():
    assert p3.detect_node_conflict(1, 7, 5.0, [(0, 7, 3.0)]) == 0
    assert p3.detect_node_conflict(0, 7, 3.0, [(1, 7, 5.0)]) is None
    assert p3.detect_node_conflict(1, 7, 3.0, [(0, 7, 3.0)]) == 0


def test_params_round_trip():
    p = p3.Params()
    assert p["v_max"] == 0.2
    p["D_s"] = 1.5
    assert p.as_dict()["D_s"] == 1.5
    with pytest.raises(ValueError):
        p["warp"] = 1.0


def test_trajectory_graph_is_connected_chain():
    nodes, edges = p3.build_graph_from_trajectories([[(0, 0, 0), (10, 0, 0)]], 1.0, 0.5)
    assert 8 <= len(nodes) <= 12
    assert len(edges) >= len(nodes) - 1


def test_run_line_scenario():
    summary, csv = p3.run(str(SCENARIOS / "line.json"), strategy="cc", seed=3, duration=100)
    assert csv.startswith("t,node,event,robot,value\n")
    assert summary == p3.summarize_csv(csv)
    visits = [r for r in p3.parse_csv(csv) if r[2] == "visit"]
    periods = [b[0] - a[0] for a, b in zip(visits, visits[2:])]
    assert periods and all(abs(x - 40.0) <= 0.2 for x in periods)


def test_same_seed_same_csv():
    a = p3.run(str(SCENARIOS / "crossroad.json"), seed=4, duration=60)[1]
    b = p3.run(str(SCENARIOS / "crossroad.json"), seed=4, duration=60)[1]
    assert a == b


def test_simulation_stepping():
    sim = p3.Simulation(str(SCENARIOS / "crossroad.json"), strategy="nocc", seed=2, duration=30)
    start = sim.positions
    for _ in range(50):
        sim.step()
    assert sim.ticks == 50
    assert sim.time == pytest.approx(5.0)
    for a, b in zip(start, sim.positions):
        assert math.dist(a, b) <= 0.2 * 5.0 + 1e-9
    assert all(g is not None for g in sim.goals)
    summary = sim.run()
    assert sim.time == pytest.approx(30.0)
    assert summary["deadlock"] in (True, False)


def test_bad_inputs_raise():
    with pytest.raises(ValueError):
        p3.run(str(SCENARIOS / "missing.json"))
    with pytest.raises(ValueError):
        p3.Strategy.parse("greedy")
    with pytest.raises(ValueError):
        p3.parse_csv("time,node\n")
