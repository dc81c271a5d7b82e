import math

import pytest

import mhplan


def test_safe_passage_1d_matches_closed_form():
    mu, var = mhplan.free_space_1d(0.0, 0.01, 0.2, 0.0, 1.5, 0.01, 0.2, 0.0)
    assert mu == pytest.approx(1.1)
    assert var == pytest.approx(0.02)
    p = mhplan.safe_passage_probability_1d(mu, var, 1.0)
    expected = 0.5 * math.erfc((1.0 - mu) / math.sqrt(var) / math.sqrt(2))
    assert p == pytest.approx(expected, abs=1e-12)


def test_safe_passage_2d_is_rotation_invariant():
    a = mhplan.ObstacleBelief2D((0.0, 0.0), 0.4, 0.02, 0.0, 0.02, 0.001)
    b = mhplan.ObstacleBelief2D((1.5, 0.0), 0.4, 0.02, 0.0, 0.02, 0.001)
    c = mhplan.ObstacleBelief2D((0.0, 1.5), 0.4, 0.02, 0.0, 0.02, 0.001)
    assert mhplan.safe_passage_probability_2d(a, b, 0.6) == pytest.approx(
        mhplan.safe_passage_probability_2d(a, c, 0.6), abs=1e-12)
    with pytest.raises(ValueError):
        mhplan.safe_passage_probability_2d(a, a, 0.6)


def test_delaunay_square():
    t = mhplan.delaunay([(0, 0), (1, 0), (1, 1), (0, 1)])
    assert len(t["triangles"]) == 2
    assert len(t["faces"]) == 5


def test_graph_and_plan():
    trees = [mhplan.LandmarkEstimate(i, (3.0 + 2.0 * (i // 2), 2.0 + 2.0 * (i % 2)), 0.01, 0.0, 0.01, 0.3, 0.001)
             for i in range(6)]
    g = mhplan.build_navigation_graph(trees, (0.0, 3.0), (12.0, 3.0))
    assert len(g.vertices) > 2
    result = mhplan.plan(g, mhplan.PlannerParams(n_hyp=3, p_target=0.95), (0.0, 3.0))
    assert result["best_index"] is not None
    best = result["candidates"][result["best_index"]]
    assert best.vertices[0] == g.start_id and best.vertices[-1] == g.goal_id
    independent, worst = mhplan.collision_bounds(g, best)
    assert 0.0 <= worst <= independent <= 1.0


def test_local_planner_and_smoother():
    discs = [(2.5, 0.0, 0.3)]
    path = mhplan.hybrid_a_star((0.0, 0.0, 0.0), (5.0, 0.0), discs, 0.6)
    assert path is not None
    assert path[-1] == pytest.approx((5.0, 0.0))
    smooth = mhplan.smooth_path(path, discs, 0.6)
    assert smooth[0] == pytest.approx(path[0]) and smooth[-1] == pytest.approx(path[-1])
    grid = mhplan.baseline_global_astar((0, 0), (5, 0), discs, 0.6, (-2, -3), (7, 3))
    assert grid is not None


def test_config_and_episode():
    cfg = mhplan.parse_config("num_forests: 1\nworld: {width_m: 12, height_m: 6, start_y_m: 3, goal_x_m: 12, goal_y_m: 3}\n")
    assert cfg.num_forests == 1
    with pytest.raises(ValueError, match="robot.v_max"):
        mhplan.parse_config("robot:\n  v_max: fast\n", "bad.yaml")
    rec = mhplan.run_episode(cfg, seed=3, density=0.1, planner="mh", n_hyp=2)
    again = mhplan.run_episode(cfg, seed=3, density=0.1, planner="mh", n_hyp=2)
    assert rec == again
    assert rec["outcome"] in {"success", "stopped", "crash", "timeout"}
    assert "wall_time_s" not in rec
