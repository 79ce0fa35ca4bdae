"""End-to-end smoke tests for the python bindings."""

import math

import pytest

import darvrp


def test_geometry_ops():
    assert darvrp.euclidean_distance(darvrp.Coord(0, 0), darvrp.Coord(3, 4)) == 5.0
    inst = darvrp.Instance("t", (0.0, 0.0), [(1.0, 0.0, 5.0), (0.0, 1.0, 5.0)], 30.0)
    assert inst.n == 2
    row = darvrp.distance_row(inst, 0)
    assert row == [0.0, 1.0, 1.0]
    sol = darvrp.Solution([[1, 2]], 0.0)
    cost = darvrp.solution_cost(inst, sol)
    assert cost == pytest.approx(2 + math.sqrt(2))
    assert darvrp.check_feasible(inst, sol).ok


def test_generate_parse_roundtrip():
    inst = darvrp.generate(n=15, seed=3)
    text = darvrp.emit_instance(inst)
    back = darvrp.parse_instance(text)
    assert back.n == inst.n
    assert back.capacity == inst.capacity
    for i in range(inst.n + 1):
        assert back.node(i).x == inst.node(i).x
        assert back.demand(i) == inst.demand(i)


def test_parse_rejects_broken_input():
    with pytest.raises(darvrp.DataError):
        darvrp.parse_instance("DIMENSION : 3\nEOF\n")


def test_baselines_and_oracle():
    inst = darvrp.generate(n=6, seed=11)
    greedy = darvrp.greedy_nearest(inst)
    assert darvrp.check_feasible(inst, greedy).ok
    oracle = darvrp.exact_optimum(inst)
    assert oracle.optimal_cost <= greedy.cost + 1e-9
    assert darvrp.gap(206866, 192848) == pytest.approx(7.27, abs=0.01)


def test_batch_size_formula():
    assert darvrp.batch_size_for(100) == 120
    assert darvrp.batch_size_for(500) == 9
    assert darvrp.batch_size_for(10000) == 1


def test_distance_scores_eq7():
    coords = [darvrp.Coord(0, 0), darvrp.Coord(1, 0), darvrp.Coord(0.1, 0)]
    b = darvrp.distance_scores(coords, 0, 100)
    assert b[1] == pytest.approx(0.0)
    assert b[2] == pytest.approx(-math.log(0.1))
    b_small_k = darvrp.distance_scores(coords, 0, 1)
    assert b_small_k[1] == pytest.approx(-1.0)  # outside top-K: -d


def test_policy_solves_feasibly():
    cfg = darvrp.PolicyConfig()
    cfg.width = 16
    cfg.heads = 2
    cfg.layers = 1
    params = darvrp.init_policy(cfg, seed=1)
    inst = darvrp.generate(n=12, seed=5)
    sol = darvrp.policy_solve(inst, params, cfg, m=4)
    assert darvrp.check_feasible(inst, sol).ok
    again = darvrp.policy_solve(inst, params, cfg, m=4)
    assert again.routes == sol.routes


def test_checkpoint_roundtrip(tmp_path):
    cfg = darvrp.PolicyConfig()
    cfg.width = 16
    cfg.heads = 2
    cfg.layers = 1
    cfg.dar_enabled = False
    params = darvrp.init_policy(cfg, seed=2)
    path = str(tmp_path / "model.ckpt")
    params.save(path, cfg)
    loaded, loaded_cfg = darvrp.ParamStore.load(path)
    assert loaded.names() == params.names()
    assert loaded_cfg.width == 16
    assert not loaded_cfg.dar_enabled
    inst = darvrp.generate(n=10, seed=9)
    a = darvrp.policy_solve(inst, params, cfg, m=3)
    b = darvrp.policy_solve(inst, loaded, loaded_cfg, m=3)
    assert a.routes == b.routes


def test_short_training_runs_and_improves_nothing_breaks():
    cfg = darvrp.TrainConfig()
    cfg.policy.width = 16
    cfg.policy.heads = 2
    cfg.policy.layers = 1
    cfg.policy.dar_enabled = False
    cfg.n_low = cfg.n_high = 6
    cfg.steps = 2
    cfg.base_batch = 1
    cfg.m = 4
    cfg.seed = 3
    params = darvrp.init_policy(cfg.policy, seed=3)
    rows = darvrp.train(cfg, params)
    assert len(rows) == 2
    assert all(math.isfinite(r["loss"]) for r in rows)


def test_dispersion_profile():
    cfg = darvrp.PolicyConfig()
    cfg.width = 16
    cfg.heads = 2
    cfg.layers = 1
    params = darvrp.init_policy(cfg, seed=4)
    inst = darvrp.generate(n=25, seed=6)
    stats = darvrp.dispersion_profile(inst, params, cfg, tau=-1.0, steps=1)
    assert len(stats) == 1
    assert stats[0].feasible_count == 25
    assert 0.0 <= stats[0].fraction <= 1.0
