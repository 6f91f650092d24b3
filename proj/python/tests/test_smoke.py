import math

import pytest

import fairbalance as fb


def test_skellam_and_censored_rows():
    assert fb.skellam_pmf(0, 1.0, 1.0) == pytest.approx(0.30850832255367103953, abs=1e-14)
    row = fb.censored_transition_row(20, 100, 13.8, 7.0)
    assert len(row) == 101
    assert math.fsum(row) == pytest.approx(1.0, abs=1e-9)


def test_scenario_tables():
    sc = fb.build_scenario(5)
    assert sc.M == 5
    assert sc.total_nodes() == 160
    assert [c.phi for c in sc.categories][0] == 1.0
    assert sc.actions()[0] == -30
    with pytest.raises(fb.ConfigError):
        fb.build_scenario(7)


def test_overrides_and_reward():
    sc = fb.parse_scenario_overrides("M = 1\nnodes.1 = 2\nsigma = 20\n")
    assert sc.sigma == 20
    r = fb.fair_local_reward(sc, 1, 0, 0, 0, fb.Period.morning)
    assert r.total == 0.0


def test_metrics():
    assert fb.gini([0.0, 1.0]) == 0.5
    assert fb.pareto_front_indices([(3, 1), (1, 3), (1, 3), (3, 1)]) == [1, 0]
    with pytest.raises(ValueError):
        fb.gini([])


def test_train_evaluate_roundtrip():
    sc = fb.build_scenario(2)
    sc.train_days = 30
    sc.eval_days = 3
    policies = fb.train(sc, 1)
    assert fb.loads_policies(policies.dumps()) == policies
    a = fb.evaluate(policies, sc, 2)
    b = fb.evaluate(policies, sc, 2)
    assert a.gini == b.gini and a.global_cost == b.global_cost
    assert len(a.failure_prob) == 2
    assert a.global_cost == pytest.approx(a.C1 + 10 * a.C2 + 0.01 * a.C3, abs=1e-9)


def test_sweep(tmp_path):
    rows = fb.run_sweep([2], [0.0, 1.0], [0], tmp_path, scale=0.0005, eval_days=2)
    assert len(rows) == 2
    assert (tmp_path / "results.csv").exists()
    assert (tmp_path / "summary.json").exists()
