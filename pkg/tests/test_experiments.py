import math

import pytest

from resgames import (
    BudgetExceededError,
    DesignSpec,
    ExperimentConfig,
    ExperimentResult,
    ValidationError,
    apply_design,
    export_result,
    gen_wta,
    is_nash,
    k_round_walk,
    load_raw_csv,
    run_experiment,
)


SMALL = ExperimentConfig(
    n_agents=5, n_targets=8, n_instances=12, rounds=3, master_seed=7,
)


def quartile_oracle(values, q):
    # plain linear interpolation on the sorted sample
    v = sorted(values)
    pos = (len(v) - 1) * q
    lo, hi = int(math.floor(pos)), int(math.ceil(pos))
    return v[lo] + (v[hi] - v[lo]) * (pos - lo)


def test_gen_wta_deterministic_and_normalized():
    a = gen_wta(SMALL, 3)
    b = gen_wta(SMALL, 3)
    assert [r.value for r in a.resources] == [r.value for r in b.resources]
    assert a.actions == b.actions
    assert sum(r.value for r in a.resources) == pytest.approx(1.0, abs=1e-12)
    c = gen_wta(SMALL, 4)
    assert [r.value for r in a.resources] != [r.value for r in c.resources]


def test_gen_wta_windows_are_consecutive():
    g = gen_wta(SMALL, 0)
    n = SMALL.n_targets
    for acts in g.actions:
        for a in acts:
            if not a:
                continue
            idx = sorted(int(rid[1:]) for rid in a)
            assert len(idx) == SMALL.action_width
            spans = {(idx[0] + d) % n for d in range(len(idx))} == set(idx) or \
                    {(idx[-1] + d) % n for d in range(len(idx))} == set(idx)
            assert spans


def test_gen_wta_tabulated_for_all_agents():
    gen_wta(SMALL, 0).validate_tabulation()


def test_run_experiment_rows_and_bounds():
    res = run_experiment(SMALL)
    assert len(res.rows) == SMALL.n_instances * len(SMALL.designs) * SMALL.rounds
    assert all(0.0 <= r.normalized_welfare <= 1.0 + 1e-12 for r in res.rows)
    # common interest welfare never drops between rounds
    ci = {}
    for r in res.rows:
        if r.design == "common_interest":
            ci.setdefault(r.instance, {})[r.round] = r.welfare
    for rounds in ci.values():
        for k in range(1, SMALL.rounds):
            assert rounds[k] <= rounds[k + 1] + 1e-12


def test_converged_instances_are_nash():
    for idx in range(4):
        base = gen_wta(SMALL, idx)
        g = apply_design(base, DesignSpec("common_interest"))
        traj = k_round_walk(g, SMALL.rounds)
        n = g.n_players
        states = traj.states()
        if states[(SMALL.rounds - 1) * n] == states[SMALL.rounds * n]:
            assert is_nash(g, traj.final)


def test_summary_matches_independent_quartiles():
    res = run_experiment(SMALL)
    for s in res.summary:
        vals = [
            r.normalized_welfare
            for r in res.rows
            if r.design == s.design and r.round == s.round
        ]
        assert s.min == pytest.approx(min(vals), abs=1e-12)
        assert s.q1 == pytest.approx(quartile_oracle(vals, 0.25), abs=1e-12)
        assert s.median == pytest.approx(quartile_oracle(vals, 0.5), abs=1e-12)
        assert s.q3 == pytest.approx(quartile_oracle(vals, 0.75), abs=1e-12)
        assert s.max == pytest.approx(max(vals), abs=1e-12)


def test_export_round_trip_and_determinism(tmp_path):
    res = run_experiment(SMALL)
    p1 = export_result(res, "both", tmp_path / "a")
    res2 = run_experiment(SMALL)
    p2 = export_result(res2, "both", tmp_path / "b")
    for a, b in zip(p1, p2):
        assert a.read_bytes() == b.read_bytes()
    rows = load_raw_csv(tmp_path / "a" / "raw.csv")
    assert rows == res.rows


def test_export_empty_result(tmp_path):
    res = ExperimentResult(SMALL, [], [])
    raw, summ = export_result(res, "csv", tmp_path)
    assert raw.read_text() == "instance,design,round,welfare,normalized_welfare\n"
    assert summ.read_text() == "design,round,min,q1,median,q3,max\n"


def test_budget_guard():
    big = ExperimentConfig(n_agents=30, n_targets=31, n_instances=1)
    with pytest.raises(BudgetExceededError):
        run_experiment(big)


def test_config_validation_and_round_trip():
    with pytest.raises(ValidationError):
        ExperimentConfig(action_width=20, n_targets=10)
    cfg = ExperimentConfig.from_dict(SMALL.to_dict())
    assert cfg == SMALL


def test_thread_count_does_not_change_results(monkeypatch):
    base = run_experiment(SMALL)
    monkeypatch.setenv("RESGAMES_THREADS", "3")
    threaded = run_experiment(SMALL)
    assert threaded.rows == base.rows
    assert threaded.summary == base.summary
