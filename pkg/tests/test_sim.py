import json
from pathlib import Path

import numpy as np
import pytest

from helpers import UnionFind, random_robot, scenario_dict
from teamcoop.errors import EmptyTrajectory, ScenarioError, SimulationError
from teamcoop.files import bundled, load_json, metrics_text
from teamcoop.org import Leaf, Team
from teamcoop.payoff import member_payoff, team_payoff
from teamcoop.sim import (
    CoopGraph,
    EpochRecord,
    Scenario,
    metrics,
    pair_draw,
    reform_teams,
    run,
    scenario_violations,
    validate_forest,
)

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="module")
def example():
    return Scenario.from_dict(load_json(bundled("example_scenario.json")))


def graph(ids, edges, mode="symmetric"):
    if mode == "symmetric":
        pairs = [(ids[i], ids[j]) for i in range(len(ids)) for j in range(i + 1, len(ids))]
        on = {tuple(e) for e in edges}
        return CoopGraph(tuple(ids), tuple((p, int(p in on)) for p in pairs), mode)
    pairs = [(a, b) for a in ids for b in ids if a != b]
    on = {tuple(e) for e in edges}
    return CoopGraph(tuple(ids), tuple((p, int(p in on)) for p in pairs), mode)


def robots_of(n, seed=0):
    rng = np.random.default_rng(seed)
    return [random_robot(rng, f"r{k}") for k in range(1, n + 1)]


# reform_teams


def test_no_edges_gives_singletons():
    rs = robots_of(4)
    forest = reform_teams(graph([r.id for r in rs], []), rs)
    assert len(forest) == 4 and all(isinstance(t, Leaf) for t in forest)


def test_complete_cooperation_gives_one_team():
    rs = robots_of(5)
    ids = [r.id for r in rs]
    forest = reform_teams(graph(ids, [(a, b) for i, a in enumerate(ids) for b in ids[i + 1:]]), rs)
    assert len(forest) == 1 and isinstance(forest[0], Team)
    assert len(forest[0].children) == 5


def test_two_components():
    rs = robots_of(4)
    forest = reform_teams(graph(["r1", "r2", "r3", "r4"], [("r1", "r2"), ("r3", "r4")]), rs)
    assert [sorted(c.robot_id for c in t.children) for t in forest] == [["r1", "r2"], ["r3", "r4"]]
    assert validate_forest(forest, rs) == []


def test_directed_edges_need_both_directions():
    rs = robots_of(3)
    g = graph(["r1", "r2", "r3"], [("r1", "r2"), ("r2", "r1"), ("r2", "r3")], "directed")
    assert g.edges() == [("r1", "r2")]
    forest = reform_teams(g, rs)
    assert len(forest) == 2


def test_components_match_union_find():
    rng = np.random.default_rng(99)
    for _ in range(50):
        n = int(rng.integers(1, 11))
        rs = robots_of(n, int(rng.integers(1000)))
        ids = [r.id for r in rs]
        edges = [(a, b) for i, a in enumerate(ids) for b in ids[i + 1:] if rng.random() < 0.25]
        uf = UnionFind(ids)
        for a, b in edges:
            uf.union(a, b)
        forest = reform_teams(graph(ids, edges), rs)
        got = sorted((frozenset([t.robot_id] if isinstance(t, Leaf) else [c.robot_id for c in t.children]) for t in forest), key=sorted)
        assert got == uf.groups()


# metrics


def _record(states, n_ids):
    ids = [f"r{k}" for k in range(1, n_ids + 1)]
    rs = robots_of(n_ids)
    g = graph(ids, [p for p, s in states])
    forest = tuple(reform_teams(g, rs))
    from teamcoop.payoff import JointProfile
    from teamcoop.sim import PairRecord
    from teamcoop.coop import TransitionMatrix
    pairs = tuple(
        PairRecord(p, "a", 0.5, 0.5, TransitionMatrix.from_stay(0.5, 0.5), s) for p, s in g.states
    )
    return EpochRecord(0, "symmetric", JointProfile.from_lists([["a"] * (n_ids - 1)] * n_ids, "symmetric"),
                       (0.0,) * n_ids, 0.0, pairs, forest, (0.0,) * n_ids, (0.0,) * len(forest))


def test_metrics_examples():
    ids = ["r1", "r2", "r3", "r4"]
    all_pairs = [(ids[i], ids[j]) for i in range(4) for j in range(i + 1, 4)]
    full = metrics([_record([(p, 1) for p in all_pairs], 4)])["per_epoch"][0]
    assert full["cooperation_density"] == 1.0 and full["team_count"] == 1
    none = metrics([_record([], 4)])["per_epoch"][0]
    assert none["cooperation_density"] == 0.0 and none["team_count"] == 4
    two = metrics([_record([(("r1", "r2"), 1), (("r3", "r4"), 1)], 4)])["per_epoch"][0]
    assert two["cooperation_density"] == pytest.approx(1 / 3)
    assert two["mean_team_size"] == 2.0


def test_metrics_empty():
    with pytest.raises(EmptyTrajectory):
        metrics([])


# run


def test_absorbing_cooperation():
    data = scenario_dict(n=4, prior=1.0, epochs=1, initial_state=1)
    records = run(Scenario.from_dict(data))
    assert len(records) == 1
    assert all(p.state == 1 for p in records[0].pairs)
    assert all(p.posterior_coop == 1.0 for p in records[0].pairs)
    assert len(records[0].forest) == 1 and len(records[0].forest[0].children) == 4


def test_uninformative_observations_keep_beliefs():
    data = scenario_dict(prior=0.5, lc=(0.3, 0.7), ln=(0.3, 0.7), epochs=8)
    for rec in run(Scenario.from_dict(data)):
        assert all(p.posterior_coop == pytest.approx(0.5, abs=1e-12) for p in rec.pairs)


def test_bundled_example_matches_golden(example):
    assert metrics_text(metrics(run(example))) == (DATA / "golden_metrics.csv").read_text()


def test_replay_determinism(example):
    a = [r.to_dict() for r in run(example)]
    b = [r.to_dict() for r in run(example)]
    assert a == b


def test_seed_changes_outcomes(example):
    a = [[p.state for p in r.pairs] for r in run(example)]
    b = [[p.state for p in r.pairs] for r in run(example.with_overrides(seed=43))]
    assert a != b


@pytest.mark.parametrize("mode", ["symmetric", "directed"])
@pytest.mark.parametrize("update", ["fixed", "posterior-feedback"])
def test_records_are_self_consistent(mode, update):
    data = scenario_dict(n=4, mode=mode, prior_update=update, epochs=15, seed=5)
    scenario = Scenario.from_dict(data)
    for rec in run(scenario):
        priors = {p.pair: p.prior_coop for p in rec.pairs}
        model = scenario.payoff_model(priors)
        assert rec.team_payoff == team_payoff(model, rec.profile)
        assert rec.member_payoffs == tuple(member_payoff(model, i, v) for i, v in enumerate(rec.profile.vectors))
        assert validate_forest(rec.forest, scenario.robots) == []
        # component soundness against the cooperating edges
        g = rec.graph(scenario.robot_ids)
        team_of = {}
        for k, t in enumerate(rec.forest):
            for rid in ([t.robot_id] if isinstance(t, Leaf) else [c.robot_id for c in t.children]):
                team_of[rid] = k
        for a, b in g.edges():
            assert team_of[a] == team_of[b]
        assert sum(rec.team_eu) == pytest.approx(sum(rec.realized_payoffs))


def test_posterior_feedback_drives_prior_up():
    # "a" is informative for cooperation and strongly preferred by the payoffs
    data = scenario_dict(prior=0.3, lc=(0.8, 0.2), ln=(0.3, 0.7), u_coop=(5.0, 0.0), u_noncoop=(1.0, -50.0),
                         prior_update="posterior-feedback", epochs=25)
    records = run(Scenario.from_dict(data))
    assert all(p.action == "a" for r in records for p in r.pairs)
    priors = [r.pairs[0].prior_coop for r in records]
    assert all(b > a for a, b in zip(priors, priors[1:]))
    assert priors[-1] > 0.999


def test_ga_policy_runs_and_is_deterministic():
    data = scenario_dict(n=3, mode="directed", optimizer={"method": "ga", "params": {"generations": 20}}, epochs=5)
    s = Scenario.from_dict(data)
    assert [r.to_dict() for r in run(s)] == [r.to_dict() for r in run(s)]


def test_optimizer_failure_carries_epoch():
    data = scenario_dict(n=3, optimizer={"method": "brute", "cap": 1})
    with pytest.raises(SimulationError) as info:
        run(Scenario.from_dict(data))
    assert info.value.epoch == 0 and "epoch 0" in str(info.value)


def test_pair_draws_depend_only_on_seed_pair_epoch():
    x = pair_draw(42, ("a", "b"), 3)
    assert x == pair_draw(42, ("a", "b"), 3)
    assert 0.0 <= x < 1.0
    assert x != pair_draw(42, ("a", "b"), 4)
    assert x != pair_draw(42, ("b", "a"), 3)
    # adding a robot leaves existing pairs' stochastic steps untouched
    small = run(Scenario.from_dict(scenario_dict(n=3, prior=0.5, lc=(0.5, 0.5), ln=(0.5, 0.5), epochs=12)))
    large = run(Scenario.from_dict(scenario_dict(n=4, prior=0.5, lc=(0.5, 0.5), ln=(0.5, 0.5), epochs=12)))
    for rs, rl in zip(small, large):
        states_l = {p.pair: p.state for p in rl.pairs}
        assert all(states_l[p.pair] == p.state for p in rs.pairs)


# scenario files


def test_scenario_round_trip(example):
    again = Scenario.from_dict(json.loads(json.dumps(example.to_dict())))
    assert again.to_dict() == example.to_dict()


def test_epoch_record_round_trip(example):
    for rec in run(example.with_overrides(epochs=5)):
        assert EpochRecord.from_dict(json.loads(json.dumps(rec.to_dict()))) == rec


def test_scenario_violations_name_pairs():
    data = scenario_dict()
    data["pairs"][0]["likelihood_coop"] = [0.6, 0.3]
    del data["pairs"][-1]
    problems = scenario_violations(data)
    assert any("r0~r1" in p and "0.9" in p for p in problems)
    assert any("r1~r2" in p and "missing" in p for p in problems)
    with pytest.raises(ScenarioError):
        Scenario.from_dict(data)


def test_scenario_violations_misc():
    data = scenario_dict(mode="directed")
    data["epochs"] = 0
    data["policies"]["prior_update"] = "sometimes"
    data["payoffs"].pop()
    data["robots"].append({"id": "r0", "capability": {}})
    problems = scenario_violations(data)
    assert any(p.startswith("epochs") for p in problems)
    assert any("prior_update" in p for p in problems)
    assert any("duplicate" in p for p in problems)
    data["robots"].pop()
    assert any("payoff r2->r1: missing" in p for p in scenario_violations(data))


def test_epoch_override_validation(example):
    with pytest.raises(ScenarioError):
        example.with_overrides(epochs=0)
    assert example.with_overrides(epochs=3, seed=7).epochs == 3
