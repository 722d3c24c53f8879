"""Epoch loop: optimize actions, update beliefs, step the cooperation chain, re-form teams.

Each epoch runs, in order:

1. build the payoff model from the current pair posteriors and optimize the
   action profile;
2. compute every pair's posterior for the action it actually played;
3. build the pair's transition matrix and step its state with a draw from a
   stream keyed by (master seed, pair ids, epoch);
4. re-form teams as connected components of the cooperation graph;
5. accrue each team's benefit as the sum of its members' realized payoffs,
   where a realized payoff uses the stepped state instead of beliefs;
6. under ``posterior-feedback`` the posterior becomes the next epoch's prior.

Identical scenarios give identical trajectories.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import coop
from .errors import EmptyTrajectory, ScenarioError, SimulationError, TeamCoopError
from .org import (
    CooperativeRobot,
    Leaf,
    Relation,
    RelationKind,
    TeamStructure,
    form_team,
    node_from_dict,
    node_to_dict,
    validate,
)
from .payoff import (
    DEFAULT_CAP,
    DIRECTED,
    MODES,
    SYMMETRIC,
    GAParams,
    JointProfile,
    PayoffModel,
    brute_force_optimize,
    ga_optimize,
    partners,
)

FIXED = "fixed"
POSTERIOR_FEEDBACK = "posterior-feedback"
PRIOR_UPDATES = (FIXED, POSTERIOR_FEEDBACK)


def pair_label(pair, mode):
    return f"{pair[0]}{'->' if mode == DIRECTED else '~'}{pair[1]}"


def scenario_pairs(robot_ids, mode):
    """Pairs that carry a model: ordered pairs when directed, robot-order pairs when symmetric."""
    n = len(robot_ids)
    if mode == DIRECTED:
        return [(robot_ids[i], robot_ids[j]) for i in range(n) for j in partners(n, i)]
    return [(robot_ids[i], robot_ids[j]) for i in range(n) for j in range(i + 1, n)]


@dataclass(frozen=True)
class OptimizerPolicy:
    method: str = "brute"
    ga: GAParams = field(default_factory=GAParams)
    cap: int = DEFAULT_CAP

    def to_dict(self):
        out = {"method": self.method, "cap": self.cap}
        if self.method == "ga":
            out["params"] = self.ga.to_dict()
        return out


@dataclass(frozen=True, eq=False)
class Scenario:
    robots: tuple
    alphabet: tuple
    pair_models: dict
    payoffs: dict
    epochs: int
    seed: int
    mode: str = DIRECTED
    prior_update: str = FIXED
    optimizer: OptimizerPolicy = field(default_factory=OptimizerPolicy)
    initial_states: dict = field(default_factory=dict)

    @property
    def robot_ids(self):
        return [r.id for r in self.robots]

    def pairs(self):
        return scenario_pairs(self.robot_ids, self.mode)

    def model_key(self, a, b):
        """Key of the pair model governing ``a``'s relation toward ``b``."""
        if self.mode == DIRECTED:
            return (a, b)
        ids = self.robot_ids
        return (a, b) if ids.index(a) < ids.index(b) else (b, a)

    def with_overrides(self, seed=None, epochs=None):
        changes = {}
        if seed is not None:
            changes["seed"] = seed
        if epochs is not None:
            if epochs < 1:
                raise ScenarioError([f"epochs={epochs} must be >= 1"])
            changes["epochs"] = epochs
        return replace(self, **changes)

    def payoff_model(self, priors):
        """Payoff model whose beliefs are the posteriors under ``priors`` (pair -> prior_coop)."""
        ids = self.robot_ids
        n, m = len(ids), len(self.alphabet)
        u1, u0, b = np.zeros((n, n, m)), np.zeros((n, n, m)), np.zeros((n, n, m))
        for i in range(n):
            for j in partners(n, i):
                key = self.model_key(ids[i], ids[j])
                model = self.pair_models[key].with_prior(priors[key])
                u1[i, j], u0[i, j] = self.payoffs[(ids[i], ids[j])]
                b[i, j] = [belief(model, a) for a in self.alphabet]
        return PayoffModel(n, self.alphabet, u1, u0, b)

    def to_dict(self):
        pairs = []
        for key in self.pairs():
            entry = {"pair": list(key), **self.pair_models[key].to_dict()}
            del entry["alphabet"]
            entry["initial_state"] = self.initial_states.get(key, 0)
            pairs.append(entry)
        payoffs = []
        ids = self.robot_ids
        for i, a in enumerate(ids):
            for j in partners(len(ids), i):
                u1, u0 = self.payoffs[(a, ids[j])]
                payoffs.append({"from": a, "to": ids[j], "u_coop": list(u1), "u_noncoop": list(u0)})
        return {
            "robots": [r.to_dict() for r in self.robots],
            "alphabet": list(self.alphabet),
            "epochs": self.epochs,
            "seed": self.seed,
            "policies": {"mode": self.mode, "prior_update": self.prior_update, "optimizer": self.optimizer.to_dict()},
            "pairs": pairs,
            "payoffs": payoffs,
        }

    @classmethod
    def from_dict(cls, data):
        problems = scenario_violations(data)
        if problems:
            raise ScenarioError(problems)
        robots = tuple(CooperativeRobot.from_dict(r) for r in data["robots"])
        alphabet = tuple(data["alphabet"])
        policies = data.get("policies", {})
        mode = policies.get("mode", DIRECTED)
        opt = policies.get("optimizer", {})
        optimizer = OptimizerPolicy(
            method=opt.get("method", "brute"),
            ga=GAParams.from_dict(opt.get("params", {})),
            cap=int(opt.get("cap", DEFAULT_CAP)),
        )
        ids = [r.id for r in robots]
        models, initial = {}, {}
        for entry in data["pairs"]:
            a, b = entry["pair"]
            key = (a, b) if mode == DIRECTED or ids.index(a) < ids.index(b) else (b, a)
            models[key] = coop.PairModel.from_dict(entry, alphabet)
            initial[key] = int(entry.get("initial_state", 0))
        payoffs = {
            (e["from"], e["to"]): (tuple(map(float, e["u_coop"])), tuple(map(float, e["u_noncoop"])))
            for e in data["payoffs"]
        }
        return cls(
            robots=robots,
            alphabet=alphabet,
            pair_models=models,
            payoffs=payoffs,
            epochs=int(data["epochs"]),
            seed=int(data["seed"]),
            mode=mode,
            prior_update=policies.get("prior_update", FIXED),
            optimizer=optimizer,
            initial_states=initial,
        )


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def scenario_violations(data):
    """Itemized problems with a scenario dict; empty when it can run."""
    if not isinstance(data, dict):
        return ["scenario must be a JSON object"]
    out = []
    ids = []
    for k, raw in enumerate(data.get("robots") or []):
        try:
            robot = CooperativeRobot.from_dict(raw)
        except (TeamCoopError, KeyError, TypeError, ValueError) as exc:
            out.append(f"robots[{k}]: {exc}")
            continue
        if robot.id in ids:
            out.append(f"robot {robot.id!r}: duplicate id")
        ids.append(robot.id)
    if not data.get("robots"):
        out.append("robots: at least one robot is required")

    alphabet = data.get("alphabet")
    if not isinstance(alphabet, list) or not alphabet or len(set(map(str, alphabet))) != len(alphabet):
        out.append("alphabet: must be a nonempty list of distinct symbols")
        alphabet = None

    epochs = data.get("epochs")
    if not (isinstance(epochs, int) and not isinstance(epochs, bool) and epochs >= 1):
        out.append(f"epochs: must be an integer >= 1, got {epochs!r}")
    if not (isinstance(data.get("seed"), int) and not isinstance(data.get("seed"), bool)):
        out.append(f"seed: must be an integer, got {data.get('seed')!r}")

    policies = data.get("policies", {})
    mode = policies.get("mode", DIRECTED)
    if mode not in MODES:
        out.append(f"policies.mode: {mode!r} is not one of {list(MODES)}")
        mode = DIRECTED
    if policies.get("prior_update", FIXED) not in PRIOR_UPDATES:
        out.append(f"policies.prior_update: {policies.get('prior_update')!r} is not one of {list(PRIOR_UPDATES)}")
    opt = policies.get("optimizer", {})
    if opt.get("method", "brute") not in ("brute", "ga"):
        out.append(f"policies.optimizer.method: {opt.get('method')!r} is not 'brute' or 'ga'")
    try:
        GAParams.from_dict(opt.get("params", {}))
    except TeamCoopError as exc:
        out.append(f"policies.optimizer.params: {exc}")

    if alphabet is None or len(ids) != len(set(ids)):
        return out
    m = len(alphabet)

    seen = set()
    for k, entry in enumerate(data.get("pairs") or []):
        pair = entry.get("pair")
        if not (isinstance(pair, list) and len(pair) == 2):
            out.append(f"pairs[{k}]: 'pair' must list two robot ids")
            continue
        a, b = pair
        label = pair_label((a, b), mode)
        unknown = [x for x in (a, b) if x not in ids]
        if unknown or a == b:
            out.append(f"pair {label}: needs two distinct known robots")
            continue
        key = (a, b) if mode == DIRECTED or ids.index(a) < ids.index(b) else (b, a)
        if key in seen:
            out.append(f"pair {label}: more than one model")
        seen.add(key)
        prior = entry.get("prior_coop")
        if not (_is_number(prior) and 0.0 <= prior <= 1.0):
            out.append(f"pair {label}: prior_coop must lie in [0, 1], got {prior!r}")
        for name in ("likelihood_coop", "likelihood_noncoop"):
            table = entry.get(name)
            if not (isinstance(table, list) and len(table) == m and all(_is_number(v) for v in table)):
                out.append(f"pair {label}: {name} must be {m} numbers aligned with the alphabet")
                continue
            if any(v < 0 for v in table):
                out.append(f"pair {label}: {name} has negative entries")
            total = math.fsum(table)
            if abs(total - 1.0) > coop.TOL:
                out.append(f"pair {label}: {name} sums to {total:.12g}, expected 1")
        if entry.get("initial_state", 0) not in (0, 1):
            out.append(f"pair {label}: initial_state must be 0 or 1")
    for key in scenario_pairs(ids, mode):
        if key not in seen:
            out.append(f"pair {pair_label(key, mode)}: missing pair model")

    given = set()
    for k, entry in enumerate(data.get("payoffs") or []):
        a, b = entry.get("from"), entry.get("to")
        label = pair_label((a, b), DIRECTED)
        if a not in ids or b not in ids or a == b:
            out.append(f"payoff {label}: needs two distinct known robots")
            continue
        if (a, b) in given:
            out.append(f"payoff {label}: listed twice")
        given.add((a, b))
        for name in ("u_coop", "u_noncoop"):
            table = entry.get(name)
            if not (isinstance(table, list) and len(table) == m and all(_is_number(v) for v in table)):
                out.append(f"payoff {label}: {name} must be {m} numbers aligned with the alphabet")
    for key in scenario_pairs(ids, DIRECTED):
        if key not in given:
            out.append(f"payoff {pair_label(key, DIRECTED)}: missing payoff table")
    return out


def belief(model, action):
    """P(c1 | action); an action impossible under both hypotheses leaves the prior untouched."""
    if coop.evidence(model, action) <= 0.0:
        return model.prior_coop
    return coop.posterior_coop(model, action)


# --------------------------------------------------------------------------
# cooperation graph and teams


@dataclass(frozen=True)
class CoopGraph:
    """Per-pair cooperation states over a fixed pair set."""

    robot_ids: tuple
    states: tuple  # ((a, b), state) in scenario pair order
    mode: str = SYMMETRIC

    def state(self, a, b):
        lookup = dict(self.states)
        if (a, b) in lookup:
            return lookup[(a, b)]
        if self.mode == SYMMETRIC:
            return lookup[(b, a)]
        raise KeyError((a, b))

    def edges(self):
        """Undirected cooperating edges; directed pairs need both directions in state 1."""
        if self.mode == SYMMETRIC:
            return [pair for pair, s in self.states if s == 1]
        lookup = dict(self.states)
        ids = self.robot_ids
        return [
            (ids[i], ids[j])
            for i in range(len(ids))
            for j in range(i + 1, len(ids))
            if lookup.get((ids[i], ids[j])) == 1 and lookup.get((ids[j], ids[i])) == 1
        ]

    def density(self):
        if not self.states:
            return 0.0
        return sum(s for _, s in self.states) / len(self.states)


def _components(robot_ids, edges):
    adjacency = {r: [] for r in robot_ids}
    for a, b in edges:
        adjacency[a].append(b)
        adjacency[b].append(a)
    seen = set()
    groups = []
    for start in robot_ids:
        if start in seen:
            continue
        seen.add(start)
        stack, group = [start], []
        while stack:
            node = stack.pop()
            group.append(node)
            for other in adjacency[node]:
                if other not in seen:
                    seen.add(other)
                    stack.append(other)
        order = {r: k for k, r in enumerate(robot_ids)}
        groups.append(sorted(group, key=order.__getitem__))
    return groups


def reform_teams(graph, robots):
    """Teams are the connected components of the cooperating edges.

    Singletons become :class:`Leaf` roots; larger components become teams
    with an elected leader.  Each tree holds one goal, ``task-<k>``.
    """
    by_id = {r.id: r for r in robots}
    ids = [r.id for r in robots]
    edges = graph.edges()
    forest = []
    for k, group in enumerate(_components(ids, edges)):
        goal = frozenset({f"task-{k}"})
        if len(group) == 1:
            robot = by_id[group[0]]
            forest.append(Leaf(robot.id, robot.capability, goals=goal, level=0))
            continue
        members = set(group)
        inside = frozenset(
            Relation(RelationKind.HORIZONTAL, a, b) for a, b in edges if a in members and b in members
        )
        forest.append(
            form_team([by_id[r] for r in group], goal, level=0, position=k, id_ros=f"team-{k}", constraints=inside)
        )
    return forest


def validate_forest(forest, robots):
    """org-model violations for every tree of a team forest."""
    problems = []
    for tree in forest:
        ids = set(_leaf_ids(tree))
        registry = tuple(r for r in robots if r.id in ids)
        problems.extend(validate(TeamStructure(registry, frozenset(tree.constraints), tree)))
    return problems


def _leaf_ids(node):
    if isinstance(node, Leaf):
        return [node.robot_id]
    return [r for child in node.children for r in _leaf_ids(child)]


def _with_benefits(node, realized):
    if isinstance(node, Leaf):
        return replace(node, benefit=realized[node.robot_id])
    children = tuple(_with_benefits(c, realized) for c in node.children)
    total = 0.0
    for c in children:
        total += c.benefit
    return replace(node, children=children, benefit=total)


# --------------------------------------------------------------------------
# records


@dataclass(frozen=True)
class PairRecord:
    pair: tuple
    action: str  # action played by pair[0] toward pair[1]
    prior_coop: float
    posterior_coop: float
    matrix: coop.TransitionMatrix
    state: int

    def to_dict(self):
        return {
            "pair": list(self.pair),
            "action": self.action,
            "prior_coop": self.prior_coop,
            "posterior_coop": self.posterior_coop,
            "matrix": self.matrix.to_dict(),
            "state": self.state,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            tuple(data["pair"]),
            data["action"],
            data["prior_coop"],
            data["posterior_coop"],
            coop.TransitionMatrix.from_dict(data["matrix"]),
            data["state"],
        )


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    mode: str
    profile: JointProfile
    member_payoffs: tuple
    team_payoff: float
    pairs: tuple
    forest: tuple
    realized_payoffs: tuple
    team_eu: tuple

    def graph(self, robot_ids):
        return CoopGraph(tuple(robot_ids), tuple((p.pair, p.state) for p in self.pairs), self.mode)

    def to_dict(self):
        return {
            "epoch": self.epoch,
            "mode": self.mode,
            "profile": self.profile.to_lists(),
            "member_payoffs": list(self.member_payoffs),
            "team_payoff": self.team_payoff,
            "pairs": [p.to_dict() for p in self.pairs],
            "forest": [node_to_dict(t) for t in self.forest],
            "realized_payoffs": list(self.realized_payoffs),
            "team_eu": list(self.team_eu),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            epoch=data["epoch"],
            mode=data["mode"],
            profile=JointProfile.from_lists(data["profile"], data["mode"]),
            member_payoffs=tuple(data["member_payoffs"]),
            team_payoff=data["team_payoff"],
            pairs=tuple(PairRecord.from_dict(p) for p in data["pairs"]),
            forest=tuple(node_from_dict(t) for t in data["forest"]),
            realized_payoffs=tuple(data["realized_payoffs"]),
            team_eu=tuple(data["team_eu"]),
        )


# --------------------------------------------------------------------------
# randomness


def _digest(*parts, size=8):
    text = "\x1f".join(str(p) for p in parts)
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=size).digest(), "big")


def pair_draw(seed, pair, epoch):
    """Uniform draw for ``pair`` at ``epoch``: Philox keyed by (seed, pair), counter = epoch."""
    bitgen = np.random.Philox(key=_digest(seed, *pair, size=16), counter=epoch)
    return float(np.random.Generator(bitgen).random())


def optimizer_seed(seed, epoch):
    return _digest(seed, "ga", epoch)


# --------------------------------------------------------------------------
# loop


def _optimize(scenario, model, epoch):
    policy = scenario.optimizer
    if policy.method == "ga":
        return ga_optimize(model, scenario.mode, policy.ga, optimizer_seed(scenario.seed, epoch))
    return brute_force_optimize(model, scenario.mode, policy.cap)


def run(scenario):
    """Simulate every epoch of ``scenario`` and return the list of records."""
    ids = scenario.robot_ids
    n = len(ids)
    index = {r: k for k, r in enumerate(ids)}
    pairs = scenario.pairs()
    priors = {key: scenario.pair_models[key].prior_coop for key in pairs}
    states = {key: scenario.initial_states.get(key, 0) for key in pairs}
    records = []

    for epoch in range(scenario.epochs):
        try:
            model = scenario.payoff_model(priors)
            result = _optimize(scenario, model, epoch)
        except TeamCoopError as exc:
            raise SimulationError(f"epoch {epoch}: optimization failed: {exc}", epoch=epoch) from exc
        profile = result.profile

        pair_records = []
        for key in pairs:
            a, b = key
            action = profile.action(index[a], index[b])
            try:
                current = scenario.pair_models[key].with_prior(priors[key])
                posterior = belief(current, action)
                matrix = coop.pair_transition(current)
            except TeamCoopError as exc:
                label = pair_label(key, scenario.mode)
                raise SimulationError(f"epoch {epoch}, pair {label}: {exc}", epoch=epoch, pair=key) from exc
            states[key] = coop.step_pair(states[key], matrix, pair_draw(scenario.seed, key, epoch))
            pair_records.append(PairRecord(key, action, priors[key], posterior, matrix, states[key]))

        graph = CoopGraph(tuple(ids), tuple((key, states[key]) for key in pairs), scenario.mode)
        realized = {}
        for i, a in enumerate(ids):
            total = 0.0
            for j in partners(n, i):
                b = ids[j]
                k = scenario.alphabet.index(profile.action(i, j))
                u1, u0 = scenario.payoffs[(a, b)]
                total += u1[k] if states[scenario.model_key(a, b)] == 1 else u0[k]
            realized[a] = total
        forest = tuple(_with_benefits(t, realized) for t in reform_teams(graph, scenario.robots))

        records.append(
            EpochRecord(
                epoch=epoch,
                mode=scenario.mode,
                profile=profile,
                member_payoffs=result.member_payoffs,
                team_payoff=result.team_payoff,
                pairs=tuple(pair_records),
                forest=forest,
                realized_payoffs=tuple(realized[r] for r in ids),
                team_eu=tuple(t.benefit for t in forest),
            )
        )
        if scenario.prior_update == POSTERIOR_FEEDBACK:
            for rec in pair_records:
                priors[rec.pair] = rec.posterior_coop
    return records


# --------------------------------------------------------------------------
# metrics

METRICS_HEADER = (
    "epoch",
    "cooperation_density",
    "team_count",
    "mean_team_size",
    "team_payoff",
    "epoch_eu",
    "cumulative_eu",
)


def _team_size(node):
    return len(_leaf_ids(node))


def metrics(trajectory):
    """Per-epoch rows (keys of :data:`METRICS_HEADER`) and an aggregate summary."""
    trajectory = list(trajectory)
    if not trajectory:
        raise EmptyTrajectory("no epochs to summarize")
    rows = []
    cumulative = 0.0
    for rec in trajectory:
        density = sum(p.state for p in rec.pairs) / len(rec.pairs) if rec.pairs else 0.0
        sizes = [_team_size(t) for t in rec.forest]
        epoch_eu = 0.0
        for eu in rec.team_eu:
            epoch_eu += eu
        cumulative += epoch_eu
        rows.append({
            "epoch": rec.epoch,
            "cooperation_density": density,
            "team_count": len(sizes),
            "mean_team_size": sum(sizes) / len(sizes),
            "team_payoff": rec.team_payoff,
            "epoch_eu": epoch_eu,
            "cumulative_eu": cumulative,
        })
    k = len(rows)
    aggregate = {
        "epochs": k,
        "mean_cooperation_density": math.fsum(r["cooperation_density"] for r in rows) / k,
        "mean_team_count": math.fsum(r["team_count"] for r in rows) / k,
        "mean_team_size": math.fsum(r["mean_team_size"] for r in rows) / k,
        "total_team_payoff": math.fsum(r["team_payoff"] for r in rows),
        "cumulative_eu": cumulative,
    }
    return {"per_epoch": rows, "aggregate": aggregate}
