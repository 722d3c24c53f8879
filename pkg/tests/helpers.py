"""Random instance generators and independent oracles shared by the tests."""

import itertools
from fractions import Fraction

import numpy as np

from teamcoop.coop import PairModel, TransitionMatrix
from teamcoop.org import DISSOLVED, CapabilityProfile, create_robot, decompose_goal, form_team, join, leave, members
from teamcoop.payoff import PayoffModel


def random_distribution(rng, m):
    raw = rng.random(m) + 1e-3
    p = raw / raw.sum()
    # push the rounding residue onto the last entry so the sum is 1 to ~1 ulp
    p[-1] = 1.0 - p[:-1].sum()
    return p


def random_pair_model(rng, m=None):
    m = m or int(rng.integers(1, 7))
    alphabet = tuple(f"a{k}" for k in range(m))
    prior = float(rng.random())
    return PairModel(alphabet, prior, random_distribution(rng, m), random_distribution(rng, m))


def random_matrix(rng):
    return TransitionMatrix.from_stay(float(rng.random()), float(rng.random()))


def random_payoff_model(rng, n, m):
    alphabet = tuple("abcdefgh"[:m])
    shape = (n, n, m)
    return PayoffModel(n, alphabet, rng.normal(0, 5, shape), rng.normal(0, 5, shape), rng.random(shape))


def random_robot(rng, rid):
    scores = {k: float(rng.choice([0.1, 0.3, 0.5, 0.7, 0.9])) for k in (
        "moving", "acting", "sensing", "communicating", "organizing", "learning")}
    return create_robot(rid, CapabilityProfile(**scores))


# --------------------------------------------------------------------------
# exact Bayes with rationals


def exact_tables(model):
    to_f = lambda x: Fraction(x)
    prior = to_f(model.prior_coop)
    return prior, [to_f(x) for x in model.likelihood_coop], [to_f(x) for x in model.likelihood_noncoop]


def exact_evidence(model, k):
    prior, l1, l0 = exact_tables(model)
    return l1[k] * prior + l0[k] * (1 - prior)


def exact_transition(model):
    prior, l1, l0 = exact_tables(model)
    p11 = Fraction(0)
    p01 = Fraction(0)
    for k in range(len(l1)):
        ev = l1[k] * prior + l0[k] * (1 - prior)
        if ev == 0:
            continue
        p11 += l1[k] * (l1[k] * prior / ev)
        p01 += l0[k] * (l0[k] * (1 - prior) / ev)
    return p11, p01


# --------------------------------------------------------------------------
# optimizer oracles


def coordinatewise_argmax(model):
    """Directed optimum built one (i, j) coordinate at a time, first max wins."""
    out = []
    for i in range(model.n):
        for j in range(model.n):
            if i == j:
                continue
            values = [
                model.beliefs[i, j, a] * model.u_coop[i, j, a]
                + (1 - model.beliefs[i, j, a]) * model.u_noncoop[i, j, a]
                for a in range(model.m)
            ]
            out.append(int(np.argmax(values)))
    return tuple(out)


def joint_enumeration(model, mode):
    """Best free-coordinate tuple over the whole joint space via numpy sums."""
    n, m = model.n, model.m
    expected = model.beliefs * model.u_coop + (1 - model.beliefs) * model.u_noncoop
    if mode == "directed":
        coords = [(i, j) for i in range(n) for j in range(n) if i != j]
    else:
        coords = [(i, j) for i in range(n) for j in range(i + 1, n)]
    best, best_combo = -np.inf, None
    for combo in itertools.product(range(m), repeat=len(coords)):
        total = 0.0
        for (i, j), a in zip(coords, combo):
            total += expected[i, j, a]
            if mode == "symmetric":
                total += expected[j, i, a]
        if total > best + 1e-12:
            best, best_combo = total, combo
    return best_combo, best


# --------------------------------------------------------------------------
# org-model walks


def random_org_walk(rng, steps):
    """Random form/join/leave/decompose sequence; yields (team, member robots) after each live step."""
    pool = [create_robot(f"r{k}", CapabilityProfile(organizing=float(rng.choice([0.1, 0.5, 0.9])), communicating=float(rng.choice([0.1, 0.5, 0.9])))) for k in range(8)]
    by_id = {r.id: r for r in pool}
    k = int(rng.integers(1, 4))
    team = form_team(pool[:k], {f"g{j}" for j in range(int(rng.integers(1, 5)))})
    for _ in range(steps):
        current = members(team) if team is not DISSOLVED else []
        op = rng.integers(0, 4)
        if team is DISSOLVED or op == 0:
            chosen = rng.choice(len(pool), size=int(rng.integers(1, 4)), replace=False)
            team = form_team([pool[c] for c in chosen], {f"g{j}" for j in range(int(rng.integers(1, 5)))})
        elif op == 1:
            outside = [r for r in pool if r.id not in current]
            if outside:
                team = join(team, outside[int(rng.integers(len(outside)))])
        elif op == 2:
            team = leave(team, current[int(rng.integers(len(current)))])
        else:
            goals = sorted(team.goals)
            slots = rng.integers(0, len(team.children), size=len(goals))
            team = decompose_goal(team, {c: {g for g, s in zip(goals, slots) if s == c} for c in range(len(team.children))})
        if team is not DISSOLVED:
            yield team, [by_id[r] for r in members(team)]


# --------------------------------------------------------------------------
# graph oracle


class UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra

    def groups(self):
        out = {}
        for x in self.parent:
            out.setdefault(self.find(x), set()).add(x)
        return sorted((frozenset(g) for g in out.values()), key=sorted)


# --------------------------------------------------------------------------
# scenarios


def scenario_dict(n=3, mode="symmetric", alphabet=("a", "b"), prior=0.5, lc=(0.7, 0.3), ln=(0.2, 0.8),
                  u_coop=(4.0, 1.0), u_noncoop=(-2.0, 0.5), epochs=10, seed=1, initial_state=0,
                  prior_update="fixed", optimizer=None):
    ids = [f"r{k}" for k in range(n)]
    robots = [
        {"id": r, "capability": {"organizing": round(0.1 + 0.8 * k / max(n - 1, 1), 3), "communicating": 0.5}}
        for k, r in enumerate(ids)
    ]
    if mode == "directed":
        keys = [(a, b) for a in ids for b in ids if a != b]
    else:
        keys = [(ids[i], ids[j]) for i in range(n) for j in range(i + 1, n)]
    pairs = [
        {"pair": list(k), "prior_coop": prior, "likelihood_coop": list(lc), "likelihood_noncoop": list(ln),
         "initial_state": initial_state}
        for k in keys
    ]
    payoffs = [
        {"from": a, "to": b, "u_coop": list(u_coop), "u_noncoop": list(u_noncoop)}
        for a in ids for b in ids if a != b
    ]
    return {
        "robots": robots,
        "alphabet": list(alphabet),
        "epochs": epochs,
        "seed": seed,
        "policies": {"mode": mode, "prior_update": prior_update, "optimizer": optimizer or {"method": "brute"}},
        "pairs": pairs,
        "payoffs": payoffs,
    }
