"""Belief-weighted payoff of action vectors and its maximization.

Member ``i`` picks one action toward every partner ``j``.  Its payoff is

    C_i = sum_j P(c1|a_ij) u_ij(c1, a_ij) + sum_j P(c0|a_ij) u_ij(c0, a_ij)

and the team payoff is the left-to-right float sum of the member payoffs
over ``i = 0..n-1``.  Every reported payoff goes through
:func:`member_payoff`, so results recompute bit for bit.

Two profile modes exist.  In ``"directed"`` mode ``a_ij`` and ``a_ji`` are
separate choices; in ``"symmetric"`` mode they are one shared choice.

Genomes concatenate ``ceil(log2 m)`` bits per free coordinate, most
significant bit first.  Free coordinates are ``(i, j)`` for every member
``i`` and partner ``j`` in ascending order (directed), or the pairs
``i < j`` in ascending order (symmetric).  Decoded values wrap modulo ``m``
so every bit string is a feasible profile.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidMember, InvalidModel, InvalidParams, InvalidProfile, TooLarge

DIRECTED = "directed"
SYMMETRIC = "symmetric"
MODES = (DIRECTED, SYMMETRIC)

DEFAULT_CAP = 10**6


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def partners(n, i):
    return [j for j in range(n) if j != i]


@dataclass(frozen=True, eq=False)
class PayoffModel:
    """Payoff and belief tables, each indexed ``[i, j, action]``.

    ``beliefs[i, j, a]`` is P(c1 | a_ij = a); the non-cooperative
    probability is its complement.  Diagonal entries are ignored.
    """

    n: int
    alphabet: tuple
    u_coop: np.ndarray
    u_noncoop: np.ndarray
    beliefs: np.ndarray

    def __post_init__(self):
        alphabet = tuple(self.alphabet)
        if not alphabet or len(set(alphabet)) != len(alphabet):
            raise InvalidModel(f"alphabet must be nonempty and distinct: {list(alphabet)}")
        if self.n < 1:
            raise InvalidModel("team size must be at least 1")
        shape = (self.n, self.n, len(alphabet))
        arrays = {}
        for name in ("u_coop", "u_noncoop", "beliefs"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise InvalidModel(f"{name} has shape {arr.shape}, expected {shape}")
            off = ~np.eye(self.n, dtype=bool)
            if not np.all(np.isfinite(arr[off])):
                raise InvalidModel(f"{name} has non-finite entries")
            arr[~off] = 0.0
            arr.setflags(write=False)
            arrays[name] = arr
        b = arrays["beliefs"]
        if np.any(b < 0.0) or np.any(b > 1.0):
            raise InvalidModel("beliefs must lie in [0, 1]")
        object.__setattr__(self, "alphabet", alphabet)
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)
        # python-float copies for the exact scalar path
        object.__setattr__(self, "_u1", arrays["u_coop"].tolist())
        object.__setattr__(self, "_u0", arrays["u_noncoop"].tolist())
        object.__setattr__(self, "_b", b.tolist())

    @property
    def m(self):
        return len(self.alphabet)

    def scaled(self, k):
        """Same model with every payoff multiplied by ``k``."""
        return PayoffModel(self.n, self.alphabet, self.u_coop * k, self.u_noncoop * k, self.beliefs)

    def index(self, action):
        try:
            return self.alphabet.index(action)
        except ValueError:
            raise InvalidProfile(f"action {action!r} not in alphabet {list(self.alphabet)}") from None

    def to_dict(self, mode=DIRECTED):
        pairs = []
        for i in range(self.n):
            for j in partners(self.n, i):
                pairs.append({
                    "i": i,
                    "j": j,
                    "belief": self.beliefs[i, j].tolist(),
                    "u_coop": self.u_coop[i, j].tolist(),
                    "u_noncoop": self.u_noncoop[i, j].tolist(),
                })
        return {"n": self.n, "alphabet": list(self.alphabet), "mode": mode, "pairs": pairs}

    @classmethod
    def from_dict(cls, data):
        n, alphabet = int(data["n"]), tuple(data["alphabet"])
        shape = (n, n, len(alphabet))
        u1, u0, b = np.zeros(shape), np.zeros(shape), np.zeros(shape)
        for entry in data["pairs"]:
            i, j = entry["i"], entry["j"]
            b[i, j] = entry["belief"]
            u1[i, j] = entry["u_coop"]
            u0[i, j] = entry["u_noncoop"]
        return cls(n, alphabet, u1, u0, b)


def problem_violations(data):
    """Itemized problems with a problem-file dict; empty when it is usable."""
    out = []
    try:
        n = int(data["n"])
        alphabet = list(data["alphabet"])
        pairs = data["pairs"]
    except (KeyError, TypeError, ValueError) as exc:
        return [f"problem is missing or has a malformed field: {exc}"]
    mode = data.get("mode", DIRECTED)
    if mode not in MODES:
        out.append(f"mode {mode!r} is not one of {list(MODES)}")
    if n < 1:
        out.append(f"n={n} must be >= 1")
    if not alphabet or len(set(alphabet)) != len(alphabet):
        out.append(f"alphabet must be nonempty with distinct symbols: {alphabet}")
    m = len(alphabet)
    seen = set()
    for k, entry in enumerate(pairs):
        try:
            i, j = int(entry["i"]), int(entry["j"])
        except (KeyError, TypeError, ValueError):
            out.append(f"pairs[{k}]: needs integer 'i' and 'j'")
            continue
        tag = f"pair ({i}, {j})"
        if not (0 <= i < n and 0 <= j < n) or i == j:
            out.append(f"{tag}: indices must be distinct members in 0..{n - 1}")
            continue
        if (i, j) in seen:
            out.append(f"{tag}: listed twice")
        seen.add((i, j))
        for name in ("belief", "u_coop", "u_noncoop"):
            values = entry.get(name)
            if not isinstance(values, list) or len(values) != m:
                out.append(f"{tag}: {name} must be a list of {m} numbers")
                continue
            if not all(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in values):
                out.append(f"{tag}: {name} has non-numeric entries")
            elif name == "belief" and any(v < 0 or v > 1 for v in values):
                out.append(f"{tag}: belief entries must lie in [0, 1]")
    for i in range(max(n, 0)):
        for j in partners(n, i):
            if (i, j) not in seen:
                out.append(f"pair ({i}, {j}): missing")
    return out


@dataclass(frozen=True)
class ActionVector:
    owner: int
    actions: tuple

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))


@dataclass(frozen=True)
class JointProfile:
    """One action vector per member, in member order."""

    vectors: tuple
    mode: str = DIRECTED

    def __post_init__(self):
        _check_mode(self.mode)
        vectors = tuple(self.vectors)
        n = len(vectors)
        for i, vec in enumerate(vectors):
            if vec.owner != i:
                raise InvalidProfile(f"vector {i} is owned by member {vec.owner}")
            if len(vec.actions) != n - 1:
                raise InvalidProfile(f"member {i} has {len(vec.actions)} actions, expected {n - 1}")
        if self.mode == SYMMETRIC:
            for i in range(n):
                for j in range(i + 1, n):
                    if action_toward(vectors, i, j) != action_toward(vectors, j, i):
                        raise InvalidProfile(f"symmetric profile has a_{i}{j} != a_{j}{i}")
        object.__setattr__(self, "vectors", vectors)

    @property
    def n(self):
        return len(self.vectors)

    def action(self, i, j):
        return action_toward(self.vectors, i, j)

    def to_lists(self):
        return [list(v.actions) for v in self.vectors]

    @classmethod
    def from_lists(cls, lists, mode=DIRECTED):
        return cls(tuple(ActionVector(i, acts) for i, acts in enumerate(lists)), mode)


def action_toward(vectors, i, j):
    """Member ``i``'s action toward partner ``j``."""
    return vectors[i].actions[j if j < i else j - 1]


def _check_vector(model, i, vector):
    if not (isinstance(i, int) and 0 <= i < model.n):
        raise InvalidMember(f"member index {i!r} outside 0..{model.n - 1}")
    actions = vector.actions if isinstance(vector, ActionVector) else tuple(vector)
    if len(actions) != model.n - 1:
        raise InvalidProfile(f"member {i} needs {model.n - 1} actions, got {len(actions)}")
    return [model.index(a) for a in actions]


def _member_value(model, i, indices):
    b, u1, u0 = model._b[i], model._u1[i], model._u0[i]
    coop = 0.0
    non = 0.0
    for j, a in zip(partners(model.n, i), indices):
        p = b[j][a]
        coop += p * u1[j][a]
        non += (1.0 - p) * u0[j][a]
    return coop + non


def member_payoff(model, i, vector):
    """Belief-weighted payoff of member ``i`` playing ``vector``."""
    return _member_value(model, i, _check_vector(model, i, vector))


def _sum_members(values):
    total = 0.0
    for v in values:
        total += v
    return total


def team_payoff(model, profile):
    """Sum of member payoffs, accumulated left to right over members."""
    if profile.n != model.n:
        raise InvalidProfile(f"profile has {profile.n} members, model has {model.n}")
    return _sum_members(member_payoff(model, i, v) for i, v in enumerate(profile.vectors))


# --------------------------------------------------------------------------
# search space and encoding


def free_coordinates(n, mode):
    _check_mode(mode)
    if mode == DIRECTED:
        return [(i, j) for i in range(n) for j in partners(n, i)]
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def bits_per_action(m):
    return math.ceil(math.log2(m)) if m > 1 else 0


def encode(indices, m):
    b = bits_per_action(m)
    return "".join(format(k, f"0{b}b") for k in indices) if b else ""


def decode(genome, m, ncoords):
    b = bits_per_action(m)
    if len(genome) != b * ncoords:
        raise ValueError(f"genome of length {len(genome)} does not hold {ncoords} coordinates of {b} bits")
    if not b:
        return [0] * ncoords
    return [int(genome[k * b : (k + 1) * b], 2) % m for k in range(ncoords)]


def profile_from_indices(model, indices, mode):
    """Expand free-coordinate action indices into a :class:`JointProfile`."""
    n = model.n
    grid = [[None] * n for _ in range(n)]
    for (i, j), k in zip(free_coordinates(n, mode), indices):
        grid[i][j] = k
        if mode == SYMMETRIC:
            grid[j][i] = k
    lists = [[model.alphabet[grid[i][j]] for j in partners(n, i)] for i in range(n)]
    return JointProfile.from_lists(lists, mode)


def profile_indices(model, profile):
    """Free-coordinate action indices of ``profile`` (inverse of the above)."""
    return [model.index(profile.action(i, j)) for i, j in free_coordinates(model.n, profile.mode)]


def search_space(model, mode):
    """Size of the space brute force walks: per member when directed, joint when symmetric."""
    if mode == DIRECTED:
        return model.m ** (model.n - 1)
    return model.m ** len(free_coordinates(model.n, mode))


@dataclass(frozen=True)
class OptimizationResult:
    profile: JointProfile
    member_payoffs: tuple
    team_payoff: float
    method: str
    evaluations: int
    seed: object = None
    genome: str = ""

    def to_dict(self):
        return {
            "method": self.method,
            "mode": self.profile.mode,
            "seed": self.seed,
            "evaluations": self.evaluations,
            "genome": self.genome,
            "profile": self.profile.to_lists(),
            "member_payoffs": list(self.member_payoffs),
            "team_payoff": self.team_payoff,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            profile=JointProfile.from_lists(data["profile"], data["mode"]),
            member_payoffs=tuple(data["member_payoffs"]),
            team_payoff=data["team_payoff"],
            method=data["method"],
            evaluations=data["evaluations"],
            seed=data.get("seed"),
            genome=data.get("genome", ""),
        )


def _result(model, indices, mode, method, evaluations, seed):
    profile = profile_from_indices(model, indices, mode)
    per_member = tuple(member_payoff(model, i, v) for i, v in enumerate(profile.vectors))
    return OptimizationResult(
        profile=profile,
        member_payoffs=per_member,
        team_payoff=_sum_members(per_member),
        method=method,
        evaluations=evaluations,
        seed=seed,
        genome=encode(indices, model.m),
    )


# --------------------------------------------------------------------------
# exhaustive search


def _check_cap(model, mode, cap):
    size = search_space(model, mode)
    if size > cap:
        raise TooLarge(f"{mode} search space of {size} profiles exceeds cap {cap}")
    return size


def _member_table(model, i):
    """Every candidate vector of member ``i`` with its payoff, lexicographic order."""
    return [(combo, _member_value(model, i, combo)) for combo in itertools.product(range(model.m), repeat=model.n - 1)]


def brute_force_optimize(model, mode=DIRECTED, cap=DEFAULT_CAP, seed=None):
    """Exhaustive optimum of the team payoff.

    Directed payoffs separate by member, so each member's ``m^(n-1)``
    vectors are enumerated on their own.  Symmetric mode enumerates the
    joint space.  Ties go to the lexicographically smallest genome.
    """
    _check_mode(mode)
    _check_cap(model, mode, cap)
    ncoords = len(free_coordinates(model.n, mode))
    if model.m == 1 or ncoords == 0:
        return _result(model, [0] * ncoords, mode, "brute", 1, seed)

    if mode == DIRECTED:
        indices = []
        evaluations = 0
        for i in range(model.n):
            table = _member_table(model, i)
            evaluations += len(table)
            best_combo, best = table[0]
            for combo, value in table[1:]:
                if value > best:
                    best_combo, best = combo, value
            indices.extend(best_combo)
        return _result(model, indices, mode, "brute", evaluations, seed)

    best_idx, best = None, -math.inf
    evaluations = 0
    for combo in itertools.product(range(model.m), repeat=ncoords):
        value = _symmetric_value(model, combo)
        evaluations += 1
        if value > best:
            best_idx, best = combo, value
    return _result(model, list(best_idx), mode, "brute", evaluations, seed)


def _symmetric_grid(model, combo):
    n = model.n
    grid = [[0] * n for _ in range(n)]
    for (i, j), k in zip(free_coordinates(n, SYMMETRIC), combo):
        grid[i][j] = grid[j][i] = k
    return grid


def _symmetric_value(model, combo):
    grid = _symmetric_grid(model, combo)
    return _sum_members(
        _member_value(model, i, [grid[i][j] for j in partners(model.n, i)]) for i in range(model.n)
    )


def optimal_profiles(model, mode=DIRECTED, cap=DEFAULT_CAP):
    """Every optimal genome (as free-coordinate index tuples), sorted."""
    _check_mode(mode)
    _check_cap(model, mode, cap)
    ncoords = len(free_coordinates(model.n, mode))
    if mode == DIRECTED:
        per_member = []
        for i in range(model.n):
            table = _member_table(model, i)
            best = max(v for _, v in table)
            per_member.append([combo for combo, v in table if v == best])
        return sorted(tuple(itertools.chain.from_iterable(parts)) for parts in itertools.product(*per_member))
    scored = [(combo, _symmetric_value(model, combo)) for combo in itertools.product(range(model.m), repeat=ncoords)]
    best = max(v for _, v in scored)
    return sorted(combo for combo, v in scored if v == best)


# --------------------------------------------------------------------------
# genetic algorithm


@dataclass(frozen=True)
class GAParams:
    population: int = 32
    generations: int = 200
    tournament: int = 2
    crossover_rate: float = 0.9
    mutation_rate: float = None  # None -> 1 / genome length
    elitism: int = 1

    def __post_init__(self):
        if not (isinstance(self.population, int) and self.population >= 2):
            raise InvalidParams(f"population must be an integer >= 2, got {self.population!r}")
        if not (isinstance(self.generations, int) and self.generations >= 0):
            raise InvalidParams(f"generations must be a nonnegative integer, got {self.generations!r}")
        if not (isinstance(self.tournament, int) and self.tournament >= 1):
            raise InvalidParams(f"tournament size must be >= 1, got {self.tournament!r}")
        if not (0 <= self.elitism < self.population):
            raise InvalidParams(f"elitism must be in [0, population), got {self.elitism!r}")
        for name in ("crossover_rate", "mutation_rate"):
            rate = getattr(self, name)
            if rate is not None and not (0.0 <= rate <= 1.0):
                raise InvalidParams(f"{name} must lie in [0, 1], got {rate!r}")

    def to_dict(self):
        return {
            "population": self.population,
            "generations": self.generations,
            "tournament": self.tournament,
            "crossover_rate": self.crossover_rate,
            "mutation_rate": self.mutation_rate,
            "elitism": self.elitism,
        }

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(**data)
        except TypeError as exc:
            raise InvalidParams(str(exc)) from None


def _coordinate_table(model, mode):
    """Expected payoff of each action on each free coordinate, shape (ncoords, m)."""
    expected = model.beliefs * model.u_coop + (1.0 - model.beliefs) * model.u_noncoop
    coords = free_coordinates(model.n, mode)
    rows = [expected[i, j] + (expected[j, i] if mode == SYMMETRIC else 0.0) for i, j in coords]
    return np.array(rows).reshape(len(coords), model.m)


def ga_optimize(model, mode=DIRECTED, params=None, seed=0):
    """Generational GA over bit-string genomes; fitness is team payoff.

    Tournament selection, one-point crossover, per-bit mutation and
    elitism.  The population's fitness is computed in one vectorized pass;
    the returned payoffs are recomputed exactly for the best genome ever
    seen.  Deterministic for a fixed ``seed``.
    """
    _check_mode(mode)
    params = params or GAParams()
    if not isinstance(params, GAParams):
        raise InvalidParams("params must be a GAParams")
    ncoords = len(free_coordinates(model.n, mode))
    nbits = bits_per_action(model.m)
    length = ncoords * nbits
    if length == 0:
        return _result(model, [0] * ncoords, mode, "ga", 1, seed)

    table = _coordinate_table(model, mode)
    weights = 1 << np.arange(nbits - 1, -1, -1)
    rows = np.arange(ncoords)

    def fitness(pop):
        idx = (pop.reshape(len(pop), ncoords, nbits) @ weights) % model.m
        return table[rows, idx].sum(axis=1)

    rng = np.random.default_rng(seed)
    size = params.population
    mutation = params.mutation_rate if params.mutation_rate is not None else 1.0 / length
    nchild = size - params.elitism
    npairs = (nchild + 1) // 2

    pop = rng.integers(0, 2, size=(size, length), dtype=np.int64)
    fit = fitness(pop)
    evaluations = size
    k = int(np.argmax(fit))
    best_bits, best_fit = pop[k].copy(), fit[k]

    for _ in range(params.generations):
        elites = pop[np.argsort(-fit, kind="stable")[: params.elitism]]

        contestants = rng.integers(0, size, size=(2 * npairs, params.tournament))
        winners = contestants[np.arange(2 * npairs), np.argmax(fit[contestants], axis=1)]
        mothers, fathers = pop[winners[0::2]], pop[winners[1::2]]

        cross = rng.random(npairs) < params.crossover_rate
        points = rng.integers(1, length, size=npairs) if length > 1 else np.ones(npairs, dtype=np.int64)
        tail = (np.arange(length)[None, :] >= points[:, None]) & cross[:, None]
        first = np.where(tail, fathers, mothers)
        second = np.where(tail, mothers, fathers)
        children = np.empty((2 * npairs, length), dtype=np.int64)
        children[0::2], children[1::2] = first, second
        children = children[:nchild]

        children ^= (rng.random(children.shape) < mutation).astype(np.int64)

        pop = np.vstack([elites, children])
        fit = fitness(pop)
        evaluations += size
        k = int(np.argmax(fit))
        if fit[k] > best_fit:
            best_bits, best_fit = pop[k].copy(), fit[k]

    genome = "".join(str(int(b)) for b in best_bits)
    return _result(model, decode(genome, model.m, ncoords), mode, "ga", evaluations, seed)


# --------------------------------------------------------------------------
# member-level and team-level demands


@dataclass(frozen=True)
class Conflict:
    member: int
    partner: int
    assigned: str
    preferred: str

    def __str__(self):
        return f"member {self.member} toward {self.partner}: assigned {self.assigned!r}, prefers {self.preferred!r}"


@dataclass(frozen=True)
class DemandReport:
    mode: str
    member_optimal: tuple
    team_optimal: bool
    conflicts: tuple = field(default_factory=tuple)

    @property
    def satisfied(self):
        return self.team_optimal and all(self.member_optimal)

    def to_dict(self):
        return {
            "mode": self.mode,
            "member_optimal": list(self.member_optimal),
            "team_optimal": self.team_optimal,
            "conflicts": [vars(c) for c in self.conflicts],
            "satisfied": self.satisfied,
        }


def check_demands(model, result, cap=DEFAULT_CAP):
    """Does ``result`` maximize every member's payoff, and the team's?

    A member is optimal when no vector it could choose on its own beats
    its assigned one.  Each coordinate where a unilateral switch would pay
    more is listed as a conflict; in symmetric mode such conflicts are the
    price of the shared choice and are reported, not resolved.
    """
    profile = result.profile
    mode = profile.mode
    _check_cap(model, DIRECTED, cap)
    best_team = brute_force_optimize(model, mode, cap).team_payoff
    team_optimal = team_payoff(model, profile) >= best_team

    member_optimal = []
    conflicts = []
    for i, vec in enumerate(profile.vectors):
        current = [model.index(a) for a in vec.actions]
        value = _member_value(model, i, current)
        best = max(v for _, v in _member_table(model, i)) if model.n > 1 else value
        member_optimal.append(value >= best)
        for pos, j in enumerate(partners(model.n, i)):
            top_action, top_value = current[pos], value
            for a in range(model.m):
                trial = list(current)
                trial[pos] = a
                v = _member_value(model, i, trial)
                if v > top_value:
                    top_action, top_value = a, v
            if top_action != current[pos]:
                conflicts.append(Conflict(i, j, vec.actions[pos], model.alphabet[top_action]))
    return DemandReport(mode, tuple(member_optimal), team_optimal, tuple(conflicts))
