"""Static organization model: robots, relations and recursive team structures.

Every type here is an immutable value.  The operations (:func:`form_team`,
:func:`join`, :func:`leave`, :func:`decompose_goal`) return new nodes and
never touch their inputs, so a structure can be shared freely.

A team node keeps its leader in ``children[0]``.  The leader is the member
with the largest ``organizing + communicating`` score, ties going to the
lexicographically smallest robot id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping, Union

from .errors import (
    AlreadyMember,
    DuplicateId,
    EmptyTeam,
    InvalidCapability,
    InvalidPartition,
    InvalidRelation,
    NotAMember,
)

CAPABILITY_FIELDS = (
    "moving",
    "acting",
    "sensing",
    "communicating",
    "organizing",
    "learning",
)


@dataclass(frozen=True)
class CapabilityProfile:
    """Six dimensionless ability scores, each in ``[0, 1]``."""

    moving: float = 0.0
    acting: float = 0.0
    sensing: float = 0.0
    communicating: float = 0.0
    organizing: float = 0.0
    learning: float = 0.0

    def __post_init__(self):
        for name in CAPABILITY_FIELDS:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise InvalidCapability(f"{name} must be a number, got {value!r}")
            if not (math.isfinite(value) and 0.0 <= value <= 1.0):
                raise InvalidCapability(f"{name}={value} outside [0, 1]")
            object.__setattr__(self, name, float(value))

    @classmethod
    def uniform(cls, score):
        return cls(**{name: score for name in CAPABILITY_FIELDS})

    @property
    def leadership(self):
        return self.organizing + self.communicating

    def merge_max(self, other):
        return CapabilityProfile(
            **{n: max(getattr(self, n), getattr(other, n)) for n in CAPABILITY_FIELDS}
        )

    def to_dict(self):
        return {name: getattr(self, name) for name in CAPABILITY_FIELDS}

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - set(CAPABILITY_FIELDS)
        if unknown:
            raise InvalidCapability(f"unknown capability fields {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class CooperativeRobot:
    id: str
    capability: CapabilityProfile
    resources: Mapping[str, float] = field(default_factory=dict, hash=False)
    interface: frozenset = frozenset()

    def to_dict(self):
        return {
            "id": self.id,
            "capability": self.capability.to_dict(),
            "resources": dict(sorted(self.resources.items())),
            "interface": sorted(self.interface),
        }

    @classmethod
    def from_dict(cls, data):
        return create_robot(
            data["id"],
            data["capability"],
            data.get("resources", {}),
            data.get("interface", ()),
        )


class Registry:
    """Robots keyed by id; refuses duplicates."""

    def __init__(self, robots=()):
        self._robots = {}
        for robot in robots:
            self.add(robot)

    def add(self, robot):
        if robot.id in self._robots:
            raise DuplicateId(f"robot id {robot.id!r} already registered")
        self._robots[robot.id] = robot
        return robot

    def __getitem__(self, robot_id):
        return self._robots[robot_id]

    def __contains__(self, robot_id):
        return robot_id in self._robots

    def __iter__(self):
        return iter(self._robots.values())

    def __len__(self):
        return len(self._robots)


def create_robot(id, capability, resources=None, interface=(), registry=None):
    """Build a :class:`CooperativeRobot`, optionally adding it to ``registry``.

    ``capability`` may be a :class:`CapabilityProfile` or a mapping of scores.
    """
    if not isinstance(id, str) or not id:
        raise ValueError("robot id must be a nonempty string")
    if not isinstance(capability, CapabilityProfile):
        capability = CapabilityProfile.from_dict(capability)
    resources = dict(resources or {})
    for name, qty in resources.items():
        if not (isinstance(qty, (int, float)) and math.isfinite(qty) and qty >= 0):
            raise ValueError(f"resource {name!r} of robot {id!r} must be >= 0, got {qty!r}")
    robot = CooperativeRobot(id, capability, resources, frozenset(interface))
    if registry is not None:
        registry.add(robot)
    return robot


class RelationKind(str, Enum):
    VERTICAL = "vertical-control"
    HORIZONTAL = "horizontal-cooperation"


@dataclass(frozen=True, order=True)
class Relation:
    kind: RelationKind
    source: str
    target: str

    def __post_init__(self):
        object.__setattr__(self, "kind", RelationKind(self.kind))
        if self.source == self.target:
            raise InvalidRelation(f"relation from {self.source!r} to itself")

    def to_dict(self):
        return {"kind": self.kind.value, "from": self.source, "to": self.target}

    @classmethod
    def from_dict(cls, data):
        return cls(data["kind"], data["from"], data["to"])


# --------------------------------------------------------------------------
# recursive structure


@dataclass(frozen=True)
class Leaf:
    """A single robot inside a team; the minimal unit of the structure."""

    robot_id: str
    capability: CapabilityProfile
    goals: frozenset = frozenset()
    constraints: frozenset = frozenset()
    rules: frozenset = frozenset()
    benefit: float = 0.0
    level: int = 1

    kind = "leaf"


@dataclass(frozen=True)
class Team:
    id_ros: str
    leader_robot_id: str
    children: tuple
    goals: frozenset
    capability: CapabilityProfile
    constraints: frozenset = frozenset()
    rules: frozenset = frozenset()
    benefit: float = 0.0
    level: int = 0
    position: int = 0

    kind = "team"


OrgNode = Union[Leaf, Team]


class _Dissolved:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "DISSOLVED"

    def __bool__(self):
        return False


#: Returned by :func:`leave` when the last member walks out.
DISSOLVED = _Dissolved()


@dataclass(frozen=True)
class TeamStructure:
    registry: tuple
    relations: frozenset
    root: OrgNode

    def to_dict(self):
        return structure_to_dict(self)


def _representative(node):
    """(robot id, capability) of the robot standing for ``node``."""
    while isinstance(node, Team):
        node = node.children[0]
    return node.robot_id, node.capability


def _leader_key(robot_id, capability):
    return (-capability.leadership, robot_id)


def _aggregate(children):
    agg = children[0].capability
    for child in children[1:]:
        agg = agg.merge_max(child.capability)
    return agg


def _order_children(children):
    """Move the elected leader's node to the front, keeping the rest in order."""
    best = min(range(len(children)), key=lambda k: _leader_key(*_representative(children[k])))
    return (children[best],) + children[:best] + children[best + 1 :]


def _rebuild(team, children):
    children = _order_children(tuple(children))
    return replace(
        team,
        children=children,
        leader_robot_id=_representative(children[0])[0],
        capability=_aggregate(children),
    )


def members(node):
    """Robot ids of every leaf below ``node``, in depth-first order."""
    if isinstance(node, Leaf):
        return [node.robot_id]
    out = []
    for child in node.children:
        out.extend(members(child))
    return out


def form_team(robots, goals, level=0, position=0, id_ros=None, constraints=(), rules=(), benefit=0.0):
    """Group ``robots`` into a team node with one leaf per robot.

    The whole goal set starts with the leader; use :func:`decompose_goal`
    to hand sub-goals to the other members.
    """
    robots = list(robots)
    if not robots:
        raise EmptyTeam("a team needs at least one robot")
    goals = frozenset(goals)
    if not goals:
        raise InvalidPartition("a team needs at least one goal")
    seen = set()
    for robot in robots:
        if robot.id in seen:
            raise DuplicateId(f"robot {robot.id!r} listed twice")
        seen.add(robot.id)
    leaves = [Leaf(r.id, r.capability, level=level + 1) for r in robots]
    leaves = _order_children(tuple(leaves))
    leaves = (replace(leaves[0], goals=goals),) + leaves[1:]
    return Team(
        id_ros=id_ros if id_ros is not None else f"ros-{level}-{position}",
        leader_robot_id=leaves[0].robot_id,
        children=leaves,
        goals=goals,
        capability=_aggregate(leaves),
        constraints=frozenset(constraints),
        rules=frozenset(rules),
        benefit=benefit,
        level=level,
        position=position,
    )


def join(team, robot):
    """Add ``robot`` as a new leaf child of ``team`` and re-elect the leader."""
    if not isinstance(team, Team):
        raise TypeError("join expects a Team node")
    if robot.id in members(team):
        raise AlreadyMember(f"robot {robot.id!r} is already in {team.id_ros!r}")
    leaf = Leaf(robot.id, robot.capability, level=team.level + 1)
    return _rebuild(team, team.children + (leaf,))


def _add_goals(node, goals):
    if not goals:
        return node
    if isinstance(node, Leaf):
        return replace(node, goals=node.goals | goals)
    first = _add_goals(node.children[0], goals)
    return replace(node, goals=node.goals | goals, children=(first,) + node.children[1:])


def leave(team, robot_id):
    """Remove ``robot_id`` from ``team`` (searching sub-teams too).

    Goals held by the departing robot pass to the (possibly new) leader.
    Returns :data:`DISSOLVED` when no member is left.
    """
    if isinstance(team, Leaf):
        if team.robot_id != robot_id:
            raise NotAMember(robot_id)
        return DISSOLVED
    for k, child in enumerate(team.children):
        if robot_id not in members(child):
            continue
        if isinstance(child, Leaf):
            remaining, orphaned = None, child.goals
        else:
            sub = leave(child, robot_id)
            remaining, orphaned = (None, child.goals) if sub is DISSOLVED else (sub, frozenset())
        rest = list(team.children[:k]) + ([remaining] if remaining is not None else []) + list(team.children[k + 1 :])
        if not rest:
            return DISSOLVED
        rebuilt = _rebuild(team, rest)
        first = _add_goals(rebuilt.children[0], orphaned - _goals_below(rebuilt))
        return replace(rebuilt, children=(first,) + rebuilt.children[1:])
    raise NotAMember(f"robot {robot_id!r} is not in {team.id_ros!r}")


def _goals_below(team):
    out = frozenset()
    for child in team.children:
        out |= child.goals
    return out


def _retarget(node, goals):
    """Give ``node`` exactly ``goals``, keeping descendants partitioned."""
    goals = frozenset(goals)
    if isinstance(node, Leaf):
        return replace(node, goals=goals)
    kept = [child.goals & goals for child in node.children]
    leftover = goals.difference(*kept) if kept else goals
    kept[0] = kept[0] | leftover
    children = tuple(_retarget(c, g) for c, g in zip(node.children, kept))
    return replace(node, goals=goals, children=children)


def decompose_goal(team, assignment):
    """Split ``team.goals`` among its children.

    ``assignment`` maps child index to a goal subset; the subsets must be
    pairwise disjoint and cover the team's goal set.
    """
    n = len(team.children)
    keys = set(assignment)
    if keys != set(range(n)):
        missing = sorted(set(range(n)) - keys)
        extra = sorted(keys - set(range(n)))
        raise InvalidPartition(f"assignment must cover children 0..{n - 1} (missing {missing}, extra {extra})")
    subsets = [frozenset(assignment[k]) for k in range(n)]
    seen = set()
    for k, subset in enumerate(subsets):
        overlap = seen & subset
        if overlap:
            raise InvalidPartition(f"goals {sorted(overlap)} assigned twice (child {k})")
        seen |= subset
    if seen != team.goals:
        uncovered = sorted(team.goals - seen)
        foreign = sorted(seen - team.goals)
        raise InvalidPartition(f"uncovered goals {uncovered}, foreign goals {foreign}")
    children = tuple(_retarget(c, g) for c, g in zip(team.children, subsets))
    return replace(team, children=children)


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    path: str
    rule: str
    message: str

    def __str__(self):
        return f"{self.path}: [{self.rule}] {self.message}"


def _node_name(node):
    return node.robot_id if isinstance(node, Leaf) else node.id_ros


def validate(structure):
    """Check registry, relation and node invariants; returns a list of violations."""
    out = []
    registry = {}
    for robot in structure.registry:
        if robot.id in registry:
            out.append(Violation("registry", "unique-id", f"robot id {robot.id!r} appears more than once"))
        registry[robot.id] = robot
    for rel in sorted(structure.relations):
        for end in (rel.source, rel.target):
            if end not in registry:
                out.append(Violation("relations", "relation-endpoint", f"{rel.kind.value} {rel.source}->{rel.target}: unknown robot {end!r}"))
        if rel.source == rel.target:
            out.append(Violation("relations", "relation-distinct", f"self relation on {rel.source!r}"))

    root = structure.root
    leaf_caps = {}
    counts = {}
    _collect_leaves(root, leaf_caps, counts)
    for robot_id, count in sorted(counts.items()):
        if count > 1:
            out.append(Violation("root", "single-membership", f"robot {robot_id!r} appears {count} times in the structure"))
        if robot_id not in registry:
            out.append(Violation("root", "registered", f"robot {robot_id!r} is not in the registry"))
        elif registry[robot_id].capability != leaf_caps[robot_id]:
            out.append(Violation("root", "capability-match", f"leaf capability of {robot_id!r} differs from registry"))

    if root.level != 0:
        out.append(Violation(f"root[{_node_name(root)}]", "root-level", f"root level is {root.level}, expected 0"))
    _validate_node(root, "root", structure.relations, leaf_caps, out)
    return out


def _collect_leaves(node, caps, counts):
    if isinstance(node, Leaf):
        caps.setdefault(node.robot_id, node.capability)
        counts[node.robot_id] = counts.get(node.robot_id, 0) + 1
        return
    for child in node.children:
        _collect_leaves(child, caps, counts)


def _validate_node(node, path, relations, caps, out):
    here = f"{path}[{_node_name(node)}]"
    for ref in sorted(node.constraints):
        if ref not in relations:
            out.append(Violation(here, "constraint-ref", f"constraint {ref} is not a known relation"))
    if node.level < 0:
        out.append(Violation(here, "level-nonnegative", f"level {node.level}"))
    if isinstance(node, Leaf):
        return
    if node.position < 0:
        out.append(Violation(here, "position-nonnegative", f"position {node.position}"))
    if not node.children:
        out.append(Violation(here, "nonempty-team", "team has no children"))
        return

    reps = [_node_rep_id(child) for child in node.children]
    if reps[0] != node.leader_robot_id:
        out.append(Violation(here, "leader-first", f"children[0] stands for {reps[0]!r}, leader is {node.leader_robot_id!r}"))
    known = [r for r in reps if r in caps]
    if known:
        elected = min(known, key=lambda r: _leader_key(r, caps[r]))
        if elected != node.leader_robot_id:
            out.append(Violation(here, "leader-argmax", f"leader {node.leader_robot_id!r} but {elected!r} has the strongest organizing+communicating"))

    union = frozenset()
    overlap = set()
    for child in node.children:
        overlap |= union & child.goals
        union |= child.goals
    if overlap:
        out.append(Violation(here, "goal-disjoint", f"goals {sorted(overlap)} held by more than one child"))
    if union != node.goals:
        out.append(Violation(here, "goal-cover", f"children hold {sorted(union)}, team goals are {sorted(node.goals)}"))

    if _aggregate(node.children) != node.capability:
        out.append(Violation(here, "capability-aggregate", "team capability is not the per-dimension max over children"))

    for k, child in enumerate(node.children):
        child_path = f"{here}/{k}"
        if child.level != node.level + 1:
            out.append(Violation(f"{child_path}[{_node_name(child)}]", "child-level", f"level {child.level}, parent level {node.level}"))
        _validate_node(child, child_path, relations, caps, out)


def _node_rep_id(node):
    return node.robot_id if isinstance(node, Leaf) else node.leader_robot_id


# --------------------------------------------------------------------------
# JSON


def node_to_dict(node):
    common = {
        "goals": sorted(node.goals),
        "constraints": [r.to_dict() for r in sorted(node.constraints)],
        "rules": sorted(node.rules),
        "benefit": node.benefit,
        "level": node.level,
    }
    if isinstance(node, Leaf):
        return {"kind": "leaf", "robot_id": node.robot_id, "capability": node.capability.to_dict(), **common}
    return {
        "kind": "team",
        "id_ros": node.id_ros,
        "leader_robot_id": node.leader_robot_id,
        "capability": node.capability.to_dict(),
        "position": node.position,
        **common,
        "children": [node_to_dict(c) for c in node.children],
    }


def node_from_dict(data):
    common = dict(
        goals=frozenset(data.get("goals", ())),
        constraints=frozenset(Relation.from_dict(r) for r in data.get("constraints", ())),
        rules=frozenset(data.get("rules", ())),
        benefit=float(data.get("benefit", 0.0)),
        capability=CapabilityProfile.from_dict(data["capability"]),
    )
    kind = data.get("kind")
    if kind == "leaf":
        return Leaf(robot_id=data["robot_id"], level=int(data.get("level", 1)), **common)
    if kind == "team":
        return Team(
            id_ros=data["id_ros"],
            leader_robot_id=data["leader_robot_id"],
            children=tuple(node_from_dict(c) for c in data.get("children", ())),
            level=int(data.get("level", 0)),
            position=int(data.get("position", 0)),
            **common,
        )
    raise ValueError(f"unknown node kind {kind!r}")


def structure_to_dict(structure):
    return {
        "registry": [r.to_dict() for r in structure.registry],
        "relations": [r.to_dict() for r in sorted(structure.relations)],
        "root": node_to_dict(structure.root),
    }


def structure_from_dict(data):
    return TeamStructure(
        registry=tuple(CooperativeRobot.from_dict(r) for r in data.get("registry", ())),
        relations=frozenset(Relation.from_dict(r) for r in data.get("relations", ())),
        root=node_from_dict(data["root"]),
    )
