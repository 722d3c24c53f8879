"""Recursive robot-team structures, Bayesian cooperation chains and action-set optimization."""

from .coop import (
    PairModel,
    TransitionMatrix,
    aggregate_transition,
    evidence,
    n_step,
    pair_transition,
    posterior_coop,
    posterior_noncoop,
    stationary,
    step_pair,
)
from .org import (
    DISSOLVED,
    CapabilityProfile,
    CooperativeRobot,
    Leaf,
    Registry,
    Relation,
    RelationKind,
    Team,
    TeamStructure,
    create_robot,
    decompose_goal,
    form_team,
    join,
    leave,
    members,
    validate,
)
from .payoff import (
    ActionVector,
    GAParams,
    JointProfile,
    OptimizationResult,
    PayoffModel,
    brute_force_optimize,
    check_demands,
    ga_optimize,
    member_payoff,
    team_payoff,
)
from .sim import CoopGraph, EpochRecord, Scenario, metrics, reform_teams, run

__version__ = "0.1.0"
