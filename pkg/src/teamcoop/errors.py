"""Exception types raised across the package."""


class TeamCoopError(Exception):
    """Base class for every error raised by teamcoop."""


# organization model
class DuplicateId(TeamCoopError):
    pass


class InvalidCapability(TeamCoopError, ValueError):
    pass


class InvalidRelation(TeamCoopError, ValueError):
    pass


class EmptyTeam(TeamCoopError, ValueError):
    pass


class AlreadyMember(TeamCoopError):
    pass


class NotAMember(TeamCoopError, KeyError):
    pass


class InvalidPartition(TeamCoopError, ValueError):
    pass


# cooperation chain
class InvalidModel(TeamCoopError, ValueError):
    pass


class InvalidMatrix(TeamCoopError, ValueError):
    pass


class UnknownAction(TeamCoopError, KeyError):
    pass


class UndefinedPosterior(TeamCoopError, ZeroDivisionError):
    """The observed action has zero probability under both hypotheses."""


class DegenerateModel(TeamCoopError):
    pass


class EmptyAggregate(TeamCoopError, ValueError):
    pass


class NonErgodic(TeamCoopError):
    """Both states are absorbing, so the stationary distribution is not unique."""


# payoff optimization
class InvalidMember(TeamCoopError, IndexError):
    pass


class InvalidProfile(TeamCoopError, ValueError):
    pass


class TooLarge(TeamCoopError):
    """The exhaustive search space exceeds the configured cap."""


class InvalidParams(TeamCoopError, ValueError):
    pass


# simulation
class ScenarioError(TeamCoopError, ValueError):
    """Raised with the full list of violations found in a scenario."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class SimulationError(TeamCoopError):
    """Wraps a module error with the epoch and pair it happened at."""

    def __init__(self, message, epoch=None, pair=None):
        self.epoch = epoch
        self.pair = pair
        super().__init__(message)


class EmptyTrajectory(TeamCoopError, ValueError):
    pass
