"""Two-state cooperation chain driven by Bayesian beliefs.

Each pair of robots is either cooperating (state 1) or not (state 0).  A
:class:`PairModel` holds the prior probability of cooperation and the
likelihood of every action under both hypotheses; the posteriors it yields
fill a 2x2 :class:`TransitionMatrix`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .errors import (
    DegenerateModel,
    EmptyAggregate,
    InvalidMatrix,
    InvalidModel,
    NonErgodic,
    UndefinedPosterior,
    UnknownAction,
)

TOL = 1e-12

COOPERATING = 1
NOT_COOPERATING = 0


def _aligned(alphabet, table, name):
    if isinstance(table, Mapping):
        missing = [a for a in alphabet if a not in table]
        extra = [a for a in table if a not in alphabet]
        if missing or extra:
            raise InvalidModel(f"{name} must cover exactly the alphabet (missing {missing}, extra {extra})")
        return tuple(float(table[a]) for a in alphabet)
    table = tuple(float(x) for x in table)
    if len(table) != len(alphabet):
        raise InvalidModel(f"{name} has {len(table)} entries for an alphabet of {len(alphabet)}")
    return table


def _check_distribution(values, name):
    for v in values:
        if not (math.isfinite(v) and v >= 0.0):
            raise InvalidModel(f"{name} has an invalid entry {v}")
    total = math.fsum(values)
    if abs(total - 1.0) > TOL:
        raise InvalidModel(f"{name} sums to {total!r}, expected 1")


@dataclass(frozen=True)
class PairModel:
    """Prior and per-action likelihood tables for one robot pair.

    Likelihood tables may be given as mappings keyed by action or as
    sequences aligned with ``alphabet``; they are stored aligned.
    """

    alphabet: tuple
    prior_coop: float
    likelihood_coop: tuple
    likelihood_noncoop: tuple

    def __post_init__(self):
        alphabet = tuple(self.alphabet)
        if not alphabet:
            raise InvalidModel("alphabet must contain at least one action")
        if len(set(alphabet)) != len(alphabet):
            raise InvalidModel(f"alphabet has repeated symbols: {list(alphabet)}")
        prior = float(self.prior_coop)
        if not (0.0 <= prior <= 1.0):
            raise InvalidModel(f"prior_coop={prior} outside [0, 1]")
        lc = _aligned(alphabet, self.likelihood_coop, "likelihood_coop")
        ln = _aligned(alphabet, self.likelihood_noncoop, "likelihood_noncoop")
        _check_distribution(lc, "likelihood_coop")
        _check_distribution(ln, "likelihood_noncoop")
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "prior_coop", prior)
        object.__setattr__(self, "likelihood_coop", lc)
        object.__setattr__(self, "likelihood_noncoop", ln)

    @property
    def prior_noncoop(self):
        return 1.0 - self.prior_coop

    def index(self, action):
        try:
            return self.alphabet.index(action)
        except ValueError:
            raise UnknownAction(f"action {action!r} not in alphabet {list(self.alphabet)}") from None

    def with_prior(self, prior_coop):
        return PairModel(self.alphabet, prior_coop, self.likelihood_coop, self.likelihood_noncoop)

    def to_dict(self):
        return {
            "alphabet": list(self.alphabet),
            "prior_coop": self.prior_coop,
            "likelihood_coop": list(self.likelihood_coop),
            "likelihood_noncoop": list(self.likelihood_noncoop),
        }

    @classmethod
    def from_dict(cls, data, alphabet=None):
        alphabet = data.get("alphabet", alphabet)
        if alphabet is None:
            raise InvalidModel("pair model has no alphabet")
        return cls(tuple(alphabet), data["prior_coop"], data["likelihood_coop"], data["likelihood_noncoop"])


def evidence(model, action):
    """Total probability of observing ``action`` under both hypotheses."""
    k = model.index(action)
    return model.likelihood_coop[k] * model.prior_coop + model.likelihood_noncoop[k] * model.prior_noncoop


def _posterior(model, action, coop):
    k = model.index(action)
    p = evidence(model, action)
    if p <= 0.0:
        raise UndefinedPosterior(f"action {action!r} has zero evidence")
    if coop:
        return model.likelihood_coop[k] * model.prior_coop / p
    return model.likelihood_noncoop[k] * model.prior_noncoop / p


def posterior_coop(model, action):
    """P(cooperating | action) by Bayes' rule."""
    return _posterior(model, action, True)


def posterior_noncoop(model, action):
    """P(not cooperating | action) by Bayes' rule."""
    return _posterior(model, action, False)


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic matrix over (cooperating, not cooperating).

    ``p11`` keeps cooperation, ``p10`` ends it, ``p01`` starts it and
    ``p00`` keeps its absence.
    """

    p11: float
    p10: float
    p01: float
    p00: float

    def __post_init__(self):
        for name in ("p11", "p10", "p01", "p00"):
            v = float(getattr(self, name))
            if not (0.0 <= v <= 1.0):
                raise InvalidMatrix(f"{name}={v} outside [0, 1]")
            object.__setattr__(self, name, v)
        if abs(self.p11 + self.p10 - 1.0) > TOL or abs(self.p01 + self.p00 - 1.0) > TOL:
            raise InvalidMatrix(f"rows must sum to 1: {self.rows()}")

    @classmethod
    def from_stay(cls, p11, p01):
        """Build from the probabilities of landing in state 1 from each state."""
        return cls(p11, 1.0 - p11, p01, 1.0 - p01)

    def rows(self):
        return ((self.p11, self.p10), (self.p01, self.p00))

    def to_dict(self):
        return {"p11": self.p11, "p10": self.p10, "p01": self.p01, "p00": self.p00}

    @classmethod
    def from_dict(cls, data):
        return cls(data["p11"], data["p10"], data["p01"], data["p00"])


def _clip(p):
    return min(1.0, max(0.0, p))


def pair_transition(model):
    """Transition matrix for one pair.

    ``p11`` is the expected cooperative posterior when actions follow the
    cooperative likelihood; ``p01`` is the analogous non-cooperative sum.
    Actions with zero evidence have both likelihoods zero and are skipped.
    """
    p11 = 0.0
    p01 = 0.0
    usable = 0
    for k, action in enumerate(model.alphabet):
        if evidence(model, action) <= 0.0:
            continue
        usable += 1
        p11 += model.likelihood_coop[k] * posterior_coop(model, action)
        p01 += model.likelihood_noncoop[k] * posterior_noncoop(model, action)
    if not usable:
        raise DegenerateModel("every action has zero evidence")
    return TransitionMatrix.from_stay(_clip(p11), _clip(p01))


def aggregate_transition(matrices):
    """Element-wise mean of pair matrices."""
    matrices = list(matrices)
    if not matrices:
        raise EmptyAggregate("nothing to aggregate")
    n = len(matrices)
    return TransitionMatrix(
        math.fsum(m.p11 for m in matrices) / n,
        math.fsum(m.p10 for m in matrices) / n,
        math.fsum(m.p01 for m in matrices) / n,
        math.fsum(m.p00 for m in matrices) / n,
    )


def step_pair(state, matrix, draw):
    """Advance one pair's state with a uniform draw in ``[0, 1)``."""
    threshold = matrix.p11 if state == COOPERATING else matrix.p01
    return COOPERATING if draw < threshold else NOT_COOPERATING


def compose(a, b):
    """Matrix product ``a @ b``: ``a``'s steps followed by ``b``'s."""
    (a11, a10), (a01, a00) = a.rows()
    (b11, b10), (b01, b00) = b.rows()
    p11 = a11 * b11 + a10 * b01
    p10 = a11 * b10 + a10 * b00
    p01 = a01 * b11 + a00 * b01
    p00 = a01 * b10 + a00 * b00
    # renormalize rows so accumulated rounding never trips the invariant
    s1, s0 = p11 + p10, p01 + p00
    return TransitionMatrix(_clip(p11 / s1), _clip(p10 / s1), _clip(p01 / s0), _clip(p00 / s0))


def n_step(matrix, k):
    """The k-step transition matrix, by repeated squaring."""
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    result = None
    base = matrix
    while k:
        if k & 1:
            result = base if result is None else compose(result, base)
        k >>= 1
        if k:
            base = compose(base, base)
    return result


def stationary(matrix):
    """Stationary distribution ``(pi1, pi0)`` of a two-state chain."""
    denom = matrix.p01 + matrix.p10
    if denom <= 0.0:
        raise NonErgodic("p10 = p01 = 0: both states are absorbing")
    pi1 = matrix.p01 / denom
    return pi1, 1.0 - pi1
