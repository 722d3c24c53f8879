# coding: utf-8

# # Beliefs and the two-state cooperation chain
#
# A pair of robots is either cooperating (state 1) or not (state 0). What a
# partner does is evidence about which state it is in.

import numpy as np

from teamcoop import PairModel, evidence, n_step, pair_transition, posterior_coop, stationary, step_pair

model = PairModel(
    alphabet=("share-map", "ignore"),
    prior_coop=0.4,
    likelihood_coop={"share-map": 0.8, "ignore": 0.2},
    likelihood_noncoop={"share-map": 0.3, "ignore": 0.7},
)

for action in model.alphabet:
    print(f"{action:10s} evidence {evidence(model, action):.3f}  P(coop | action) {posterior_coop(model, action):.3f}")

# The likelihood tables also define how the pair state moves from one epoch to the next.

matrix = pair_transition(model)
print(matrix)
for k in (1, 2, 5, 20):
    print(f"{k:2d} steps: stay cooperating {n_step(matrix, k).p11:.4f}")

# Over a long run the chain forgets where it started.

pi1, pi0 = stationary(matrix)
draws = np.random.default_rng(0).random(100_000)
state, visits = 0, 0
for u in draws:
    state = step_pair(state, matrix, u)
    visits += state
print(f"stationary share of cooperation {pi1:.4f}, simulated {visits / draws.size:.4f}")
