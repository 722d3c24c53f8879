# coding: utf-8

# # Choosing actions
#
# Each member picks one action toward every teammate. Its payoff weighs the
# gain from a cooperating partner against the loss from a non-cooperating one,
# using its belief that the partner will cooperate.

import numpy as np

from teamcoop import GAParams, PayoffModel, brute_force_optimize, check_demands, ga_optimize

rng = np.random.default_rng(3)
n, alphabet = 4, ("assist", "shadow", "defer")
shape = (n, n, len(alphabet))
model = PayoffModel(n, alphabet, rng.normal(3, 2, shape), rng.normal(-1, 2, shape), rng.uniform(0.2, 0.9, shape))

# In directed mode every member's choice is independent of the others, so
# exhaustive search is cheap.

exact = brute_force_optimize(model, "directed")
print("brute force:", exact.team_payoff, exact.profile.to_lists())

# The genetic search works on a bit string, a few bits per choice.

ga = ga_optimize(model, "directed", GAParams(population=24, generations=60), seed=11)
print("genetic    :", ga.team_payoff, f"({ga.evaluations} evaluations)")

# In symmetric mode a pair must agree on one action, so individual and
# team interests can pull apart.

joint = brute_force_optimize(model, "symmetric")
report = check_demands(model, joint)
print("symmetric optimum:", joint.team_payoff)
print("every member at its own optimum:", report.member_optimal)
for conflict in report.conflicts[:3]:
    print("  ", conflict)
