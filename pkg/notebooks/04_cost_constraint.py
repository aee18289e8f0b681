# %% [markdown]
# # Average cost through a penalty
#
# Adding `-lam * w @ p` to the objective trades rate against average cost.
# Whatever cost `E` the penalized optimum ends up with, it should also be
# the best rate among bit pmfs with average cost at most `E`; here the
# exhaustive grid restricted to that cost checks the claim.

# %%
import numpy as np

from bicmcap import GridSpec, bacm_solve, build_constellation, discretize_awgn, exhaustive_bicm

c = build_constellation(2, 1.2)
H = discretize_awgn(c)
print("points", c.points, "costs", c.costs)

for lam in [0.0, 0.02, 0.05, 0.1, 0.3]:
    res = bacm_solve(H, lam, c.costs)
    grid = exhaustive_bicm(H, GridSpec(1e-3, 10), w=c.costs, max_cost=res.realized_cost)
    print(
        f"lam={lam:<5} E={res.realized_cost:.4f} rate={res.value:.5f} "
        f"best grid rate at cost <= E: {grid.value:.5f}"
    )

# %% [markdown]
# Hitting a prescribed average power is a one-dimensional root search over
# `lam`.

# %%
from bicmcap import db_to_linear, solve_lambda_for_snr

snr = db_to_linear(8.0)
lam, res = solve_lambda_for_snr(2, 1.4, snr)
print(f"lam={lam:.5f} power={res.realized_cost:.5f} target={snr:.5f} rate={res.value:.5f}")
