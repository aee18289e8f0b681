# %% [markdown]
# # Bit-alternating convex-concave maximization
#
# For a single bit the rate splits into a concave part and a sum of convex
# terms.  Replacing the convex terms by tangent lines gives a concave
# minorant that touches the objective at the expansion point; maximizing it
# and repeating is an ascent method.  The outer loop cycles over the bits.

# %%
import numpy as np

from bicmcap import BacmConfig, BitSubproblem, bacm_solve, bicm_mi, exhaustive_bicm, GridSpec

rng = np.random.default_rng(5)
M, n = 8, 12
P = np.zeros((n, M))
P[rng.choice(n, M, replace=False), np.arange(M)] = 1.0
H = 0.6 * P + 0.4 * rng.dirichlet(np.full(n, 0.5), size=M).T

# %% [markdown]
# The minorant and the objective along one coordinate:

# %%
p0s = np.full(3, 0.5)
sub = BitSubproblem.from_channel(H, p0s, 1)
hat = 0.3
for q in np.linspace(0, 1, 6):
    print(f"p0={q:.1f}  objective={sub.objective(q):.5f}  minorant={sub.surrogate(q, hat):.5f}")
best, n_eval = sub.maximize(hat, 1e-5)
print("minorant maximizer:", best, "found with", n_eval, "bisection steps")

# %% [markdown]
# The full solver and its telemetry: `K` inner iterations per bit update,
# `L` outer passes, and the objective after every bit update.

# %%
res = bacm_solve(H)
tel = res.telemetry
print("value", res.value, "bits", np.round(res.bits, 5))
print("L =", tel.outer_passes, " K per bit update =", tel.inner_iterations)
print("trace:", np.round(tel.objective_trace, 6))

# %% [markdown]
# Against the exhaustive grid (step 1e-3, then a 1e-4 local pass):

# %%
grid = exhaustive_bicm(H, GridSpec(1e-3, refinement=10))
print(f"grid {grid.value:.8f} with {grid.evaluations} evaluations, BACM {res.value:.8f}")

# %% [markdown]
# The objective can have several local maxima, so a uniform start is not
# always enough.  Extra starting points are tried with `starts`.

# %%
H2 = rng.dirichlet(np.full(12, 0.5), size=8).T
single = bacm_solve(H2)
starts = [np.full(3, 0.5)] + [rng.uniform(size=3) for _ in range(8)]
multi = bacm_solve(H2, config=BacmConfig(starts=starts))
grid2 = exhaustive_bicm(H2, GridSpec(1e-2))
print(f"uniform start {single.value:.5f}, best of 9 starts {multi.value:.5f}, grid {grid2.value:.5f}")
