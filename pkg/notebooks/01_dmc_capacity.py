# %% [markdown]
# # Channel matrices and Blahut-Arimoto
#
# A discrete memoryless channel is a column-stochastic matrix: column `j` is
# the output distribution when input `j` is sent.  Everything is in bits.

# %%
import numpy as np

from bicmcap import Dmc, blahut_arimoto, entropy, load_matrix, mutual_information, save_matrix

bsc = Dmc(np.array([[0.9, 0.1], [0.1, 0.9]]))
print(bsc, "inputs:", bsc.M)
print("H(0.5, 0.5) =", entropy([0.5, 0.5]))
print("I(X;Y) with a uniform input =", mutual_information(bsc, [0.5, 0.5]))

# %% [markdown]
# Blahut-Arimoto stops once the duality gap falls below `tol` bits, so the
# reported capacity is certified to that accuracy.

# %%
res = blahut_arimoto(bsc)
print(f"BSC(0.1): C = {res.capacity:.9f} after {res.iterations} iterations, gap {res.gap:.1e}")

erasure = np.array([[0.75, 0.0], [0.25, 0.25], [0.0, 0.75]])
print("BEC(0.25):", blahut_arimoto(erasure).capacity)

z = np.array([[1.0, 0.3], [0.0, 0.7]])
cap, p = blahut_arimoto(z)
print(f"Z-channel: C = {cap:.6f}, optimal input {np.round(p, 4)}")

# %% [markdown]
# ## A cost on the inputs
#
# With a per-input cost `w` and a weight `lam`, the iteration maximizes
# `I(p) - lam * w @ p`.  Sweeping `lam` traces the capacity-cost curve.

# %%
rng = np.random.default_rng(0)
H = rng.dirichlet(np.ones(6), size=4).T
w = np.array([1.0, 2.0, 4.0, 8.0])
for lam in [0.0, 0.05, 0.2, 1.0]:
    r = blahut_arimoto(H, w, lam)
    print(f"lam={lam:<5} I={r.capacity:.4f}  E[w]={r.cost:.3f}")

# %% [markdown]
# ## Matrix files
#
# One output row per line, `#` starts a comment.

# %%
import tempfile
from pathlib import Path

path = Path(tempfile.mkdtemp()) / "bsc.txt"
save_matrix(bsc, path, header="binary symmetric channel, crossover 0.1")
print(path.read_text())
print(np.array_equal(load_matrix(path).transitions, bsc.transitions))
