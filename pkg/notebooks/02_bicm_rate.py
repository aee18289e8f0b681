# %% [markdown]
# # The BICM rate
#
# With `m` independent label bits, bit `i` is 0 with probability `p0s[i]`
# (position 0 is the most significant bit).  The input pmf is the
# Kronecker product of the bit pmfs and the BICM rate is `sum_i I(B_i; Y)`.

# %%
import numpy as np

from bicmcap import (
    bicm_mi,
    bit_mutual_informations,
    blahut_arimoto,
    effective_bit_channel,
    kron_pmf,
    label_bits,
    mutual_information,
)

print(label_bits(3))
print("kron_pmf([0.5, 0.4, 0.9]) =", kron_pmf([0.5, 0.4, 0.9]))

# %% [markdown]
# Each bit sees an effective binary-input channel whose columns average the
# channel over the other bits.

# %%
rng = np.random.default_rng(1)
H = rng.dirichlet(np.full(8, 0.5), size=4).T
p0s = np.array([0.5, 0.3])
print(np.round(effective_bit_channel(H, p0s, 0), 3))

# %% [markdown]
# The BICM rate never exceeds the mutual information of the full symbol,
# and for uniform bits it is often well below the channel capacity.

# %%
print("per-bit terms:", bit_mutual_informations(H, p0s))
print("BICM rate:    ", bicm_mi(H, p0s))
print("symbol MI:    ", mutual_information(H, kron_pmf(p0s)))
print("capacity:     ", blahut_arimoto(H).capacity)

# %% [markdown]
# Over a grid of bit pmfs the rate is not concave: there can be several
# local maxima, some of them on the faces where one bit is fixed.

# %%
from bicmcap import grid_local_maxima

for value, bits in grid_local_maxima(H, 0.05)[:5]:
    print(f"{value:.4f} at {bits}")
