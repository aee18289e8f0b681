"""Channel constructors shared by the test modules."""
from functools import reduce

import numpy as np

from bicmcap.baseline import grid_local_maxima


# one line per acceptance criterion, printed at the end of the pytest run
ACCEPTANCE_LINES = []


def report(criterion, passed, detail):
    line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def bsc(eps):
    return np.array([[1 - eps, eps], [eps, 1 - eps]])


def product_bsc(eps, m):
    """Independent BSC(eps) on every bit; column index = bit label, MSB first."""
    return reduce(np.kron, [bsc(eps)] * m)


def random_channel(rng, n, m, concentration=1.0):
    """Column-stochastic ``n x 2**m`` matrix with Dirichlet columns."""
    H = rng.dirichlet(np.full(n, concentration), size=2**m).T
    return H / H.sum(axis=0)


def noisy_permutation_channel(rng, n, m, alpha_range=(0.2, 0.7), concentration=0.5):
    """``(1 - a) P + a D``: a random injective input-to-output map P blurred by
    Dirichlet columns D, with the mixing weight ``a`` drawn uniformly."""
    M = 2**m
    a = rng.uniform(*alpha_range)
    P = np.zeros((n, M))
    P[rng.choice(n, M, replace=False), np.arange(M)] = 1.0
    D = rng.dirichlet(np.full(n, concentration), size=M).T
    H = (1 - a) * P + a * D
    return H / H.sum(axis=0)


def distinct_grid_maxima(H, step):
    """Values of the coarse-grid local maxima, ties merged, best first."""
    return sorted({round(v, 9) for v, _ in grid_local_maxima(H, step)}, reverse=True)


def single_basin_corpus(seed, count, n, m, step=0.02):
    """Noisy-permutation channels whose coarse grid has exactly one local maximum."""
    rng = np.random.default_rng(seed)
    found = []
    while len(found) < count:
        H = noisy_permutation_channel(rng, n, m)
        if len(distinct_grid_maxima(H, step)) == 1:
            found.append(H)
    return found


def margin_corpus(seed, count, n, m, step=0.02, margin=1e-2, concentration=0.5):
    """Dirichlet channels whose best two coarse-grid maxima differ by > margin."""
    rng = np.random.default_rng(seed)
    found = []
    while len(found) < count:
        H = random_channel(rng, n, m, concentration)
        values = distinct_grid_maxima(H, step)
        if len(values) == 1 or values[0] - values[1] > margin:
            found.append(H)
    return found
