"""Reference computations that bracket the BACM result.

* exhaustive grid search over the bit probabilities (the classical method)
* BICM rate with uniform bits (lower bound)
* coded-modulation capacity via Blahut-Arimoto (upper bound), optionally
  under an average-cost limit
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ._gridkernel import box_bounds, grid_entropies, grid_search
from .bicm import bicm_mi, kron_pmf, label_bits, uniform_bits
from .dmc import _matrix, blahut_arimoto

__all__ = [
    "GridSpec",
    "GridResult",
    "MAX_EXHAUSTIVE_M",
    "exhaustive_bicm",
    "grid_objective",
    "grid_local_maxima",
    "uniform_bicm",
    "cm_capacity",
]

MAX_EXHAUSTIVE_M = 4
# grids with more points than this are searched cell by cell with pruning
_BRUTE_LIMIT = 2_000_000
_CELLS_PER_AXIS = 100


@dataclass(frozen=True)
class GridSpec:
    """Product grid over each ``P(B_i = 0)`` in [0, 1], endpoints included.

    With ``refinement = r`` a second pass searches a local grid of step
    ``step / r`` spanning one coarse step on either side of the best point.
    """

    step: float = 1e-2
    refinement: int | None = None

    def __post_init__(self):
        if not 0 < self.step <= 0.5:
            raise ValueError("grid step must lie in (0, 0.5]")
        if self.refinement is not None and self.refinement < 2:
            raise ValueError("refinement factor must be at least 2")

    def points(self):
        count = int(np.floor(1.0 / self.step + 1e-9))
        return np.arange(count + 1) * self.step

    def size(self, m):
        return self.points().size ** m


@dataclass
class GridResult:
    """Best grid point.

    ``grid_points`` is the size of the product grid that was covered;
    ``evaluations`` counts objective evaluations actually performed (fewer
    when whole cells were ruled out by an upper bound).
    """

    value: float
    bits: np.ndarray
    objective: float
    realized_cost: float | None
    grid_points: int
    evaluations: int


def _bits_of(H):
    M = H.shape[1]
    m = M.bit_length() - 1
    if M != 2**m or m < 1:
        raise ValueError(f"input alphabet size {M} is not a power of two")
    return m


def _entropy_tables(H, grids):
    """Column entropies of each effective bit channel over the other axes' grid."""
    m, N = grids.shape
    labels = label_bits(m)
    tables = np.empty((m, N ** (m - 1), 2))
    for i in range(m):
        blocks = np.stack([H[:, labels[:, i] == b] for b in (0, 1)])
        others = np.delete(grids, i, axis=0)
        tables[i] = grid_entropies(np.ascontiguousarray(blocks), others)
    return tables


def _search(H, w, grids, lam, max_cost):
    """Best point of the product grid ``grids`` (shape (m, N))."""
    tables = _entropy_tables(H, grids)
    best, flat, count = grid_search(H, w, grids, tables, lam, max_cost)
    if flat < 0:
        return -np.inf, None, count
    idx = np.unravel_index(flat, (grids.shape[1],) * grids.shape[0])
    return best, grids[np.arange(grids.shape[0]), list(idx)], count


def _pruned_search(H, w, pts, m, lam, max_cost):
    """Exact grid maximum, skipping cells whose upper bound cannot win."""
    N = pts.size
    block = int(np.ceil((N - 1) / _CELLS_PER_AXIS))
    cidx = np.unique(np.r_[np.arange(0, N, block), N - 1])
    coarse = np.tile(pts[cidx], (m, 1))
    best, bits, count = _search(H, w, coarse, lam, max_cost)
    tables = _entropy_tables(H, coarse)
    bounds = box_bounds(H, w, coarse, tables, lam, max_cost)
    ncell = cidx.size - 1
    width = int(np.max(np.diff(cidx))) + 1
    for flat in np.argsort(-bounds, kind="stable"):
        if bounds[flat] <= best:
            break
        cell = np.unravel_index(flat, (ncell,) * m)
        local = np.empty((m, width))
        for a, c in enumerate(cell):
            seg = pts[cidx[c] : cidx[c + 1] + 1]
            local[a, : seg.size] = seg
            local[a, seg.size :] = seg[-1]
        val, point, n = _search(H, w, local, lam, max_cost)
        count += n
        if val > best:
            best, bits = val, point
    return best, bits, count


def exhaustive_bicm(channel, grid=GridSpec(), lam=0.0, w=None, max_cost=None):
    """Global grid maximum of ``I_bicm(p) - lam * w @ p``.

    The result is the best point of the full product grid of
    ``(floor(1/step) + 1) ** m`` points.  Small grids are evaluated point
    by point; large ones are split into cells, and a cell is only searched
    if a rigorous upper bound of the objective on it beats the best value
    found so far, which returns the same grid maximum.  Refused for
    ``m > 4``.  ``max_cost`` restricts the search to ``w @ p <= max_cost``.
    """
    H = _matrix(channel)
    M = H.shape[1]
    m = _bits_of(H)
    pts = grid.points()
    if m > MAX_EXHAUSTIVE_M:
        raise ValueError(
            f"exhaustive search over m={m} bits needs {pts.size ** m:.3g} "
            f"evaluations; refusing above m={MAX_EXHAUSTIVE_M}"
        )
    if (lam != 0 or max_cost is not None) and w is None:
        raise ValueError("a cost vector is required for lam or max_cost")
    wv = np.zeros(M) if w is None else np.asarray(w, dtype=float)
    limit = np.inf if max_cost is None else float(max_cost) * (1 + 1e-12)

    if pts.size**m <= _BRUTE_LIMIT:
        best, bits, count = _search(H, wv, np.tile(pts, (m, 1)), float(lam), limit)
    else:
        best, bits, count = _pruned_search(H, wv, pts, m, float(lam), limit)
    if bits is None:
        raise ValueError(f"no grid point satisfies the cost limit {max_cost}")
    if grid.refinement:
        fine = grid.step / grid.refinement
        offsets = np.arange(-grid.refinement, grid.refinement + 1) * fine
        local = np.clip(bits[:, None] + offsets[None, :], 0.0, 1.0)
        val, point, n = _search(H, wv, local, float(lam), limit)
        count += n
        if val > best:
            best, bits = val, point
    value = bicm_mi(H, bits)
    cost = None if w is None else float(wv @ kron_pmf(bits))
    objective = value - (lam * cost if cost is not None else 0.0)
    return GridResult(value, np.asarray(bits, float), objective, cost, pts.size**m, count)


def grid_objective(channel, step, lam=0.0, w=None):
    """Objective on the full product grid as an array of shape ``(N,) * m``.

    Memory grows as ``N ** m``; meant for coarse grids.
    """
    H = _matrix(channel)
    m = _bits_of(H)
    pts = GridSpec(step).points()
    N = pts.size
    grids = np.tile(pts, (m, 1))
    shape = (N,) * m
    val = m * grid_entropies(np.ascontiguousarray(H[None]), grids)[:, 0].reshape(shape)
    tables = _entropy_tables(H, grids)
    for i in range(m):
        t = np.moveaxis(tables[i].reshape((N,) * (m - 1) + (2,)), -1, 0)
        q = pts.reshape([-1 if a == i else 1 for a in range(m)])
        val = val - (q * np.expand_dims(t[0], i) + (1 - q) * np.expand_dims(t[1], i))
    if lam and w is not None:
        basis = np.stack([pts, 1 - pts])  # (2, N)
        cost = np.asarray(w, float).reshape((2,) * m)
        for _ in range(m):
            # contract the leading bit axis; the grid axis goes to the back
            cost = np.tensordot(cost, basis, axes=([0], [0]))
        val = val - lam * cost
    return pts, val


def grid_local_maxima(channel, step, lam=0.0, w=None):
    """Local maxima of the objective on a coarse product grid.

    A point qualifies when no neighbour, diagonal ones included, has a
    larger value.  Plateaus therefore report every member.  Returns a list
    of ``(value, bits)`` sorted by decreasing value.
    """
    pts, val = grid_objective(channel, step, lam, w)
    m = val.ndim
    padded = np.pad(val, 1, constant_values=-np.inf)
    is_max = np.ones(val.shape, bool)
    for shift in itertools.product((-1, 0, 1), repeat=m):
        if any(shift):
            sl = tuple(slice(1 + s, padded.shape[a] - 1 + s) for a, s in enumerate(shift))
            is_max &= val >= padded[sl]
    found = [(float(val[idx]), pts[list(idx)]) for idx in zip(*np.nonzero(is_max))]
    found.sort(key=lambda t: -t[0])
    return found


def uniform_bicm(channel):
    """BICM rate with every bit uniform."""
    H = _matrix(channel)
    return bicm_mi(H, uniform_bits(_bits_of(H)))


def cm_capacity(channel, w=None, target_cost=None, tol=1e-9, cost_rtol=1e-7):
    """Coded-modulation capacity: max of ``I(p)`` over all input pmfs.

    With ``target_cost`` the maximization is restricted to ``w @ p <=
    target_cost`` by bisection over the penalty weight of a cost-penalized
    Blahut-Arimoto run; the returned value is attained by a feasible pmf
    whose cost is within ``cost_rtol`` of the target.
    """
    H = _matrix(channel)
    free = blahut_arimoto(H, tol=tol)
    if target_cost is None:
        return free.capacity
    if w is None:
        raise ValueError("target_cost needs a cost vector")
    w = np.asarray(w, dtype=float)
    if float(w @ free.input) <= target_cost:
        return free.capacity
    if target_cost < w.min():
        raise ValueError(f"target cost {target_cost} is below the cheapest symbol")
    lo, hi = 0.0, 1.0
    while True:
        feasible = blahut_arimoto(H, w, hi, tol=tol)
        if feasible.cost <= target_cost:
            break
        lo, hi = hi, 2 * hi
    for _ in range(200):
        if target_cost - feasible.cost <= cost_rtol * target_cost:
            break
        mid = 0.5 * (lo + hi)
        res = blahut_arimoto(H, w, mid, tol=tol)
        if res.cost <= target_cost:
            hi, feasible = mid, res
        else:
            lo = mid
    return feasible.capacity
