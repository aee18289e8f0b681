"""Compiled inner loops for exhaustive search over product grids.

Grids are passed per axis as an array ``grids`` of shape (m, N); axis 0 is
the most significant bit and varies slowest in flat indices.
"""
import numpy as np
from numba import njit

_INV_LN2 = 1.0 / np.log(2.0)


@njit(cache=True)
def _neg_xlogx(x):
    if x > 0.0:
        return -x * np.log(x)
    return 0.0


@njit(cache=True)
def _first_changed(digits):
    # after an odometer step, the slowest digit that changed
    pos = digits.size - 1
    while pos > 0 and digits[pos] == 0:
        pos -= 1
    return pos


@njit(cache=True)
def _advance(digits, N):
    pos = digits.size - 1
    while pos >= 0:
        digits[pos] += 1
        if digits[pos] < N:
            return
        digits[pos] = 0
        pos -= 1


@njit(cache=True)
def grid_entropies(blocks, grids):
    """Entropies of ``blocks[c] @ kron(p)`` at every point of the product grid.

    ``blocks`` has shape (c, n, 2**m) with ``m = grids.shape[0]``; the
    result has shape (N**m, c).
    """
    nb, n, M = blocks.shape
    m, N = grids.shape
    total = N**m
    out = np.empty((total, nb))
    digits = np.zeros(m, np.int64)
    partial = np.zeros((m + 1, nb, n, M))
    partial[0] = blocks
    for flat in range(total):
        start = 0 if flat == 0 else _first_changed(digits)
        for level in range(start, m):
            q = grids[level, digits[level]]
            width = M >> (level + 1)
            for c in range(nb):
                for k in range(n):
                    for col in range(width):
                        partial[level + 1, c, k, col] = (
                            q * partial[level, c, k, col]
                            + (1.0 - q) * partial[level, c, k, col + width]
                        )
        for c in range(nb):
            h = 0.0
            for k in range(n):
                h += _neg_xlogx(partial[m, c, k, 0])
            out[flat, c] = h * _INV_LN2
        _advance(digits, N)
    return out


@njit(cache=True)
def _table_index(digits, i, N):
    sub = 0
    for pos in range(digits.size):
        if pos != i:
            sub = sub * N + digits[pos]
    return sub


@njit(cache=True)
def grid_search(H, w, grids, tables, lam, max_cost):
    """Maximize ``m H(Y) - sum_i H(Y|B_i) - lam * w @ p`` over the grid.

    ``tables[i, s]`` holds the two column entropies of the effective bit
    channel of position ``i`` at point ``s`` of the grid over the other
    positions.  Points with ``w @ p > max_cost`` are skipped.  Returns
    ``(best_objective, best_flat_index, n_evaluated)``.
    """
    n, M = H.shape
    m, N = grids.shape
    total = N**m
    digits = np.zeros(m, np.int64)
    partial = np.zeros((m + 1, n + 1, M))
    partial[0, :n] = H
    partial[0, n] = w
    best = -np.inf
    best_flat = -1
    evaluated = 0
    for flat in range(total):
        start = 0 if flat == 0 else _first_changed(digits)
        for level in range(start, m):
            q = grids[level, digits[level]]
            width = M >> (level + 1)
            for k in range(n + 1):
                for col in range(width):
                    partial[level + 1, k, col] = (
                        q * partial[level, k, col]
                        + (1.0 - q) * partial[level, k, col + width]
                    )
        cost = partial[m, n, 0]
        if cost <= max_cost:
            hy = 0.0
            for k in range(n):
                hy += _neg_xlogx(partial[m, k, 0])
            val = m * hy * _INV_LN2 - lam * cost
            for i in range(m):
                q = grids[i, digits[i]]
                sub = _table_index(digits, i, N)
                val -= q * tables[i, sub, 0] + (1.0 - q) * tables[i, sub, 1]
            evaluated += 1
            if val > best:
                best = val
                best_flat = flat
        _advance(digits, N)
    return best, best_flat, evaluated


@njit(cache=True)
def box_bounds(H, w, grids, tables, lam, max_cost):
    """Upper bounds of the objective on every cell of a product grid.

    Cell ``c`` spans consecutive grid points on each axis.  The bound uses

    * ``H(r) <= -sum_k r_k log2 rbar_k`` with ``rbar`` the output pmf at
      the cell centre; the right side is linear in ``r`` and ``r`` over the
      cell lies in the hull of its corner values, so the corners suffice;
    * each ``H(Y|B_i)`` is at least its smallest corner value, because
      the column entropies are concave in a multilinear argument;
    * the cost is multilinear, so its minimum is at a corner.

    Cells whose cheapest corner exceeds ``max_cost`` get ``-inf``.
    """
    n, M = H.shape
    m, N = grids.shape
    cells = N - 1
    total = cells**m
    out = np.empty(total)
    digits = np.zeros(m, np.int64)
    corner_bits = np.zeros(m)
    weights = np.zeros(M)
    r_corner = np.zeros((1 << m, n))
    r_bar = np.zeros(n)
    log_bar = np.zeros(n)
    ncorner = 1 << m
    for flat in range(total):
        # output pmf and cost at each corner
        min_cost = np.inf
        for c in range(ncorner):
            for a in range(m):
                corner_bits[a] = grids[a, digits[a] + ((c >> (m - 1 - a)) & 1)]
            for col in range(M):
                wt = 1.0
                for a in range(m):
                    bit = (col >> (m - 1 - a)) & 1
                    wt *= corner_bits[a] if bit == 0 else 1.0 - corner_bits[a]
                weights[col] = wt
            cost = 0.0
            for col in range(M):
                cost += w[col] * weights[col]
            if cost < min_cost:
                min_cost = cost
            for k in range(n):
                s = 0.0
                for col in range(M):
                    s += H[k, col] * weights[col]
                r_corner[c, k] = s
        if min_cost > max_cost:
            out[flat] = -np.inf
            _advance(digits, cells)
            continue
        # centre of the cell
        for a in range(m):
            corner_bits[a] = 0.5 * (grids[a, digits[a]] + grids[a, digits[a] + 1])
        for col in range(M):
            wt = 1.0
            for a in range(m):
                bit = (col >> (m - 1 - a)) & 1
                wt *= corner_bits[a] if bit == 0 else 1.0 - corner_bits[a]
            weights[col] = wt
        for k in range(n):
            s = 0.0
            for col in range(M):
                s += H[k, col] * weights[col]
            r_bar[k] = s
            log_bar[k] = np.log(s) * _INV_LN2 if s > 0.0 else 0.0
        hy = -np.inf
        for c in range(ncorner):
            ce = 0.0
            for k in range(n):
                if r_corner[c, k] > 0.0:
                    ce -= r_corner[c, k] * log_bar[k]
            if ce > hy:
                hy = ce
        bound = m * hy - lam * min_cost
        # conditional entropies: smallest corner values of each table
        for i in range(m):
            e0 = np.inf
            e1 = np.inf
            for c in range(1 << (m - 1)):
                sub = 0
                bitpos = m - 2
                for pos in range(m):
                    if pos != i:
                        sub = sub * N + digits[pos] + ((c >> bitpos) & 1)
                        bitpos -= 1
                if tables[i, sub, 0] < e0:
                    e0 = tables[i, sub, 0]
                if tables[i, sub, 1] < e1:
                    e1 = tables[i, sub, 1]
            lo = grids[i, digits[i]]
            hi = grids[i, digits[i] + 1]
            bound -= min(lo * e0 + (1.0 - lo) * e1, hi * e0 + (1.0 - hi) * e1)
        out[flat] = bound
        _advance(digits, cells)
    return out
