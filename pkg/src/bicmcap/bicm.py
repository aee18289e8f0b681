"""Bit-level view of a DMC: product input pmfs and effective bit channels.

Input symbol ``k`` (0-based column index) carries the ``m``-bit label equal
to the binary expansion of ``k``; bit position 0 is the most significant
bit.  A set of bit pmfs is stored as the vector of probabilities that each
bit equals 0, i.e. ``p0s[i] = P(B_i = 0)``.
"""
from __future__ import annotations

import numpy as np

from .dmc import _matrix, column_entropies, entropy

__all__ = [
    "bit_pmf",
    "check_bits",
    "uniform_bits",
    "label_bits",
    "kron_pmf",
    "brgc_permutation",
    "effective_bit_channel",
    "effective_pair_channel",
    "bit_cost",
    "conditional_entropy_bit",
    "bit_mutual_informations",
    "bicm_mi",
]


def bit_pmf(p0):
    """The column pmf ``(p0, 1 - p0)`` of a single bit."""
    return np.array([p0, 1.0 - p0])


def check_bits(p0s, m=None):
    p0s = np.atleast_1d(np.asarray(p0s, dtype=float))
    if p0s.ndim != 1 or p0s.size == 0:
        raise ValueError("bit pmfs must be a non-empty vector of P(B_i = 0)")
    if np.any(p0s < 0) or np.any(p0s > 1):
        raise ValueError("bit probabilities must lie in [0, 1]")
    if m is not None and p0s.size != m:
        raise ValueError(f"expected {m} bit pmfs, got {p0s.size}")
    return p0s


def uniform_bits(m):
    return np.full(m, 0.5)


def label_bits(m):
    """Array of shape (2**m, m): row k is the MSB-first binary label of k."""
    k = np.arange(2**m)[:, None]
    shifts = np.arange(m - 1, -1, -1)[None, :]
    return (k >> shifts) & 1


def kron_pmf(p0s):
    """Joint input pmf ``p^1 (x) ... (x) p^m`` of independent bits."""
    p = np.ones(1)
    for q in check_bits(p0s):
        p = np.kron(p, bit_pmf(q))
    return p


def brgc_permutation(m):
    """Binary reflected Gray code: amplitude rank ``r`` gets label ``r ^ (r >> 1)``."""
    if m < 1:
        raise ValueError("m must be positive")
    r = np.arange(2**m)
    return r ^ (r >> 1)


def _marginalize(H, p0s, keep):
    """Contract the bit axes of ``H`` not in ``keep`` against their pmfs.

    Returns an array of shape ``(n, 2, ..., 2)`` with the kept bit axes in
    the order given by ``keep``.
    """
    n, M = H.shape
    m = p0s.size
    if M != 2**m:
        raise ValueError(f"channel has {M} inputs but {m} bit pmfs were given")
    T = H.reshape((n,) + (2,) * m)
    for pos in range(m - 1, -1, -1):
        if pos not in keep:
            T = np.tensordot(T, bit_pmf(p0s[pos]), axes=([pos + 1], [0]))
    kept = sorted(keep)
    order = [0] + [1 + kept.index(k) for k in keep]
    return T.transpose(order)


def _check_position(i, m):
    if not 0 <= i < m:
        raise IndexError(f"bit position {i} out of range for m={m}")


def effective_bit_channel(channel, p0s, i):
    """The ``n x 2`` channel seen by bit ``i`` with the other bit pmfs fixed.

    Column ``b`` is the output pmf conditioned on ``B_i = b``.  The entry
    ``p0s[i]`` itself is ignored.
    """
    H = _matrix(channel)
    p0s = check_bits(p0s)
    _check_position(i, p0s.size)
    return _marginalize(H, p0s, (i,))


def effective_pair_channel(channel, p0s, j, i):
    """The ``n x 4`` channel seen jointly by bits ``j`` and ``i``.

    Columns are ordered by the label ``b_j b_i`` = 00, 01, 10, 11.
    """
    H = _matrix(channel)
    p0s = check_bits(p0s)
    _check_position(i, p0s.size)
    _check_position(j, p0s.size)
    if i == j:
        raise ValueError("pair channel needs two distinct bit positions")
    return _marginalize(H, p0s, (j, i)).reshape(H.shape[0], 4)


def bit_cost(w, p0s, i):
    """Symbol costs seen by bit ``i``: ``w_b = E[w | B_i = b]``."""
    w = np.asarray(w, dtype=float)
    return effective_bit_channel(w[None, :], p0s, i)[0]


def conditional_entropy_bit(hi, p0):
    """H(Y | B_i) for the effective bit channel ``hi`` and ``P(B_i = 0) = p0``."""
    e = column_entropies(hi)
    return float(p0 * e[0] + (1.0 - p0) * e[1])


def bit_mutual_informations(channel, p0s):
    """Per-position terms ``I(B_i; Y)``, in bits."""
    H = _matrix(channel)
    p0s = check_bits(p0s)
    hy = entropy(H @ kron_pmf(p0s))
    out = np.empty(p0s.size)
    for i, q in enumerate(p0s):
        out[i] = hy - conditional_entropy_bit(effective_bit_channel(H, p0s, i), q)
    # each term is a mutual information; clip round-off only
    if np.any(out < -1e-10):
        raise ArithmeticError(f"negative bit mutual information: {out}")
    return np.clip(out, 0.0, None)


def bicm_mi(channel, p0s):
    """BICM rate ``sum_i I(B_i; Y)`` for independent bits with ``P(B_i=0) = p0s[i]``."""
    H = _matrix(channel)
    p0s = check_bits(p0s)
    if H.shape[1] != 2**p0s.size:
        raise ValueError(
            f"channel has {H.shape[1]} inputs but {p0s.size} bit pmfs were given"
        )
    return float(bit_mutual_informations(H, p0s).sum())
