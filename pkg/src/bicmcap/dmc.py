"""Discrete memoryless channels and the entropy primitives built on them.

A channel is stored as a column-stochastic matrix ``H`` with one row per
output symbol and one column per input symbol, so that the output pmf for
an input pmf ``p`` is ``H @ p``.  All information quantities are in bits.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import entr, logsumexp

__all__ = [
    "ConvergenceError",
    "Dmc",
    "BlahutArimotoResult",
    "check_pmf",
    "output_pmf",
    "entropy",
    "column_entropies",
    "mutual_information",
    "blahut_arimoto",
    "load_matrix",
    "save_matrix",
]

PMF_TOL = 1e-12
LN2 = np.log(2.0)


class ConvergenceError(RuntimeError):
    """Raised when an iterative solver hits its iteration cap.

    The best iterate found so far is attached as ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


def check_pmf(p, tol=PMF_TOL, name="pmf"):
    """Return ``p`` as a float array after checking it is a probability vector."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError(f"{name} must be a non-empty vector, got shape {p.shape}")
    if np.any(p < 0) or np.any(p > 1):
        raise ValueError(f"{name} has entries outside [0, 1]")
    if abs(p.sum() - 1.0) > tol:
        raise ValueError(f"{name} sums to {p.sum()!r}, not 1")
    return p


@dataclass(frozen=True)
class Dmc:
    """Column-stochastic channel matrix with ``2**m`` inputs.

    Parameters
    ----------
    transitions : array_like, shape (n, M)
        ``transitions[k, j]`` is P(Y = k | X = j).  Columns must sum to one
        within 1e-12; they are never renormalized here.
    """

    transitions: np.ndarray = field(repr=False)

    def __post_init__(self):
        H = np.array(self.transitions, dtype=float)
        if H.ndim != 2:
            raise ValueError(f"transition matrix must be 2-D, got shape {H.shape}")
        n, M = H.shape
        if n < 1 or M < 2 or M & (M - 1):
            raise ValueError(
                f"input alphabet size must be a power of two >= 2, got {M}"
            )
        if np.any(~np.isfinite(H)) or np.any(H < 0) or np.any(H > 1):
            raise ValueError("transition probabilities must lie in [0, 1]")
        sums = H.sum(axis=0)
        bad = np.flatnonzero(np.abs(sums - 1.0) > PMF_TOL)
        if bad.size:
            j = bad[0]
            raise ValueError(
                f"column {j + 1} sums to {sums[j]!r}; channel must be column-stochastic"
            )
        H.setflags(write=False)
        object.__setattr__(self, "transitions", H)

    @property
    def n(self) -> int:
        return self.transitions.shape[0]

    @property
    def M(self) -> int:
        return self.transitions.shape[1]

    @property
    def m(self) -> int:
        return self.M.bit_length() - 1

    def __repr__(self):
        return f"Dmc(n={self.n}, M={self.M})"


def _matrix(channel):
    return channel.transitions if isinstance(channel, Dmc) else np.asarray(channel, float)


def output_pmf(channel, p):
    """Output distribution ``r = H p``."""
    H = _matrix(channel)
    p = check_pmf(p, name="input pmf")
    if p.size != H.shape[1]:
        raise ValueError(
            f"input pmf has length {p.size} but the channel has {H.shape[1]} inputs"
        )
    return H @ p


def entropy(p):
    """Shannon entropy in bits, with ``0 log 0 = 0``."""
    p = check_pmf(p)
    return float(entr(p).sum() / LN2)


def column_entropies(H):
    """Entropy in bits of every column of a (sub)stochastic matrix."""
    return entr(np.asarray(H, dtype=float)).sum(axis=0) / LN2


def mutual_information(channel, p):
    """I(X;Y) in bits for input pmf ``p``.

    Computed as ``H(Y) - sum_j p_j H(Y|X=j)``; round-off below zero is
    clamped.
    """
    H = _matrix(channel)
    r = output_pmf(H, p)
    value = entr(r).sum() / LN2 - float(np.dot(p, column_entropies(H)))
    if value < -1e-10:
        raise ArithmeticError(f"mutual information came out negative: {value}")
    return max(float(value), 0.0)


@dataclass
class BlahutArimotoResult:
    capacity: float
    input: np.ndarray
    cost: float | None
    lam: float
    iterations: int
    gap: float
    objective_trace: list = field(default_factory=list, repr=False)

    def __iter__(self):
        # allows ``capacity, p = blahut_arimoto(...)``
        return iter((self.capacity, self.input))


def blahut_arimoto(channel, cost=None, lam=None, tol=1e-9, max_iter=100_000):
    """Capacity of a DMC, optionally with a linear input-cost penalty.

    Maximizes ``I(p) - lam * cost @ p`` by the Blahut-Arimoto iteration.
    Iteration stops once the duality gap ``max_j g_j - p @ g`` drops below
    ``tol`` bits, where ``g_j = D(H[:, j] || r) - lam * cost_j``.

    Parameters
    ----------
    channel : Dmc or array_like
        Column-stochastic channel matrix.
    cost : array_like, optional
        Per-input cost vector.
    lam : float, optional
        Nonnegative penalty weight (bits per unit cost).  Requires ``cost``.
    tol : float
        Stopping threshold on the duality gap, in bits.
    max_iter : int
        Iteration cap.

    Returns
    -------
    BlahutArimotoResult
        ``capacity`` is the (unpenalized) mutual information at the returned
        input pmf; unpacks as ``(capacity, input)``.

    Raises
    ------
    ConvergenceError
        If the gap is still above ``tol`` after ``max_iter`` iterations.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if lam is not None and cost is None:
        raise ValueError("lam given without a cost vector")
    H = _matrix(channel)
    n, M = H.shape
    lam = 0.0 if lam is None else float(lam)
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    w = np.zeros(M) if cost is None else np.asarray(cost, dtype=float)
    if w.shape != (M,):
        raise ValueError(f"cost vector has length {w.size}, channel has {M} inputs")

    # sum_k H_kj ln H_kj, the negative column entropies in nats
    neg_col_ent = -entr(H).sum(axis=0)
    penalty = lam * LN2 * w
    # the iterate is kept in the log domain so that no input is ever lost to underflow
    log_p = np.full(M, -np.log(M))
    p = np.exp(log_p)
    trace = []
    for it in range(1, int(max_iter) + 1):
        r = H @ p
        with np.errstate(divide="ignore"):
            log_r = np.where(r > 0, np.log(r), 0.0)
        g = neg_col_ent - H.T @ log_r - penalty
        lower = float(p @ g)
        upper = float(g.max())
        trace.append(lower / LN2)
        gap = (upper - lower) / LN2
        if gap < tol:
            break
        log_p = log_p + g
        log_p -= logsumexp(log_p)
        p = np.exp(log_p)
    else:
        best = BlahutArimotoResult(
            mutual_information(H, p), p, None if cost is None else float(w @ p),
            lam, int(max_iter), gap, trace,
        )
        raise ConvergenceError(
            f"Blahut-Arimoto gap {gap:.3e} > {tol:.1e} after {max_iter} iterations",
            best,
        )
    return BlahutArimotoResult(
        capacity=mutual_information(H, p),
        input=p,
        cost=None if cost is None else float(w @ p),
        lam=lam,
        iterations=it,
        gap=gap,
        objective_trace=trace,
    )


def load_matrix(path):
    """Read a channel matrix file: one output row per line, ``#`` comments.

    Raises ``ValueError`` naming the offending line on malformed input.
    """
    rows = []
    width = None
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            row = [float(tok) for tok in text.split()]
        except ValueError:
            raise ValueError(f"{path}:{lineno}: cannot parse row: {line!r}") from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ValueError(
                f"{path}:{lineno}: expected {width} entries, got {len(row)}: {line!r}"
            )
        rows.append(row)
    if not rows:
        raise ValueError(f"{path}: no matrix rows found")
    return Dmc(np.array(rows))


def save_matrix(channel, path, header=None):
    """Write a channel in the format read by :func:`load_matrix`."""
    H = _matrix(channel)
    lines = []
    if header:
        lines += [f"# {h}" for h in header.splitlines()]
    lines += [" ".join(repr(float(x)) for x in row) for row in H]
    Path(path).write_text("\n".join(lines) + "\n")
