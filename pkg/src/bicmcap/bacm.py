"""Bit-alternating convex-concave maximization of the BICM rate.

The outer loop cycles over bit positions.  For one position ``i`` the
objective, as a function of ``p0 = P(B_i = 0)``, splits into

    m * H(Y)            concave in p0
    - H(Y | B_i)        linear in p0
    - H(Y | B_j), j!=i  convex in p0

and the inner loop repeatedly replaces the convex terms by their tangent
lines at the current iterate and maximizes the resulting concave scalar
function by bisection on its derivative.  An optional linear penalty
``lam * w @ p`` turns the same machinery into a cost-constrained solver.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import entr

from .bicm import (
    bicm_mi,
    bit_cost,
    check_bits,
    effective_bit_channel,
    effective_pair_channel,
    kron_pmf,
    uniform_bits,
)
from .dmc import LN2, _matrix, column_entropies

__all__ = [
    "BacmConfig",
    "SolveTelemetry",
    "CapacityResult",
    "BitSubproblem",
    "taylor_lower_bound_hj",
    "pair_entropy_term",
    "bisection_evaluations",
    "convex_concave_bit",
    "bacm_solve",
    "penalized_objective",
]


@dataclass(frozen=True)
class BacmConfig:
    """Solver settings.

    ``precision_d`` is the half-width of the final bisection bracket for each
    bit probability.  ``starts`` optionally lists starting points (arrays of
    ``P(B_i = 0)``); the best local maximum over all of them is returned.
    """

    precision_d: float = 1e-5
    inner_tol: float = 1e-12
    outer_tol: float = 1e-9
    max_inner: int = 100
    max_outer: int = 200
    starts: tuple | None = None

    def __post_init__(self):
        if self.precision_d <= 0 or self.inner_tol <= 0 or self.outer_tol <= 0:
            raise ValueError("precision and tolerances must be positive")
        if self.max_inner < 1 or self.max_outer < 1:
            raise ValueError("iteration caps must be at least 1")
        if self.starts is not None:
            starts = tuple(np.array(check_bits(s)) for s in self.starts)
            if not starts:
                raise ValueError("starts must not be empty")
            object.__setattr__(self, "starts", starts)


@dataclass
class SolveTelemetry:
    outer_passes: int = 0
    inner_iterations: list = field(default_factory=list)
    derivative_evaluations: int = 0
    bisection_evaluations: list = field(default_factory=list)
    objective_trace: list = field(default_factory=list)
    converged: bool = True


@dataclass
class CapacityResult:
    """Outcome of a BICM solve.

    ``value`` is the unpenalized BICM rate at ``bits``; ``objective`` is
    ``value - lam * realized_cost`` (equal to ``value`` without a cost
    vector).
    """

    value: float
    bits: np.ndarray
    lam: float = 0.0
    realized_cost: float | None = None
    objective: float | None = None
    telemetry: SolveTelemetry | None = None
    flags: tuple = ()

    def __post_init__(self):
        if self.objective is None:
            self.objective = self.value - self.lam * (self.realized_cost or 0.0)


def _xlog2(coef, arg):
    """Elementwise ``coef * log2(arg)`` with ``0 * log 0 = 0``.

    A nonzero coefficient against a zero argument yields ``-inf * sign``.
    """
    coef = np.asarray(coef, dtype=float)
    arg = np.broadcast_to(arg, coef.shape)
    out = np.zeros(coef.shape)
    live = coef != 0
    with np.errstate(divide="ignore"):
        out[live] = coef[live] * np.log2(arg[live])
    return out


def _sum_dominant(values):
    """Sum that tolerates infinities of one sign."""
    values = np.asarray(values, dtype=float).ravel()
    if np.isposinf(values).any() and np.isneginf(values).any():
        raise ArithmeticError("conflicting infinite terms")
    return float(values.sum())


def pair_entropy_term(pair, pj, pi):
    """The convex term ``h^j(p^i) = -H(Y | B_j)`` from a pair channel.

    Parameters
    ----------
    pair : ndarray, shape (n, 4)
        Pair channel with columns ordered ``b_j b_i``.
    pj, pi : float
        ``P(B_j = 0)`` and ``P(B_i = 0)``.
    """
    hj = pair[:, 0::2] * pi + pair[:, 1::2] * (1.0 - pi)
    e = column_entropies(hj)
    return -float(pj * e[0] + (1.0 - pj) * e[1])


def taylor_lower_bound_hj(pair, pj, pi, pi_hat):
    """Tangent of ``h^j`` at ``pi_hat``, evaluated at ``pi``.

    Equals ``sum_b p^j_b sum_k [H^j(pi)]_kb log2 [H^j(pi_hat)]_kb``; it
    touches ``h^j`` at ``pi = pi_hat`` and lies below it elsewhere.
    """
    weights = np.array([pj, 1.0 - pj])
    at = pair[:, 0::2] * pi + pair[:, 1::2] * (1.0 - pi)
    hat = pair[:, 0::2] * pi_hat + pair[:, 1::2] * (1.0 - pi_hat)
    terms = _xlog2(at * weights, hat)
    return _sum_dominant(terms)


class BitSubproblem:
    """Penalized BICM objective as a function of one bit probability.

    Built from the effective bit channel of position ``i``, the pair
    channels ``(j, i)`` for every ``j != i`` and the fixed ``P(B_j = 0)``.

    Parameters
    ----------
    bit_channel : ndarray, shape (n, 2)
    pairs : ndarray, shape (m - 1, n, 4)
    pair_bits : ndarray, shape (m - 1,)
        ``P(B_j = 0)`` for the positions matching ``pairs``.
    m : int
    lam : float
    cost : ndarray, shape (2,), optional
        Bit-level costs ``E[w | B_i = b]``.
    """

    def __init__(self, bit_channel, pairs, pair_bits, m, lam=0.0, cost=None):
        self.bit_channel = np.asarray(bit_channel, dtype=float)
        n = self.bit_channel.shape[0]
        self.pairs = np.asarray(pairs, dtype=float).reshape(-1, n, 4)
        self.pair_bits = np.asarray(pair_bits, dtype=float).reshape(-1)
        self.m = int(m)
        if self.pairs.shape[0] != self.m - 1 or self.pair_bits.size != self.m - 1:
            raise ValueError(f"need {self.m - 1} pair channels for m={self.m}")
        self.lam = float(lam)
        self.cost = np.zeros(2) if cost is None else np.asarray(cost, dtype=float)

        self._col_ent = column_entropies(self.bit_channel)
        self._bit_diff = self.bit_channel[:, 0] - self.bit_channel[:, 1]
        # pair columns grouped by b_j: [..., b_j, b_i=0] and [..., b_j, b_i=1]
        self._pair0 = self.pairs[:, :, 0::2]
        self._pair1 = self.pairs[:, :, 1::2]
        self._pair_w = np.stack([self.pair_bits, 1.0 - self.pair_bits], axis=-1)[
            :, None, :
        ]
        self._slope_cache = {}
        self.derivative_evaluations = 0

    @classmethod
    def from_channel(cls, channel, p0s, i, lam=0.0, w=None):
        H = _matrix(channel)
        p0s = check_bits(p0s)
        m = p0s.size
        others = [j for j in range(m) if j != i]
        pairs = [effective_pair_channel(H, p0s, j, i) for j in others]
        return cls(
            effective_bit_channel(H, p0s, i),
            np.array(pairs).reshape(len(others), H.shape[0], 4),
            p0s[others],
            m,
            lam,
            None if w is None else bit_cost(w, p0s, i),
        )

    # -- pieces -----------------------------------------------------------

    def output_entropy(self, p0):
        r = self.bit_channel @ np.array([p0, 1.0 - p0])
        return float(entr(r).sum() / LN2)

    def conditional_entropy(self, p0):
        return float(p0 * self._col_ent[0] + (1.0 - p0) * self._col_ent[1])

    def penalty(self, p0):
        return self.lam * float(p0 * self.cost[0] + (1.0 - p0) * self.cost[1])

    def convex_terms(self, p0):
        """``sum_j h^j(p0)``, the exact convex part."""
        hj = self._pair0 * p0 + self._pair1 * (1.0 - p0)
        ent = entr(hj).sum(axis=1) / LN2  # (m-1, 2)
        return -float((ent * self._pair_w[:, 0, :]).sum())

    def tangent_terms(self, p0, p0_hat):
        """``sum_j hhat^j(p0, p0_hat)``, the linearized convex part."""
        at = (self._pair0 * p0 + self._pair1 * (1.0 - p0)) * self._pair_w
        hat = self._pair0 * p0_hat + self._pair1 * (1.0 - p0_hat)
        return _sum_dominant(_xlog2(at, hat))

    # -- objective, surrogate, derivative --------------------------------

    def objective(self, p0):
        """True penalized BICM objective with ``P(B_i = 0) = p0``."""
        return (
            self.m * self.output_entropy(p0)
            - self.conditional_entropy(p0)
            + self.convex_terms(p0)
            - self.penalty(p0)
        )

    def surrogate(self, p0, p0_hat):
        """Concave minorant of :meth:`objective` that is tight at ``p0_hat``."""
        return (
            self.m * self.output_entropy(p0)
            - self.conditional_entropy(p0)
            + self.tangent_terms(p0, p0_hat)
            - self.penalty(p0)
        )

    def _tangent_slope(self, p0_hat):
        slope = self._slope_cache.get(p0_hat)
        if slope is None:
            hat = self._pair0 * p0_hat + self._pair1 * (1.0 - p0_hat)
            coef = (self._pair0 - self._pair1) * self._pair_w
            slope = _sum_dominant(_xlog2(coef, hat))
            self._slope_cache = {p0_hat: slope}
        return slope

    def derivative(self, p0, p0_hat):
        """d surrogate / d p0.

        At ``p0`` equal to 0 or 1 this is the one-sided limit and may be
        infinite.  An infinite tangent slope (expansion point on the
        boundary with a vanishing output probability) dominates everything
        else.
        """
        self.derivative_evaluations += 1
        slope = self._tangent_slope(p0_hat)
        if math.isinf(slope):
            return slope
        r = self.bit_channel @ np.array([p0, 1.0 - p0])
        d_out = -_sum_dominant(_xlog2(self._bit_diff, r))
        d_cond = self._col_ent[0] - self._col_ent[1]
        d_pen = self.lam * (self.cost[0] - self.cost[1])
        if math.isinf(d_out):
            return d_out
        return self.m * d_out - d_cond + slope - d_pen

    def maximize(self, p0_hat, d):
        """Maximize the surrogate at ``p0_hat`` over ``p0`` in [0, 1].

        Returns ``(p0, n_bisect)`` where ``n_bisect`` is the number of
        derivative evaluations spent in bisection (0 for a boundary
        solution).
        """
        if self.derivative(0.0, p0_hat) < 0:
            return 0.0, 0
        if self.derivative(1.0, p0_hat) > 0:
            return 1.0, 0
        lo, hi = 0.0, 1.0
        count = 0
        while hi - lo > 2 * d:
            mid = 0.5 * (lo + hi)
            count += 1
            if self.derivative(mid, p0_hat) > 0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi), count


def bisection_evaluations(d):
    """Derivative evaluations of an interior bisection at precision ``d``."""
    return max(0, math.ceil(math.log2(1.0 / (2.0 * d)) - 1e-12))


def penalized_objective(channel, p0s, lam=0.0, w=None):
    value = bicm_mi(channel, p0s)
    if w is None or lam == 0:
        return value
    return value - lam * float(np.dot(w, kron_pmf(p0s)))


def convex_concave_bit(channel, p0s, i, lam=0.0, w=None, config=None, telemetry=None):
    """Maximize the penalized BICM objective over bit ``i`` alone.

    Runs the convex-concave procedure from the current ``p0s[i]``.  Each
    step maximizes a minorant that is tight at the current iterate, so the
    true objective never decreases; a step that would decrease it through
    bisection round-off is rejected and ends the loop.

    Returns
    -------
    p0 : float
        New ``P(B_i = 0)``.
    iterations : int
        Number of surrogate maximizations performed (K).
    """
    config = config or BacmConfig()
    d = config.precision_d
    sub = BitSubproblem.from_channel(channel, p0s, i, lam, w)
    p = float(p0s[i])
    obj = sub.objective(p)
    converged = False
    k = 0
    for k in range(1, config.max_inner + 1):
        new, n_bisect = sub.maximize(p, d)
        if telemetry is not None and n_bisect:
            telemetry.bisection_evaluations.append(n_bisect)
        new_obj = sub.objective(new)
        if new_obj < obj:
            converged = True
            break
        step, gain = abs(new - p), new_obj - obj
        p, obj = new, new_obj
        # with no convex terms the surrogate is exact
        if sub.m == 1 or step < d or gain < config.inner_tol:
            converged = True
            break
    if telemetry is not None:
        telemetry.inner_iterations.append(k)
        telemetry.derivative_evaluations += sub.derivative_evaluations
        telemetry.converged &= converged
    return p, k


def _solve_from(channel, start, lam, w, config):
    p0s = np.array(start, dtype=float)
    m = p0s.size
    tel = SolveTelemetry()
    obj = penalized_objective(channel, p0s, lam, w)
    tel.objective_trace.append(obj)
    converged = False
    for _ in range(config.max_outer):
        tel.outer_passes += 1
        before = obj
        for i in range(m):
            p0s[i], _k = convex_concave_bit(channel, p0s, i, lam, w, config, tel)
            obj = penalized_objective(channel, p0s, lam, w)
            tel.objective_trace.append(obj)
        if obj - before < config.outer_tol:
            converged = True
            break
    tel.converged &= converged
    value = bicm_mi(channel, p0s)
    cost = None if w is None else float(np.dot(w, kron_pmf(p0s)))
    flags = () if tel.converged else ("not_converged",)
    return CapacityResult(value, p0s, float(lam), cost, obj, tel, flags)


def bacm_solve(channel, lam=0.0, w=None, config=None):
    """Local maximum of ``I_bicm(p) - lam * w @ p`` over independent bit pmfs.

    Parameters
    ----------
    channel : Dmc or array_like
        Channel with ``2**m`` inputs.
    lam : float
        Nonnegative weight on the average cost.
    w : array_like, optional
        Positive per-symbol cost vector, required when ``lam > 0``.
    config : BacmConfig, optional

    Returns
    -------
    CapacityResult
        Best result over ``config.starts`` (uniform bits by default).  A
        ``"not_converged"`` flag is set if an iteration cap was reached.
    """
    config = config or BacmConfig()
    H = _matrix(channel)
    M = H.shape[1]
    m = M.bit_length() - 1
    if M != 2**m or m < 1:
        raise ValueError(f"input alphabet size {M} is not a power of two")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if w is not None:
        w = np.asarray(w, dtype=float)
        if w.shape != (M,):
            raise ValueError(f"cost vector has length {w.size}, channel has {M} inputs")
        if np.any(w <= 0):
            raise ValueError("costs must be positive")
    elif lam > 0:
        raise ValueError("a cost vector is required when lam > 0")

    starts = config.starts or (uniform_bits(m),)
    best = None
    for start in starts:
        start = check_bits(start, m)
        result = _solve_from(H, start, lam, w, config)
        if best is None or result.objective > best.objective:
            best = result
    return best
