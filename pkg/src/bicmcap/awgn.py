"""Equidistant PAM over AWGN as a cost-constrained DMC.

The constellation ``gamma * {-(M-1), ..., -1, 1, ..., M-1}`` is labeled with
the binary reflected Gray code, the channel output is quantized into equal
bins, and the signal power ``E|X|^2 = w @ p`` (unit noise variance) plays
the role of the average cost.  A target SNR is met by bisection over the
power penalty and the scaling ``gamma`` is chosen by golden-section search.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .bacm import BacmConfig, CapacityResult, bacm_solve
from .baseline import cm_capacity, uniform_bicm
from .bicm import brgc_permutation, kron_pmf
from .dmc import ConvergenceError, Dmc

__all__ = [
    "Constellation",
    "DiscretizationRule",
    "build_constellation",
    "discretize_awgn",
    "snr_of",
    "db_to_linear",
    "linear_to_db",
    "uniform_scaling",
    "awgn_capacity",
    "solve_lambda_for_snr",
    "golden_section_max",
    "AwgnCapacity",
    "bicm_capacity_awgn",
    "cm_capacity_awgn",
    "uniform_bicm_awgn",
]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Constellation:
    """``points[k]`` is the amplitude whose Gray label is the binary expansion of ``k``."""

    m: int
    gamma: float
    points: np.ndarray = field(repr=False)
    costs: np.ndarray = field(repr=False)

    @property
    def M(self):
        return 2**self.m


@dataclass(frozen=True)
class DiscretizationRule:
    """``n_out`` equal bins over ``[min x - span, max x + span]`` (noise std 1)."""

    n_out: int = 200
    sigma_span: float = 6.0

    def __post_init__(self):
        if self.n_out < 2:
            raise ValueError("need at least two output bins")
        if self.sigma_span <= 0:
            raise ValueError("sigma_span must be positive")


def build_constellation(m, gamma):
    if m < 1:
        raise ValueError("m must be positive")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    M = 2**m
    amplitudes = gamma * (2.0 * np.arange(M) - (M - 1))
    points = np.empty(M)
    points[brgc_permutation(m)] = amplitudes
    return Constellation(m, float(gamma), points, points**2)


def discretize_awgn(c, rule=DiscretizationRule()):
    """Transition matrix of ``Y = X + Z``, ``Z ~ N(0, 1)``, quantized to bins.

    Bin masses are Gaussian CDF differences, taken on the side of the mean
    where they are not subject to cancellation.  Each column is then
    rescaled by its in-range mass so that the matrix is exactly
    column-stochastic.
    """
    edges = np.linspace(
        c.points.min() - rule.sigma_span, c.points.max() + rule.sigma_span, rule.n_out + 1
    )
    z = edges[:, None] - c.points[None, :]
    lo, hi = z[:-1], z[1:]
    right = lo >= 0
    mass = np.where(right, ndtr(-lo) - ndtr(-hi), ndtr(hi) - ndtr(lo))
    # a bin straddling the mean: split at the mean to stay accurate
    straddle = (lo < 0) & (hi > 0)
    mass = np.where(straddle, (0.5 - ndtr(lo)) + (0.5 - ndtr(-hi)), mass)
    mass = np.clip(mass, 0.0, None)
    mass /= mass.sum(axis=0, keepdims=True)
    return Dmc(mass)


def snr_of(c, p0s):
    """Average power ``w @ kron(p)`` of the constellation under the bit pmfs."""
    return float(c.costs @ kron_pmf(p0s))


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def linear_to_db(snr):
    return 10.0 * math.log10(snr)


def uniform_scaling(m, snr):
    """Scaling at which uniform signalling has average power ``snr``."""
    M = 2**m
    return math.sqrt(3.0 * snr / (M * M - 1))


def awgn_capacity(snr):
    """``0.5 log2(1 + snr)`` bits per real dimension."""
    if snr < 0:
        raise ValueError("snr must be nonnegative")
    return 0.5 * math.log2(1.0 + snr)


def solve_lambda_for_snr(
    m, gamma, snr, rule=DiscretizationRule(), config=None, rtol=1e-4, max_bisect=60,
    lam_hint=None, channel=None,
):
    """Find the power penalty whose BACM optimum has average power ``snr``.

    The bracket starts at ``[0, 1]`` (or around ``lam_hint``), the upper
    end is doubled until the realized power drops to the target, and the
    bracket is then bisected until the power is within ``rtol`` of the
    target.

    Returns
    -------
    lam : float
    result : CapacityResult
        Flags: ``"below_target"`` if even ``lam = 0`` uses less power than
        the target; ``"non_monotone_cost"`` if the realized power was seen
        to increase with ``lam``; ``"cost_tolerance_missed"`` if bisection
        ran out of steps, in which case the best result with power at most
        the target is returned.
    """
    c = build_constellation(m, gamma)
    if snr < c.costs.min():
        raise ValueError(
            f"power {snr} is below the weakest symbol power {c.costs.min()} at gamma={gamma}"
        )
    H = channel if channel is not None else discretize_awgn(c, rule)
    config = config or BacmConfig()
    flags = set()
    history = []

    def solve(lam):
        res = bacm_solve(H, lam, c.costs, config)
        history.append((lam, res.realized_cost))
        return res

    def done(lam, res):
        ordered = sorted(history)
        costs = [cost for _, cost in ordered]
        if any(b > a * (1 + 1e-9) for a, b in zip(costs, costs[1:])):
            flags.add("non_monotone_cost")
        res.flags = tuple(sorted(set(res.flags) | flags))
        return lam, res

    def close(res):
        return abs(res.realized_cost - snr) <= rtol * snr

    zero = solve(0.0)
    if close(zero):
        return done(0.0, zero)
    if zero.realized_cost < snr:
        flags.add("below_target")
        return done(0.0, zero)

    # lo: power above target, hi: power below target
    lo, lo_res = 0.0, zero
    hi, hi_res = None, None
    trial = [0.8 * lam_hint, 1.25 * lam_hint] if lam_hint else [1.0]
    while True:
        for lam in trial:
            res = solve(lam)
            if close(res):
                return done(lam, res)
            if res.realized_cost > snr:
                if lam > lo:
                    lo, lo_res = lam, res
            elif hi is None or lam < hi:
                hi, hi_res = lam, res
        if hi is not None:
            break
        if lo > 1e12:
            raise RuntimeError(f"power {snr} not reachable at gamma={gamma}")
        trial = [max(2.0 * lo, 1.0)]
    for _ in range(max_bisect):
        mid = 0.5 * (lo + hi)
        res = solve(mid)
        if close(res):
            return done(mid, res)
        if res.realized_cost > snr:
            lo, lo_res = mid, res
        else:
            hi, hi_res = mid, res
    flags.add("cost_tolerance_missed")
    return done(hi, hi_res)


def golden_section_max(f, a, b, tol):
    """Maximize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``.

    Every evaluated point is remembered and the best one is returned.
    """
    seen = {}

    def F(x):
        if x not in seen:
            seen[x] = f(x)
        return seen[x]

    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = F(x1), F(x2)
    while b - a > tol:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = F(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = F(x2)
    x = max(seen, key=lambda k: seen[k])
    return x, seen[x]


@dataclass
class AwgnCapacity:
    value: float
    gamma: float
    lam: float
    result: CapacityResult | None
    evaluations: list = field(default_factory=list, repr=False)
    flags: tuple = ()


def _gamma_search(m, snr, evaluate, gamma_grid, gamma_rtol):
    if gamma_grid is not None:
        gamma_grid = list(gamma_grid)
        if not gamma_grid:
            raise ValueError("gamma_grid must not be empty")
        values = [evaluate(g) for g in gamma_grid]
        best = int(np.argmax(values))
        return gamma_grid[best], values[best]
    gu = uniform_scaling(m, snr)
    # the uniform scaling is always a candidate, so the search can only improve on it
    seed = evaluate(gu)
    gamma, value = golden_section_max(evaluate, gu / 4.0, 4.0 * gu, gamma_rtol * gu)
    return (gamma, value) if value >= seed else (gu, seed)


def bicm_capacity_awgn(
    m, snr, gamma_grid=None, rule=DiscretizationRule(), config=None, gamma_rtol=1e-4,
    rtol=1e-4,
):
    """BICM capacity of Gray-labeled ``2**m``-PAM at average power ``snr``.

    For each scaling the power penalty is tuned so that the optimized bit
    pmfs meet the power target; the scaling with the largest BICM rate
    wins.  ``gamma_grid`` replaces the golden-section search over
    ``[gamma_u / 4, 4 gamma_u]`` (``gamma_u`` is the uniform-signalling
    scaling) by an explicit candidate list.
    """
    if snr <= 0:
        raise ValueError("snr must be positive")
    runs = {}
    last_lam = [None]

    def evaluate(gamma):
        if gamma * gamma > snr:
            return -np.inf
        lam, res = solve_lambda_for_snr(
            m, gamma, snr, rule, config, rtol=rtol, lam_hint=last_lam[0]
        )
        if lam > 0:
            last_lam[0] = lam
        runs[gamma] = (lam, res)
        return res.value

    gamma, value = _gamma_search(m, snr, evaluate, gamma_grid, gamma_rtol)
    lam, res = runs[gamma]
    flags = set()
    for _, (_, r) in runs.items():
        flags.update(f for f in r.flags if f != "below_target")
    flags.update(res.flags)
    evaluations = [(g, l, r.value, r.realized_cost) for g, (l, r) in sorted(runs.items())]
    return AwgnCapacity(value, gamma, lam, res, evaluations, tuple(sorted(flags)))


def cm_capacity_awgn(
    m, snr, rule=DiscretizationRule(), gamma_grid=None, gamma_rtol=1e-4, tol=1e-7
):
    """CM capacity of ``2**m``-PAM: best input pmf and scaling at power ``<= snr``.

    ``tol`` is the Blahut-Arimoto duality-gap threshold in bits.  A scaling
    at which Blahut-Arimoto does not converge is skipped and the result is
    flagged ``"cm_not_converged"``.
    """
    if snr <= 0:
        raise ValueError("snr must be positive")
    runs = {}
    flags = set()

    def evaluate(gamma):
        if gamma * gamma > snr:
            return -np.inf
        c = build_constellation(m, gamma)
        try:
            val = cm_capacity(discretize_awgn(c, rule), c.costs, snr, tol=tol)
        except ConvergenceError:
            flags.add("cm_not_converged")
            return -np.inf
        runs[gamma] = val
        return val

    gamma, value = _gamma_search(m, snr, evaluate, gamma_grid, gamma_rtol)
    return AwgnCapacity(
        value, gamma, float("nan"), None, sorted(runs.items()), tuple(sorted(flags))
    )


def uniform_bicm_awgn(m, snr, rule=DiscretizationRule()):
    """BICM rate with uniform bits; the scaling is fixed by ``snr``."""
    c = build_constellation(m, uniform_scaling(m, snr))
    return uniform_bicm(discretize_awgn(c, rule))
