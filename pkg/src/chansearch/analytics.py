"""Exact recurrences, offspring-law machinery, and theorem-curve formulas.

Everything here is scalar or small-polynomial numerics in doubles: the
blocking-probability recurrence and its fixed-point limit, the exact
expected probe counts of the two search algorithms, the linear upper
bound for global search, the exponential upper and lower bound curves for
local search, iterated offspring generating functions with exact and
Chernoff-style tail evaluators, the candidate-probe payoff distribution,
and the series-composition cost bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import logsumexp

from .errors import SizeLimitError

DEFAULT_MAX_GENERATION = 12

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


def _check_q(q: float) -> float:
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"vacancy probability q={q} outside [0, 1]")
    return float(q)


def _check_k(k: int) -> int:
    if k < 0:
        raise ValueError("k must be nonnegative")
    return int(k)


def blocking_probability(k: int, q: float) -> float:
    """Blocking probability of the depth-``k`` fully parallel graph.

    Iterates the paired-trial offspring map ``x -> (1 - q^2 + q^2 x)^2``
    from 0: the value after ``k`` steps is the extinction probability of
    the induced branching process, i.e. the probability that no all-idle
    source-target path exists.
    """
    _check_k(k)
    _check_q(q)
    c = q * q
    x = 0.0
    for _ in range(k):
        t = 1.0 - c + c * x
        x = t * t
    return x


def linking_probability(k: int, q: float) -> float:
    return 1.0 - blocking_probability(k, q)


def blocking_limit(q: float) -> float:
    """Limit of the blocking probability as the depth grows.

    The smallest nonnegative fixed point of the offspring map: 1 in the
    subcritical range ``q <= 1/sqrt(2)``, else ``(1 - q^2)^2 / q^4``.  At
    ``q = 0`` this is the limit for depth >= 1, not the depth-0 value.
    """
    _check_q(q)
    if q * q <= 0.5:
        return 1.0
    r = (1.0 - q * q) ** 2 / q ** 4
    return r


def exact_cost_bilat(k: int, q: float) -> float:
    """Exact expected probe count of bilateral search on depth ``k``.

    The product recurrence counts (expected halves searched) times
    (expected cost of searching one half), taken with equality because the
    halves are disjoint and identically distributed.
    """
    _check_k(k)
    _check_q(q)
    p = 1.0 - q
    cost = 0.0
    blocked = 0.0  # blocking probability at depth j-1
    c = q * q
    for _ in range(k):
        cost = (1.0 + p + q * p + q * q * blocked) * (1.0 + q + q * q * cost)
        t = 1.0 - c + c * blocked
        blocked = t * t
    return cost


def exact_cost_unilat(k: int, q: float) -> float:
    """Exact expected probe count of unilateral (forward-local) search.

    Identical half-failure factor, but a half's exit link is probed only
    after a successful recursion, so the per-half cost term is
    ``1 + q * (cost + linking probability)`` and the expectation grows
    exponentially in ``k`` for ``1/2 < q < 1``.
    """
    _check_k(k)
    _check_q(q)
    p = 1.0 - q
    cost = 0.0
    blocked = 0.0
    c = q * q
    for _ in range(k):
        cost = (1.0 + p + q * p + q * q * blocked) * (1.0 + q * (cost + (1.0 - blocked)))
        t = 1.0 - c + c * blocked
        blocked = t * t
    return cost


def bound_global_upper(k: int) -> float:
    """Linear upper bound ``4k`` on the expected cost of global search."""
    return 4.0 * _check_k(k)


def bound_local_upper(k: int, q: float) -> float:
    """Upper bound ``4k * max(1, min((2q)^k, 1/q^k))`` for local search."""
    _check_k(k)
    _check_q(q)
    if k == 0:
        return 0.0
    grow = (2.0 * q) ** k
    shrink = math.inf if q == 0.0 else (1.0 / q) ** k
    return 4.0 * k * max(1.0, min(grow, shrink))


def bound_local_lower(k: int, q: float) -> float:
    """Lower bound ``min((2q)^k / k^6, 1 / (k q^k))`` for local search.

    Defined for ``k >= 1`` and ``1/2 < q < 1`` only; outside that range
    the bound does not apply and a ValueError is raised.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if not 0.5 < q < 1.0:
        raise ValueError(f"q={q} outside the open range (1/2, 1)")
    return min((2.0 * q) ** k / k ** 6, 1.0 / (k * q ** k))


# -- offspring distributions ----------------------------------------------


class OffspringLaw(Enum):
    """Per-individual offspring law: two independent trials that each
    succeed with probability q^2 (PAIRED, both twin links idle) or q
    (SINGLE, one link idle)."""

    PAIRED = "paired"
    SINGLE = "single"


@dataclass(frozen=True)
class OffspringDistribution:
    """Exact generation-size distribution of an iterated offspring law;
    ``probs[m]`` is the probability of ``m`` individuals in the given
    generation."""

    probs: np.ndarray
    generation: int
    law: OffspringLaw
    q: float

    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.probs)), self.probs))


def _success_probability(law: OffspringLaw, q: float) -> float:
    return q * q if law is OffspringLaw.PAIRED else q


def offspring_distribution(
    law: OffspringLaw,
    q: float,
    gen: int,
    *,
    max_generation: int = DEFAULT_MAX_GENERATION,
) -> OffspringDistribution:
    """Coefficients of the ``gen``-th iterate of the offspring generating
    function, computed by repeated outer composition and direct polynomial
    squaring (degree ``2**gen``)."""
    _check_q(q)
    if gen < 0:
        raise ValueError("generation must be nonnegative")
    if gen > max_generation:
        raise SizeLimitError(f"generation {gen} exceeds maximum {max_generation}")
    c = _success_probability(law, q)
    coeffs = np.array([0.0, 1.0])  # h_0(x) = x
    for _ in range(gen):
        affine = c * coeffs
        affine[0] += 1.0 - c
        coeffs = np.convolve(affine, affine)
    dist = OffspringDistribution(coeffs, gen, law, float(q))
    total = float(coeffs.sum())
    if not math.isfinite(total) or abs(total - 1.0) > 1e-9 or (coeffs < -1e-15).any():
        raise ArithmeticError(f"offspring distribution failed normalization: sum={total}")
    return dist


_CHERNOFF_POINTS = 1024
_GRID_BELOW = np.geomspace(1e-6, 1.0, _CHERNOFF_POINTS)
_GRID_ABOVE = np.geomspace(1.0, 64.0, _CHERNOFF_POINTS)


def _log_poly(coeffs: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """log(sum_m c_m x^m) evaluated stably for x spanning many decades."""
    mask = coeffs > 0.0
    logc = np.log(coeffs[mask])
    degrees = np.nonzero(mask)[0]
    logx = np.log(xs)
    return logsumexp(logc[None, :] + degrees[None, :] * logx[:, None], axis=1)


def lower_tail(
    law: OffspringLaw,
    q: float,
    gen: int,
    m: float,
    *,
    max_generation: int = DEFAULT_MAX_GENERATION,
) -> tuple[float, float]:
    """(exact, chernoff) for Pr[generation size < m].

    The Chernoff value minimizes ``x**-m * h(x)`` over a fixed log-spaced
    grid of ``x`` in (0, 1]; the exact tail never exceeds it.
    """
    if m < 0:
        raise ValueError("threshold must be nonnegative")
    dist = offspring_distribution(law, q, gen, max_generation=max_generation)
    sizes = np.arange(len(dist.probs))
    exact = float(dist.probs[sizes < m].sum())
    logvals = -m * np.log(_GRID_BELOW) + _log_poly(dist.probs, _GRID_BELOW)
    chernoff = float(np.exp(logvals.min()))
    return exact, chernoff


def upper_tail(
    law: OffspringLaw,
    q: float,
    gen: int,
    m: float,
    *,
    max_generation: int = DEFAULT_MAX_GENERATION,
) -> tuple[float, float]:
    """(exact, chernoff) for Pr[generation size > m], minimizing over x >= 1."""
    if m < 0:
        raise ValueError("threshold must be nonnegative")
    dist = offspring_distribution(law, q, gen, max_generation=max_generation)
    sizes = np.arange(len(dist.probs))
    exact = float(dist.probs[sizes > m].sum())
    logvals = -m * np.log(_GRID_ABOVE) + _log_poly(dist.probs, _GRID_ABOVE)
    chernoff = float(np.exp(logvals.min()))
    return exact, chernoff


# -- candidate-probe payoff ------------------------------------------------


@dataclass(frozen=True)
class PayoffDistribution:
    """Distribution of the payoff ``k^2 (2q)^l`` credited to a candidate
    probe that reveals ``l`` further idle links toward the target; ``l``
    is truncated-geometric with success probability ``q``."""

    values: np.ndarray
    probs: np.ndarray

    def expectation(self) -> float:
        return float(np.dot(self.values, self.probs))


def payoff_distribution(k: int, q: float) -> PayoffDistribution:
    if k < 1:
        raise ValueError("k must be at least 1")
    _check_q(q)
    ells = np.arange(k + 1)
    values = k * k * (2.0 * q) ** ells
    probs = (1.0 - q) * q ** ells.astype(float)
    probs[k] = q ** k
    return PayoffDistribution(values, probs)


def payoff_expectation(k: int, q: float) -> float:
    """Exact expected payoff of one candidate probe; at most ``2 k^3``
    whenever ``2 q^2 <= 1``."""
    return payoff_distribution(k, q).expectation()


def series_cost_bound(k: int, q: float) -> float:
    """Upper bound on the global search cost of the series composition:
    probe the middle link first, then search each half only while the
    outcome is still undecided."""
    _check_k(k)
    _check_q(q)
    linking = 1.0 - blocking_probability(k, q)
    return 1.0 + q * (1.0 + linking) * exact_cost_bilat(k, q)
