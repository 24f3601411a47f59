"""Pooled pricing in the normal limit for many independent risks.

When the reinsurer pools a growing number of independent cessions, the
priced aggregate is asymptotically normal, so the pooled term collapses to
a mean-standard deviation premium: the window average of the standard
normal quantile becomes the loading on sigma.  This module prices that
limit objective, solves the retention thresholds for layer cessions with
caps pinned at the own quantiles, and ships a seeded Monte Carlo harness
that measures how quickly the standardized layered sum actually
normalizes.

Retention solving follows the stationarity condition of the limit
objective

    F(a) = sum_i (a_i + w_i(a_i)) + z * sqrt(sum_j (v_j(a_j) - w_j(a_j)^2))

with w_i the layer mean above a_i, v_i the matching second moment and
z the normal quantile of the pooled level: the i-th retention is the
smallest point where z * w_i no longer exceeds the standard deviation
term.  Coupled across insurers through that denominator, the thresholds
are swept Gauss-Seidel style with a bisection per coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import Distribution, _norm_cdf, _norm_pdf, _norm_quantile
from .contracts import Indemnity, LayerGB, check_admissible
from .objectives import ceded_mean, ceded_second_moment
from .risk_measures import (
    DEFAULT_NODES,
    RiskLevels,
    _WINDOW_EPS,
    measure_of_contract,
)

__all__ = [
    "PoolScenario",
    "RetentionSolution",
    "normal_window_loading",
    "objective_mean_std",
    "objective_mean_std_layers",
    "optimal_retentions",
    "clt_check",
]

# counter-based generator used by every Monte Carlo entry point; a plain
# integer seed fully determines the stream regardless of draw batching
MC_BIT_GENERATOR = np.random.Philox

_SWEEP_TOL = 1e-10
_MAX_SWEEPS = 200
_FALLBACK_GRID = 101


@dataclass(frozen=True)
class PoolScenario:
    """n insurers passing independent risks to one pooling reinsurer.

    marginals and insurer_levels broadcast: a single distribution or level
    pair stands for all n insurers.  Finite variance is required of every
    marginal; the normal limit has nothing to say otherwise.
    """

    n: int
    marginals: tuple[Distribution, ...]
    insurer_levels: tuple[RiskLevels, ...]
    reinsurer_levels: RiskLevels

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("need at least one insurer")
        marginals = self.marginals
        if isinstance(marginals, Distribution):
            marginals = (marginals,) * self.n
        elif len(tuple(marginals)) == 1:
            marginals = tuple(marginals) * self.n
        levels = self.insurer_levels
        if isinstance(levels, RiskLevels):
            levels = (levels,) * self.n
        elif len(tuple(levels)) == 1:
            levels = tuple(levels) * self.n
        object.__setattr__(self, "marginals", tuple(marginals))
        object.__setattr__(self, "insurer_levels", tuple(levels))
        if len(self.marginals) != self.n:
            raise ValueError(f"{len(self.marginals)} marginals for n={self.n}")
        if len(self.insurer_levels) != self.n:
            raise ValueError(f"{len(self.insurer_levels)} level pairs for n={self.n}")
        for i, d in enumerate(self.marginals):
            if math.isinf(d.variance()):
                raise ValueError(f"marginal {i} has infinite variance")


def _phi_at(p: float) -> float:
    # standard normal density at the p-quantile; vanishes in both tails
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return _norm_pdf(_norm_quantile(p))


def normal_window_loading(beta: float, alpha: float) -> float:
    """Window average of the standard normal quantile over [1-b-a, 1-b].

    The closed form is the density difference at the window ends divided
    by the window length; microscopic windows switch to the midpoint
    quantile for the same cancellation reason as the risk measures do.
    """
    if not 0.0 <= beta < beta + alpha <= 1.0:
        raise ValueError(f"need 0 <= beta < beta+alpha <= 1, got ({beta}, {alpha})")
    if alpha < _WINDOW_EPS:
        return _norm_quantile(1.0 - beta - alpha / 2.0)
    return (_phi_at(1.0 - beta - alpha) - _phi_at(1.0 - beta)) / alpha


def _loading(levels: RiskLevels) -> float:
    if levels.alpha == 0.0:
        return _norm_quantile(1.0 - levels.beta)
    return normal_window_loading(levels.beta, levels.alpha)


def objective_mean_std(
    s: PoolScenario, contracts, nodes: int = DEFAULT_NODES
) -> float:
    """Retained windows plus the mean-standard deviation pooled premium."""
    contracts = tuple(contracts)
    if len(contracts) != s.n:
        raise ValueError(f"{s.n} marginals but {len(contracts)} contracts")
    load = _loading(s.reinsurer_levels)
    total = 0.0
    var_sum = 0.0
    for d, f, lv in zip(s.marginals, contracts, s.insurer_levels):
        total += measure_of_contract(d, f, lv, side="retained", nodes=nodes)
        m1 = ceded_mean(d, f, nodes)
        total += m1
        var_sum += max(0.0, ceded_second_moment(d, f, nodes) - m1 * m1)
    return total + load * math.sqrt(var_sum)


def objective_mean_std_layers(s: PoolScenario, a, b, nodes: int = DEFAULT_NODES) -> float:
    """The limit objective on layer cessions; exact through layer moments."""
    a, b = tuple(a), tuple(b)
    if len(a) != s.n or len(b) != s.n:
        raise ValueError(f"need {s.n} retentions and caps, got {len(a)} and {len(b)}")
    verdict = check_admissible(tuple(zip(a, b)), "A1")
    if not verdict:
        raise ValueError(verdict.reason)
    return objective_mean_std(s, tuple(LayerGB(lo, hi) for lo, hi in zip(a, b)), nodes)


@dataclass(frozen=True)
class RetentionSolution:
    a: tuple[float, ...]
    b: tuple[float, ...]
    objective: float
    converged: bool
    sweeps: int


def _var_levels(s: PoolScenario) -> tuple[float, ...]:
    for i, lv in enumerate(s.insurer_levels):
        if lv.alpha != 0.0:
            raise ValueError(
                f"retention thresholds hold at point levels; insurer {i} "
                "carries a window (build levels with RiskLevels.var_at)"
            )
    if s.reinsurer_levels.alpha != 0.0:
        raise ValueError("retention thresholds hold at a point pooled level")
    return tuple(1.0 - lv.beta for lv in s.insurer_levels)


def optimal_retentions(s: PoolScenario) -> RetentionSolution:
    """Smallest retentions whose layer keeps the loaded deviation in check.

    Caps are pinned at the own quantiles first; each Gauss-Seidel sweep
    bisects one retention against the others until the largest move falls
    below 1e-10.  A joint grid (101 per axis, n <= 3) backs up the rare
    non-convergent sweep; the flag reports which path produced the result.
    """
    own = _var_levels(s)
    pooled = 1.0 - s.reinsurer_levels.beta
    caps = tuple(d.quantile(lv) for d, lv in zip(s.marginals, own))
    z = _norm_quantile(pooled)

    def w(i: int, x: float) -> float:
        return s.marginals[i].layer_mean(x, caps[i])

    def v(i: int, x: float) -> float:
        return s.marginals[i].layer_second_moment_part(x, caps[i])

    def objective(a: tuple[float, ...]) -> float:
        spread = sum(max(0.0, v(j, x) - w(j, x) ** 2) for j, x in enumerate(a))
        return sum(a) + sum(w(j, x) for j, x in enumerate(a)) + z * math.sqrt(spread)

    if z <= 0.0:
        # nonpositive loading never rewards a retention
        a0 = (0.0,) * s.n
        return RetentionSolution(a0, caps, objective(a0), True, 0)

    def margin(a: list[float], i: int, x: float) -> float:
        spread = 0.0
        for j in range(s.n):
            xj = x if j == i else a[j]
            spread += max(0.0, v(j, xj) - w(j, xj) ** 2)
        return math.sqrt(spread) - z * w(i, x)

    a = [0.0] * s.n
    converged = False
    sweeps = 0
    for sweeps in range(1, _MAX_SWEEPS + 1):
        biggest = 0.0
        for i in range(s.n):
            if margin(a, i, 0.0) >= 0.0:
                new = 0.0
            else:
                lo, hi = 0.0, caps[i]
                for _ in range(100):
                    mid = 0.5 * (lo + hi)
                    if margin(a, i, mid) >= 0.0:
                        hi = mid
                    else:
                        lo = mid
                new = hi
            biggest = max(biggest, abs(new - a[i]))
            a[i] = new
        if biggest < _SWEEP_TOL:
            converged = True
            break

    best = tuple(a)
    value = objective(best)
    if not converged and s.n <= 3:
        axes = [np.linspace(0.0, c, _FALLBACK_GRID) for c in caps]
        for point in np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, s.n):
            cand = tuple(float(x) for x in point)
            got = objective(cand)
            if got < value - 1e-15:
                best, value = cand, got
    return RetentionSolution(best, caps, value, converged, sweeps)


def _vector_ceded(f: Indemnity, x: np.ndarray) -> np.ndarray:
    # exact vector evaluation off the contract's linear pieces; both end
    # pieces extend as affine maps, so a marginal with mass below the first
    # knot is ceded through the same line (inert for loss distributions)
    pieces = f.pieces()
    xs = np.array([p[0] for p in pieces])
    ys = np.array([p[1] for p in pieces])
    out = np.interp(x, xs, ys)
    out += pieces[-1][2] * np.maximum(0.0, x - xs[-1])
    out += pieces[0][2] * np.minimum(0.0, x - xs[0])
    return out


def clt_check(
    d: Distribution,
    f: Indemnity,
    n: int,
    sample_size: int,
    seed: int,
    nodes: int = DEFAULT_NODES,
) -> float:
    """Kolmogorov-Smirnov distance of the standardized ceded sum.

    Standardization uses the exact layer moments, never sample estimates;
    the stream comes from a counter-based generator so the distance is a
    pure function of (d, f, n, sample_size, seed).  Moments carry the same
    left extension as the sampler, so a marginal with negative support
    (Normal, say) is standardized consistently.
    """
    if n < 1 or sample_size < 1:
        raise ValueError("need n >= 1 and sample_size >= 1")
    m1 = ceded_mean(d, f, nodes)
    m2 = ceded_second_moment(d, f, nodes)
    u0 = d.cdf(0.0)
    s0 = f.pieces()[0][2]
    if u0 > 0.0 and s0 != 0.0:
        m1 += s0 * d.quantile_integral(0.0, u0)
        m2 += s0 * s0 * d.quantile_square_integral(0.0, u0)
    spread = m2 - m1 * m1
    if not spread > 0.0:
        raise ValueError("the ceded position is degenerate; nothing to standardize")
    rng = np.random.Generator(MC_BIT_GENERATOR(seed))
    sums = np.zeros(sample_size)
    for _ in range(n):
        sums += _vector_ceded(f, d.quantiles(rng.random(sample_size)))
    t = np.sort((sums - n * m1) / math.sqrt(n * spread))
    gauss = np.array([_norm_cdf(x) for x in t])
    steps = np.arange(1, sample_size + 1) / sample_size
    return float(np.maximum(steps - gauss, gauss - (steps - 1.0 / sample_size)).max())
