"""VaR, RVaR, ES on losses and on monotone contract transforms.

RVaR at window (beta, alpha) averages the quantile function over the
probability interval [1 - beta - alpha, 1 - beta].  Everything here is an
integral on the probability axis, so heavy tails never need truncation:
families with exact quantile primitives are integrated in closed form, and
anything else falls back to Gauss-Legendre quadrature on the quantile.

Window conventions, used throughout the optimizers:
    alpha = 0            ->  VaR at level 1 - beta (the shrinking-window limit)
    beta = 0, alpha = 1-a ->  ES at level a
Degenerate windows arising inside simplex searches (gamma_i, gamma_0 -> 0)
resolve through the same rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .contracts import Indemnity
from .distributions import Distribution, DivergenceError

__all__ = [
    "RiskLevels",
    "DivergenceError",
    "var",
    "rvar",
    "es",
    "measure_of_contract",
    "gauss_legendre_quantile_integral",
    "DEFAULT_NODES",
]

DEFAULT_NODES = 256


@dataclass(frozen=True)
class RiskLevels:
    """An RVaR window: offset beta from the top, window length alpha."""

    beta: float
    alpha: float

    def __post_init__(self) -> None:
        if self.beta < 0.0 or self.alpha < 0.0:
            raise ValueError(f"levels must be nonnegative, got beta={self.beta}, alpha={self.alpha}")
        if self.beta + self.alpha > 1.0 + 1e-12:
            raise ValueError(f"need beta + alpha <= 1, got {self.beta} + {self.alpha}")

    @property
    def is_var(self) -> bool:
        return self.alpha == 0.0

    @property
    def window(self) -> tuple[float, float]:
        """Probability interval the quantile is averaged over."""
        return (max(0.0, 1.0 - self.beta - self.alpha), 1.0 - self.beta)

    @staticmethod
    def var_at(p: float) -> "RiskLevels":
        if not 0.0 < p <= 1.0:
            raise ValueError(f"VaR level must lie in (0, 1], got {p}")
        return RiskLevels(beta=1.0 - p, alpha=0.0)

    @staticmethod
    def es_at(a: float) -> "RiskLevels":
        if not 0.0 <= a < 1.0:
            raise ValueError(f"ES level must lie in [0, 1), got {a}")
        return RiskLevels(beta=0.0, alpha=1.0 - a)


@lru_cache(maxsize=8)
def _gl_rule(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(nodes)
    return x, w


def gauss_legendre_quantile_integral(
    d: Distribution, lo: float, hi: float, nodes: int = DEFAULT_NODES
) -> float:
    """Quadrature fallback for int_lo^hi quantile(u) du.

    Nodes are interior, so an integrable endpoint singularity is tolerated;
    detecting a genuinely divergent integral is the distribution's job via
    its exact primitive.
    """
    if hi <= lo:
        return 0.0
    x, w = _gl_rule(nodes)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    return half * float(sum(wi * d.quantile(mid + half * xi) for xi, wi in zip(x, w)))


def _quantile_integral(d: Distribution, lo: float, hi: float, nodes: int) -> float:
    try:
        return d.quantile_integral(lo, hi)
    except NotImplementedError:
        return gauss_legendre_quantile_integral(d, lo, hi, nodes)


# below this window length, differencing O(1) quantile primitives loses more
# to cancellation (amplified by the 1/alpha normalization) than the quantile
# varies across the window, so the midpoint value is the more exact answer
_WINDOW_EPS = 1e-8


def var(d: Distribution, p: float) -> float:
    return d.quantile(p)


def rvar(d: Distribution, levels: RiskLevels, nodes: int = DEFAULT_NODES) -> float:
    if levels.alpha == 0.0:
        return var(d, 1.0 - levels.beta)
    if levels.alpha < _WINDOW_EPS:
        return var(d, 1.0 - levels.beta - levels.alpha / 2.0)
    lo, hi = levels.window
    return _quantile_integral(d, lo, hi, nodes) / levels.alpha


def es(d: Distribution, a: float, nodes: int = DEFAULT_NODES) -> float:
    if a == 1.0:
        # degenerate: the essential supremum
        return d.quantile(1.0)
    return rvar(d, RiskLevels.es_at(a), nodes)


def _transform_window_integral(
    d: Distribution,
    pieces: tuple[tuple[float, float, float], ...],
    below_slope: float,
    lo: float,
    hi: float,
    nodes: int,
) -> float:
    """int_lo^hi phi(quantile(u)) du for phi affine on the given pieces.

    pieces cover x >= 0; below_slope extends phi to negative losses
    (0 for the ceded side, 1 for the retained side).  Exact given exact
    quantile primitives: the u-axis splits at cdf(knot) values and each
    segment contributes value_anchor*du + slope*quantile_integral.
    Slope-zero segments never touch the quantile integral, which keeps
    capped contracts finite on infinite-mean tails.
    """
    total = 0.0
    u_zero = d.cdf(0.0)
    if lo < u_zero and below_slope != 0.0:
        total += below_slope * _quantile_integral(d, lo, min(hi, u_zero), nodes)
    u_lo = u_zero
    for j, (x0, v0, s) in enumerate(pieces):
        if j > 0:
            u_lo = d.cdf(x0)
        u_hi = d.cdf(pieces[j + 1][0]) if j + 1 < len(pieces) else 1.0
        a, b = max(lo, u_lo), min(hi, u_hi)
        if b <= a:
            continue
        c = v0 - s * x0
        if c != 0.0:
            total += c * (b - a)
        if s != 0.0:
            total += s * _quantile_integral(d, a, b, nodes)
    return total


def measure_of_contract(
    d: Distribution,
    f: Indemnity,
    levels: RiskLevels,
    side: str = "ceded",
    nodes: int = DEFAULT_NODES,
) -> float:
    """RVaR of the ceded part f(X) or the retained part X - f(X).

    Both transforms are nondecreasing and continuous (f is 1-Lipschitz with
    f(0) = 0), so their quantiles are the transformed quantiles of X and the
    window integral can be taken segment by segment.
    """
    if side not in ("ceded", "retained"):
        raise ValueError(f"side must be 'ceded' or 'retained', got {side!r}")
    if levels.alpha < _WINDOW_EPS:
        p = 1.0 - levels.beta - levels.alpha / 2.0
        q = d.quantile(p)
        if q <= 0.0:
            # no ceding of a negative loss
            return 0.0 if side == "ceded" else q
        return f.evaluate(q) if side == "ceded" else f.retained(q)
    lo, hi = levels.window
    pieces = f.pieces()
    if side == "retained":
        pieces = tuple((x0, x0 - v0, 1.0 - s) for x0, v0, s in pieces)
        below = 1.0
    else:
        below = 0.0
    return _transform_window_integral(d, pieces, below, lo, hi, nodes) / levels.alpha
