"""Total-cost objectives for reinsurance design and their minimizers.

The setting: n insurers each cede part of a loss X_i to one reinsurer.
Insurer i prices its retained position with its own RVaR (or VaR) window;
the reinsurer prices the pooled ceded risk at its window, under one of
three dependence regimes for the pool: the worst coupling consistent with
the marginals, the comonotonic coupling, or independence.  Minimizing the
sum of all positions is the same problem as finding a Pareto-optimal
design, so everything here reports sums.

The minimizers lean on two structural facts instead of brute force:

* Caps never pay to exceed the insurer's own value-at-risk, so the
  VaR-mode searches fix b_i there and move only the retentions.
* At a fixed reinsurer window, the proportional families are linear in
  their share parameters, so the per-insurer inner problem collapses to a
  one-dimensional deductible search over {keep everything, cede a stop
  loss above b}.

Optima are frequently attained on whole parameter intervals; results
carry the verified flat interval per parameter, not just one point.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .contracts import (
    CappedPropL,
    Indemnity,
    LayerGB,
    PropExcessR,
    ShiftedPropH,
    check_admissible,
)
from .distributions import Distribution, DivergenceError, Normal, from_dict as distribution_from_dict
from .risk_measures import DEFAULT_NODES, RiskLevels, measure_of_contract, rvar
from .search import (
    SearchConfig,
    coordinate_descent_box,
    expand_flat_interval,
    grid,
    minimize_1d,
    scan_is_flat,
)
from .worst_case import SimplexPoint, solve_scaled_simplex

__all__ = [
    "MODES",
    "REGIMES",
    "OBJECTIVES",
    "Scenario",
    "OptimizeResult",
    "BoundaryCertificate",
    "objective_layers_es",
    "objective_prop_excess_rvar",
    "objective_layers_var_simplex",
    "objective_capped_prop_var",
    "objective_shifted_prop_var",
    "objective_layers_var_two",
    "objective_var_regime",
    "total_risk",
    "ceded_mean",
    "ceded_second_moment",
    "caps_at_var",
    "boundary_split_certificate",
    "minimize",
]

MODES = ("RVaR", "VaR")
REGIMES = ("WorstCase", "Comonotonic", "IID")

_STD_NORMAL = Normal(0.0, 1.0)

# deductible grids stop at this upper quantile; beyond it every family's
# gain term is indistinguishable from the zero contract at solver tolerance
_DEDUCTIBLE_TOP = 1.0 - 1e-6


@dataclass(frozen=True)
class Scenario:
    """One pricing problem: marginals, per-party levels, mode, and regime.

    In RVaR mode every RiskLevels is a genuine window (beta, alpha).  In
    VaR mode all windows are zero-length and the plain level p lives in
    RiskLevels.var_at(p) form, so evaluation code never branches on mode
    to interpret a level.
    """

    marginals: tuple[Distribution, ...]
    insurer_levels: tuple[RiskLevels, ...]
    reinsurer_levels: RiskLevels
    mode: str
    dependence: str = "WorstCase"

    def __post_init__(self) -> None:
        object.__setattr__(self, "marginals", tuple(self.marginals))
        object.__setattr__(self, "insurer_levels", tuple(self.insurer_levels))
        if not self.marginals:
            raise ValueError("need at least one insurer")
        if len(self.insurer_levels) != len(self.marginals):
            raise ValueError(
                f"{len(self.marginals)} marginals but {len(self.insurer_levels)} insurer levels"
            )
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.dependence not in REGIMES:
            raise ValueError(f"dependence must be one of {REGIMES}, got {self.dependence!r}")
        if self.mode == "VaR":
            for L in (*self.insurer_levels, self.reinsurer_levels):
                if L.alpha != 0.0:
                    raise ValueError(
                        "VaR mode carries zero-window levels; build them with RiskLevels.var_at"
                    )

    @property
    def n(self) -> int:
        return len(self.marginals)

    def insurer_var_level(self, i: int) -> float:
        return 1.0 - self.insurer_levels[i].beta

    @property
    def reinsurer_var_level(self) -> float:
        return 1.0 - self.reinsurer_levels.beta

    def to_dict(self) -> dict:
        def enc(L: RiskLevels):
            if self.mode == "VaR":
                return 1.0 - L.beta
            return {"beta": L.beta, "alpha": L.alpha}

        return {
            "n": self.n,
            "mode": self.mode,
            "dependence": self.dependence,
            "marginals": [d.to_dict() for d in self.marginals],
            "insurer_levels": [enc(L) for L in self.insurer_levels],
            "reinsurer_levels": enc(self.reinsurer_levels),
        }

    @staticmethod
    def from_dict(data: dict) -> "Scenario":
        try:
            mode = data["mode"]
            margs = tuple(distribution_from_dict(m) for m in data["marginals"])
            raw_ins = data["insurer_levels"]
            raw_re = data["reinsurer_levels"]
        except (TypeError, KeyError) as exc:
            raise ValueError(f"scenario record is missing {exc}") from None

        def dec(raw) -> RiskLevels:
            # window records are accepted in either mode; the VaR-mode
            # zero-window invariant is enforced by the constructor
            if isinstance(raw, dict):
                try:
                    return RiskLevels(beta=float(raw["beta"]), alpha=float(raw["alpha"]))
                except KeyError as exc:
                    raise ValueError(f"level record is missing {exc}") from None
            if mode == "VaR":
                return RiskLevels.var_at(float(raw))
            raise ValueError(
                f"RVaR-mode levels need beta/alpha records, got {raw!r}"
            )

        s = Scenario(
            marginals=margs,
            insurer_levels=tuple(dec(r) for r in raw_ins),
            reinsurer_levels=dec(raw_re),
            mode=mode,
            dependence=data.get("dependence", "WorstCase"),
        )
        if "n" in data and int(data["n"]) != s.n:
            raise ValueError(f"record says n={data['n']} but lists {s.n} marginals")
        return s


@dataclass(frozen=True)
class OptimizeResult:
    """A minimizer's report: one optimal point plus where else it is optimal.

    params holds one tuple per insurer; flat_intervals mirrors that shape
    with a closed [lo, hi] per parameter, verified by sampling.  witness is
    the inner-problem argument (a split point t, a simplex point, or None
    when the objective has no inner problem).
    """

    params: tuple[tuple[float, ...], ...]
    objective: float
    witness: object
    flat_intervals: tuple[tuple[tuple[float, float], ...], ...]
    notes: str = ""

    def to_dict(self) -> dict:
        w = self.witness
        if isinstance(w, SimplexPoint):
            w = {"gamma": list(w.gamma), "total": w.total, "floor": w.floor}
        return {
            "params": [[_enc(x) for x in p] for p in self.params],
            "objective": self.objective,
            "witness": w,
            "flat_intervals": [
                [[_enc(lo), _enc(hi)] for lo, hi in per] for per in self.flat_intervals
            ],
            "notes": self.notes,
        }


@dataclass(frozen=True)
class BoundaryCertificate:
    boundary_only: bool
    reason: str

    def __bool__(self) -> bool:
        return self.boundary_only


def _enc(x: float):
    return "inf" if math.isinf(x) else x


def _expect_mode(s: Scenario, mode: str, what: str) -> None:
    if s.mode != mode:
        raise ValueError(f"{what} needs a {mode}-mode scenario, got {s.mode}")


def _vec(name: str, xs: Sequence[float], n: int) -> tuple[float, ...]:
    out = tuple(float(x) for x in xs)
    if len(out) != n:
        raise ValueError(f"{name} needs one entry per insurer, got {len(out)} for n={n}")
    return out


def _require(params, domain: str) -> None:
    verdict = check_admissible(params, domain)
    if not verdict:
        raise ValueError(verdict.reason)


def _check_gamma(gamma: SimplexPoint, n: int, total: float, floor: float) -> None:
    if len(gamma.parts) != n:
        raise ValueError(f"gamma has {len(gamma.parts)} offsets for {n} insurers")
    if abs(gamma.total - total) > 1e-9:
        raise ValueError(f"gamma lives on total {gamma.total:g}, this scenario needs {total:g}")
    if gamma.gamma0 < floor - 1e-9:
        raise ValueError(f"shared window {gamma.gamma0:g} is below its floor {floor:g}")


def _gamma_window(gamma: SimplexPoint, i: int) -> RiskLevels:
    return RiskLevels(beta=gamma.parts[i], alpha=gamma.gamma0)


def _safe_measure(d: Distribution, f: Indemnity, levels: RiskLevels, nodes: int) -> float:
    try:
        return measure_of_contract(d, f, levels, nodes=nodes)
    except DivergenceError:
        return math.inf


# ---------------------------------------------------------------------------
# objective evaluators


def objective_layers_es(s: Scenario, a: Sequence[float], b: Sequence[float]) -> float:
    """Layer cessions priced by the reinsurer's tail mean.

    Per insurer: own-window RVaR of the loss, minus the same window applied
    to the ceded layer, plus the pooled expected shortfall of the layer.
    The pooled term is additive because layers of comonotone-ordered losses
    are comonotone and the tail mean is the worst coupling's price anyway.
    """
    _expect_mode(s, "RVaR", "the layered tail-mean objective")
    if s.reinsurer_levels.beta != 0.0:
        raise ValueError("tail-mean pricing needs a zero reinsurer offset")
    pairs = list(zip(_vec("a", a, s.n), _vec("b", b, s.n)))
    _require(pairs, "A1")
    total = 0.0
    for d, L, (ai, bi) in zip(s.marginals, s.insurer_levels, pairs):
        g = LayerGB(ai, bi)
        total += (
            rvar(d, L)
            - measure_of_contract(d, g, L)
            + measure_of_contract(d, g, s.reinsurer_levels)
        )
    return total


def objective_prop_excess_rvar(
    s: Scenario,
    a: Sequence[float],
    b: Sequence[float],
    c: Sequence[float],
    gamma: SimplexPoint,
) -> float:
    """Quota share plus excess-of-loss, with the pool split by gamma.

    The reinsurer's worst-case window decomposes into one sub-window per
    insurer: a shared length gamma_0 at per-insurer offsets gamma_i.  The
    shared length never drops below the reinsurer's own window.
    """
    _expect_mode(s, "RVaR", "the proportional-excess objective")
    trips = list(zip(_vec("a", a, s.n), _vec("b", b, s.n), _vec("c", c, s.n)))
    _require(trips, "A2")
    _check_gamma(gamma, s.n, s.reinsurer_levels.beta + s.reinsurer_levels.alpha, s.reinsurer_levels.alpha)
    total = 0.0
    for i, (d, L, (ai, bi, ci)) in enumerate(zip(s.marginals, s.insurer_levels, trips)):
        r = PropExcessR(a=ai, b=bi, c=ci)
        total += (
            rvar(d, L)
            - measure_of_contract(d, r, L)
            + measure_of_contract(d, r, _gamma_window(gamma, i))
        )
    return total


def _var_mode_gamma_total(s: Scenario) -> float:
    return 1.0 - s.reinsurer_var_level


def _split_objective_core(
    s: Scenario,
    contracts: Sequence[Indemnity],
    gamma: SimplexPoint,
) -> float:
    total = 0.0
    for i, (d, f) in enumerate(zip(s.marginals, contracts)):
        p = s.insurer_var_level(i)
        total += (
            d.quantile(p)
            - measure_of_contract(d, f, RiskLevels.var_at(p))
            + measure_of_contract(d, f, _gamma_window(gamma, i))
        )
    return total


def objective_layers_var_simplex(
    s: Scenario, a: Sequence[float], b: Sequence[float], gamma: SimplexPoint
) -> float:
    """Two-insurer layer cessions against the worst coupling's VaR split."""
    _expect_mode(s, "VaR", "the layered split objective")
    if s.n != 2:
        raise ValueError(f"the layered split objective covers exactly two insurers, got n={s.n}")
    pairs = list(zip(_vec("a", a, 2), _vec("b", b, 2)))
    _require(pairs, "A1")
    _check_gamma(gamma, 2, _var_mode_gamma_total(s), 0.0)
    return _split_objective_core(s, [LayerGB(*p) for p in pairs], gamma)


def objective_capped_prop_var(
    s: Scenario, a: Sequence[float], b: Sequence[float], gamma: SimplexPoint
) -> float:
    """Capped quota shares; certified optimal when every tail is convex."""
    _expect_mode(s, "VaR", "the capped-share objective")
    pairs = list(zip(_vec("a", a, s.n), _vec("b", b, s.n)))
    _require(pairs, "A3")
    _check_gamma(gamma, s.n, _var_mode_gamma_total(s), 0.0)
    level = s.reinsurer_var_level
    bad = [i for i, d in enumerate(s.marginals) if not d.tail_shape(level).convex_beyond]
    if bad:
        warnings.warn(
            f"tail not convex beyond the pooled quantile for marginals {bad}; "
            "capped shares are not certified optimal here",
            RuntimeWarning,
            stacklevel=2,
        )
    return _split_objective_core(s, [CappedPropL(*p) for p in pairs], gamma)


def objective_shifted_prop_var(
    s: Scenario, a: Sequence[float], b: Sequence[float], gamma: SimplexPoint
) -> float:
    """Proportional stop losses; certified optimal when every tail is concave."""
    _expect_mode(s, "VaR", "the proportional stop-loss objective")
    pairs = list(zip(_vec("a", a, s.n), _vec("b", b, s.n)))
    _require(pairs, "A4")
    _check_gamma(gamma, s.n, _var_mode_gamma_total(s), 0.0)
    level = s.reinsurer_var_level
    bad = [i for i, d in enumerate(s.marginals) if not d.tail_shape(level).concave_beyond]
    if bad:
        warnings.warn(
            f"tail not concave beyond the pooled quantile for marginals {bad}; "
            "proportional stop losses are not certified optimal here",
            RuntimeWarning,
            stacklevel=2,
        )
    return _split_objective_core(s, [ShiftedPropH(*p) for p in pairs], gamma)


def _split_levels(alpha: float, t: float) -> tuple[float, float]:
    # t <= 1 - alpha keeps the second level >= alpha > 0; the first may hit 1
    return min(alpha + t, 1.0), 1.0 - t


def _split_ceded(s: Scenario, contracts: Sequence[Indemnity], t: float, nodes: int) -> float:
    l1, l2 = _split_levels(s.reinsurer_var_level, t)
    return measure_of_contract(
        s.marginals[0], contracts[0], RiskLevels.var_at(l1), nodes=nodes
    ) + measure_of_contract(s.marginals[1], contracts[1], RiskLevels.var_at(l2), nodes=nodes)


def objective_layers_var_two(
    s: Scenario, a: Sequence[float], b: Sequence[float], t: float
) -> float:
    """Two-insurer layers with the worst coupling reduced to one split point.

    The pooled worst-case VaR of two ceded layers is a quantile split: the
    first layer read at level alpha + t, the second at 1 - t.  Minimizing
    over t in [0, 1 - alpha] recovers the full coupling problem.
    """
    _expect_mode(s, "VaR", "the two-insurer split objective")
    if s.n != 2:
        raise ValueError(f"the split objective covers exactly two insurers, got n={s.n}")
    pairs = list(zip(_vec("a", a, 2), _vec("b", b, 2)))
    _require(pairs, "A1")
    alpha = s.reinsurer_var_level
    if not -1e-12 <= t <= 1.0 - alpha + 1e-12:
        raise ValueError(f"split point t={t} outside [0, {1.0 - alpha:g}]")
    contracts = [LayerGB(*p) for p in pairs]
    retained = 0.0
    for i, (d, f) in enumerate(zip(s.marginals, contracts)):
        p = s.insurer_var_level(i)
        retained += d.quantile(p) - measure_of_contract(d, f, RiskLevels.var_at(p))
    return retained + _split_ceded(s, contracts, min(max(t, 0.0), 1.0 - alpha), DEFAULT_NODES)


def objective_var_regime(
    s: Scenario,
    a: Sequence[float],
    b: Sequence[float],
    config: SearchConfig | None = None,
) -> float:
    """Layer cessions priced under the scenario's dependence regime.

    WorstCase solves the inner split/coupling problem; Comonotonic reads
    every layer at the pooled level; IID prices the ceded sum by its
    mean-plus-normal-quantile approximation (exact VaR for one insurer).
    """
    _expect_mode(s, "VaR", "the regime-priced layer objective")
    pairs = list(zip(_vec("a", a, s.n), _vec("b", b, s.n)))
    _require(pairs, "A1")
    return total_risk(s, [LayerGB(*p) for p in pairs], config)


def total_risk(
    s: Scenario,
    contracts: Sequence[Indemnity],
    config: SearchConfig | None = None,
) -> float:
    """Sum of all positions for an arbitrary admissible design.

    Accepts any nondecreasing 1-Lipschitz indemnities, not just the
    parametric families, so candidate designs can be scored against the
    family optima.  The pooled term re-solves the inner problem that the
    scenario's regime calls for.
    """
    config = config or SearchConfig()
    nodes = config.quad_nodes
    if len(contracts) != s.n:
        raise ValueError(f"{s.n} marginals but {len(contracts)} contracts")

    if s.mode == "RVaR":
        retained = sum(
            rvar(d, L, nodes) - measure_of_contract(d, f, L, nodes=nodes)
            for d, L, f in zip(s.marginals, s.insurer_levels, contracts)
        )
        if s.dependence == "Comonotonic":
            return retained + sum(
                measure_of_contract(d, f, s.reinsurer_levels, nodes=nodes)
                for d, f in zip(s.marginals, contracts)
            )
        if s.dependence == "IID":
            raise ValueError("independent pooling is priced in VaR mode only")
        beta, alpha = s.reinsurer_levels.beta, s.reinsurer_levels.alpha

        def term(i: int, offset: float, window: float) -> float:
            return _safe_measure(
                s.marginals[i], contracts[i], RiskLevels(offset, window), nodes
            )

        value, _ = solve_scaled_simplex(term, s.n, beta + alpha, alpha, config)
        if math.isinf(value):
            raise DivergenceError("every feasible pooled window diverges for this design")
        return retained + value

    # VaR mode
    retained = 0.0
    for i, (d, f) in enumerate(zip(s.marginals, contracts)):
        p = s.insurer_var_level(i)
        retained += d.quantile(p) - measure_of_contract(d, f, RiskLevels.var_at(p), nodes=nodes)
    alpha = s.reinsurer_var_level

    if s.n == 1 or s.dependence == "Comonotonic":
        # one ceded risk, or all of them read at the same pooled quantile
        return retained + sum(
            measure_of_contract(d, f, RiskLevels.var_at(alpha), nodes=nodes)
            for d, f in zip(s.marginals, contracts)
        )
    if s.dependence == "WorstCase":
        if s.n == 2:
            _, value = minimize_1d(
                lambda t: _split_ceded(s, contracts, t, nodes),
                0.0,
                1.0 - alpha,
                points=config.t_points,
            )
            return retained + value

        def term(i: int, offset: float, window: float) -> float:
            return _safe_measure(
                s.marginals[i], contracts[i], RiskLevels(offset, window), nodes
            )

        value, _ = solve_scaled_simplex(term, s.n, 1.0 - alpha, 0.0, config)
        return retained + value

    # IID: normal approximation of the ceded sum's quantile
    mu = 0.0
    var_sum = 0.0
    for d, f in zip(s.marginals, contracts):
        m1 = ceded_mean(d, f, nodes)
        m2 = ceded_second_moment(d, f, nodes)
        mu += m1
        var_sum += max(0.0, m2 - m1 * m1)
    return retained + mu + _STD_NORMAL.quantile(alpha) * math.sqrt(var_sum)


def ceded_mean(d: Distribution, f: Indemnity, nodes: int = DEFAULT_NODES) -> float:
    """Pure premium E f(X): the full-window average of the ceded quantile."""
    return measure_of_contract(d, f, RiskLevels(0.0, 1.0), nodes=nodes)


def ceded_second_moment(d: Distribution, f: Indemnity, nodes: int = DEFAULT_NODES) -> float:
    """E f(X)^2 from the affine pieces of f.

    On each piece f = c + s*x, so the square integrates with the plain and
    squared quantile primitives; slope-zero pieces never touch them, which
    keeps capped contracts finite on heavy tails.
    """
    del nodes  # exact primitives only; kept for signature symmetry
    pieces = f.pieces()
    total = 0.0
    u_lo = d.cdf(0.0)
    for j, (x0, v0, slope) in enumerate(pieces):
        if j > 0:
            u_lo = d.cdf(x0)
        u_hi = d.cdf(pieces[j + 1][0]) if j + 1 < len(pieces) else 1.0
        if u_hi <= u_lo:
            continue
        c = v0 - slope * x0
        if c != 0.0:
            total += c * c * (u_hi - u_lo)
        if slope != 0.0:
            total += 2.0 * c * slope * d.quantile_integral(u_lo, u_hi)
            total += slope * slope * d.quantile_square_integral(u_lo, u_hi)
    return total


# ---------------------------------------------------------------------------
# shortcuts shared by the VaR-mode minimizers


def caps_at_var(s: Scenario) -> tuple[float, ...]:
    """Pin each cap at the insurer's own value-at-risk.

    Raising b_i past VaR of the insurer's level leaves its own assessment
    unchanged while every pooled term can only grow, so the search space
    collapses to the retentions.
    """
    _expect_mode(s, "VaR", "cap reduction")
    return tuple(
        d.quantile(s.insurer_var_level(i)) for i, d in enumerate(s.marginals)
    )


def boundary_split_certificate(s: Scenario) -> BoundaryCertificate:
    """Sufficient conditions pinning the split point to an endpoint.

    Either the pooled level dominates alpha_1 + alpha_2 - 1, or both tails
    are convex beyond the pooled quantile; each condition alone forces the
    inner infimum onto {0, 1 - alpha}.
    """
    _expect_mode(s, "VaR", "the boundary certificate")
    if s.n != 2:
        raise ValueError(f"the boundary certificate covers exactly two insurers, got n={s.n}")
    alpha = s.reinsurer_var_level
    a1, a2 = s.insurer_var_level(0), s.insurer_var_level(1)
    if alpha >= a1 + a2 - 1.0 - 1e-12:
        return BoundaryCertificate(
            True, f"pooled level {alpha:g} >= {a1:g} + {a2:g} - 1"
        )
    if all(d.tail_shape(alpha).convex_beyond for d in s.marginals):
        return BoundaryCertificate(True, "both tails convex beyond the pooled quantile")
    return BoundaryCertificate(False, "no endpoint condition verified; search all split points")


# ---------------------------------------------------------------------------
# flat-interval reporting


def _flat(
    profile: Callable[[float], float],
    x_star: float,
    f_star: float,
    lo: float,
    hi: float,
    config: SearchConfig,
) -> tuple[float, float]:
    """Expand then verify; never report an interval the scan rejects."""
    if math.isinf(x_star) or hi <= lo:
        return (x_star, x_star)
    span = expand_flat_interval(
        profile, x_star, f_star, lo, hi, config.flat_tol, config.flat_end_precision
    )
    if not scan_is_flat(profile, span[0], span[1], f_star, config.flat_tol):
        return (x_star, x_star)
    return span


def _param_flats(
    params: list[list[float]],
    value: float,
    boxes: Sequence[Sequence[tuple[float, float]]],
    evaluate: Callable[[list[list[float]]], float],
    config: SearchConfig,
) -> tuple[tuple[tuple[float, float], ...], ...]:
    """Per-parameter flats with every other parameter held at the optimum."""
    out = []
    for i, per in enumerate(params):
        row = []
        for k, x_star in enumerate(per):
            lo, hi = boxes[i][k]

            def profile(x: float, i=i, k=k) -> float:
                trial = [list(p) for p in params]
                trial[i][k] = x
                try:
                    return evaluate(trial)
                except (ValueError, DivergenceError):
                    return math.inf

            row.append(_flat(profile, x_star, value, lo, hi, config))
        out.append(tuple(row))
    return tuple(out)


# ---------------------------------------------------------------------------
# minimizers


def minimize(
    objective: str, s: Scenario, config: SearchConfig | None = None
) -> OptimizeResult:
    """Deterministic minimizer for any of the named objectives.

    Outer search over contract parameters, inner over the coupling split
    (the simplex or the scalar t), with the cap reduction and the boundary
    certificate applied where they hold.  Ties resolve to the smallest
    parameters; every reported flat interval has been sampled.
    """
    config = config or SearchConfig()
    try:
        impl = OBJECTIVES[objective]
    except KeyError:
        raise ValueError(
            f"unknown objective {objective!r}; expected one of {sorted(OBJECTIVES)}"
        ) from None
    return impl(s, config)


def _min_layers_es(s: Scenario, config: SearchConfig) -> OptimizeResult:
    _expect_mode(s, "RVaR", "the layered tail-mean minimizer")
    if s.reinsurer_levels.beta != 0.0:
        raise ValueError("tail-mean pricing needs a zero reinsurer offset")
    nodes = config.quad_nodes

    chosen: list[tuple[float, float]] = []
    for d, L in zip(s.marginals, s.insurer_levels):
        base = rvar(d, L, nodes)

        def gval(a: float, b: float, d=d, L=L, base=base) -> float:
            g = LayerGB(a, b)
            return (
                base
                - measure_of_contract(d, g, L, nodes=nodes)
                + measure_of_contract(d, g, s.reinsurer_levels, nodes=nodes)
            )

        # retentions past the insurer's window top are dominated by no cover
        top = d.quantile(min(1.0 - L.beta, _DEDUCTIBLE_TOP))
        cap_hi = d.quantile(_DEDUCTIBLE_TOP)

        def best_cap(a: float) -> tuple[float, float]:
            cands = [(gval(a, a), a)]
            try:
                cands.append((gval(a, math.inf), math.inf))
            except DivergenceError:
                pass
            if cap_hi > a:
                b1, v1 = minimize_1d(
                    lambda b: gval(a, b), a, cap_hi, points=config.cap_points
                )
                cands.append((v1, b1))
            v, b = min(cands)
            return v, b

        a_star, v_star = minimize_1d(
            lambda a: best_cap(a)[0], 0.0, top, points=config.retention_points
        )
        b_star = best_cap(a_star)[1]
        if math.isfinite(b_star):

            def boxed(p: Sequence[float]) -> float:
                a, b = p
                if not 0.0 <= a <= b:
                    return math.inf
                return gval(a, b)

            step0 = max(top, b_star) / max(config.retention_points - 1, 1)
            polished, v2 = coordinate_descent_box(
                boxed,
                [a_star, b_star],
                [0.0, 0.0],
                [top, max(cap_hi, b_star)],
                step0,
                config.refine_halvings,
            )
            if v2 < v_star:
                (a_star, b_star), v_star = tuple(polished), v2
        if v_star >= base - 1e-12:
            a_star, b_star = 0.0, 0.0
        chosen.append((a_star, b_star))

    params = [list(p) for p in chosen]
    value = objective_layers_es(s, [p[0] for p in chosen], [p[1] for p in chosen])

    boxes = []
    for i, d in enumerate(s.marginals):
        top = d.quantile(min(1.0 - s.insurer_levels[i].beta, _DEDUCTIBLE_TOP))
        cap_hi = d.quantile(_DEDUCTIBLE_TOP)
        boxes.append([(0.0, max(top, params[i][1] if math.isfinite(params[i][1]) else top)),
                      (params[i][0], max(cap_hi, params[i][0]))])
    flats = _param_flats(
        params,
        value,
        boxes,
        lambda ps: objective_layers_es(s, [p[0] for p in ps], [p[1] for p in ps]),
        config,
    )
    return OptimizeResult(
        params=tuple(tuple(p) for p in params),
        objective=value,
        witness=None,
        flat_intervals=flats,
    )


def _deductible_gain(
    d: Distribution,
    make: Callable[[float], Indemnity],
    own: RiskLevels,
    pool: RiskLevels,
    b_hi: float,
    points: int,
    nodes: int,
) -> tuple[float, float]:
    """min over b of pooled-minus-own price of the unit contract at b."""

    def delta(b: float) -> float:
        f = make(b)
        pooled = _safe_measure(d, f, pool, nodes)
        if math.isinf(pooled):
            return math.inf
        return pooled - measure_of_contract(d, f, own, nodes=nodes)

    b, v = minimize_1d(delta, 0.0, b_hi, points=points)
    return v, b


def _simplex_family_minimizer(
    s: Scenario,
    config: SearchConfig,
    total: float,
    floor: float,
    own_levels: Sequence[RiskLevels],
    bases: Sequence[float],
    make: Callable[[int, float], Indemnity],
    zero_params: tuple[float, ...],
    unit_params: Callable[[float], tuple[float, ...]],
    extra_unit: tuple[float, ...] | None = None,
) -> tuple[tuple[tuple[float, ...], ...], SimplexPoint]:
    """Shared engine for the families that are linear in their shares.

    At a fixed pooled window the best member is either the zero contract or
    the unit-share contract at the best deductible (the identity sits at
    deductible zero or infinity, so it is covered).  extra_unit, when given,
    adds one more closed-form candidate: the unit contract at b = inf.
    """
    n = s.n
    nodes = config.quad_nodes
    b_tops = [d.quantile(_DEDUCTIBLE_TOP) for d in s.marginals]

    def gain(i: int, w: RiskLevels) -> tuple[float, float | None]:
        v, b = _deductible_gain(
            s.marginals[i],
            lambda bb, i=i: make(i, bb),
            own_levels[i],
            w,
            b_tops[i],
            config.cap_points,
            nodes,
        )
        if extra_unit is not None:
            f = make(i, math.inf)
            v_inf = _safe_measure(s.marginals[i], f, w, nodes)
            if math.isfinite(v_inf):
                v_inf -= measure_of_contract(s.marginals[i], f, own_levels[i], nodes=nodes)
                if v_inf < v:
                    return v_inf, math.inf
        return v, b

    def term(i: int, offset: float, window: float) -> float:
        v, _ = gain(i, RiskLevels(offset, window))
        return bases[i] + min(0.0, v)

    value, gamma = solve_scaled_simplex(term, n, total, floor, config)
    if math.isinf(value):
        raise DivergenceError("every feasible pooled window diverges for these marginals")
    witness = SimplexPoint(gamma, total=total, floor=floor)

    chosen = []
    for i in range(n):
        v, b = gain(i, _gamma_window(witness, i))
        # float-noise ties go to the zero contract
        if v >= -1e-12:
            chosen.append(zero_params)
        elif math.isinf(b):
            chosen.append(extra_unit)
        else:
            chosen.append(unit_params(b))
    return tuple(chosen), witness


def _shape_note(s: Scenario, level: float, want: str) -> str:
    shapes = [d.tail_shape(level) for d in s.marginals]
    if want == "concave":
        bad = [i for i, sh in enumerate(shapes) if not sh.concave_beyond]
    else:
        bad = [i for i, sh in enumerate(shapes) if not sh.convex_beyond]
    if not bad:
        return ""
    return (
        f"tail not {want} beyond the working quantile for marginals {bad}; "
        "the family optimum is an upper bound only"
    )


def _min_prop_excess(s: Scenario, config: SearchConfig) -> OptimizeResult:
    _expect_mode(s, "RVaR", "the proportional-excess minimizer")
    beta, alpha = s.reinsurer_levels.beta, s.reinsurer_levels.alpha
    nodes = config.quad_nodes
    bases = [rvar(d, L, nodes) for d, L in zip(s.marginals, s.insurer_levels)]
    chosen, witness = _simplex_family_minimizer(
        s,
        config,
        total=beta + alpha,
        floor=alpha,
        own_levels=s.insurer_levels,
        bases=bases,
        make=lambda i, b: PropExcessR(0.0, b, 1.0),
        zero_params=(0.0, 0.0, 0.0),
        unit_params=lambda b: (0.0, b, 1.0),
    )
    value = objective_prop_excess_rvar(
        s, [p[0] for p in chosen], [p[1] for p in chosen], [p[2] for p in chosen], witness
    )
    b_tops = [d.quantile(_DEDUCTIBLE_TOP) for d in s.marginals]
    boxes = [
        [(0.0, 1.0 - p[2]), (0.0, b_tops[i]), (0.0, 1.0 - p[0])]
        for i, p in enumerate(chosen)
    ]
    flats = _param_flats(
        [list(p) for p in chosen],
        value,
        boxes,
        lambda ps: objective_prop_excess_rvar(
            s, [p[0] for p in ps], [p[1] for p in ps], [p[2] for p in ps], witness
        ),
        config,
    )
    return OptimizeResult(
        params=chosen,
        objective=value,
        witness=witness,
        flat_intervals=flats,
        notes=_shape_note(s, 1.0 - beta - alpha, "concave"),
    )


def _min_capped_prop(s: Scenario, config: SearchConfig) -> OptimizeResult:
    _expect_mode(s, "VaR", "the capped-share minimizer")
    own = [RiskLevels.var_at(s.insurer_var_level(i)) for i in range(s.n)]
    bases = [d.quantile(s.insurer_var_level(i)) for i, d in enumerate(s.marginals)]
    chosen, witness = _simplex_family_minimizer(
        s,
        config,
        total=_var_mode_gamma_total(s),
        floor=0.0,
        own_levels=own,
        bases=bases,
        make=lambda i, b: CappedPropL(1.0, b),
        zero_params=(0.0, 0.0),
        unit_params=lambda b: (1.0, b),
        extra_unit=(1.0, math.inf),
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        value = objective_capped_prop_var(
            s, [p[0] for p in chosen], [p[1] for p in chosen], witness
        )

        b_tops = [d.quantile(_DEDUCTIBLE_TOP) for d in s.marginals]
        boxes = [[(0.0, 1.0), (0.0, b_tops[i])] for i in range(s.n)]
        flats = _param_flats(
            [list(p) for p in chosen],
            value,
            boxes,
            lambda ps: objective_capped_prop_var(
                s, [p[0] for p in ps], [p[1] for p in ps], witness
            ),
            config,
        )
    return OptimizeResult(
        params=chosen,
        objective=value,
        witness=witness,
        flat_intervals=flats,
        notes=_shape_note(s, s.reinsurer_var_level, "convex"),
    )


def _min_shifted_prop(s: Scenario, config: SearchConfig) -> OptimizeResult:
    _expect_mode(s, "VaR", "the proportional stop-loss minimizer")
    own = [RiskLevels.var_at(s.insurer_var_level(i)) for i in range(s.n)]
    bases = [d.quantile(s.insurer_var_level(i)) for i, d in enumerate(s.marginals)]
    chosen, witness = _simplex_family_minimizer(
        s,
        config,
        total=_var_mode_gamma_total(s),
        floor=0.0,
        own_levels=own,
        bases=bases,
        make=lambda i, b: ShiftedPropH(1.0, b),
        zero_params=(0.0, 0.0),
        unit_params=lambda b: (1.0, b),
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        value = objective_shifted_prop_var(
            s, [p[0] for p in chosen], [p[1] for p in chosen], witness
        )
        b_tops = [d.quantile(_DEDUCTIBLE_TOP) for d in s.marginals]
        boxes = [[(0.0, 1.0), (0.0, b_tops[i])] for i in range(s.n)]
        flats = _param_flats(
            [list(p) for p in chosen],
            value,
            boxes,
            lambda ps: objective_shifted_prop_var(
                s, [p[0] for p in ps], [p[1] for p in ps], witness
            ),
            config,
        )
    return OptimizeResult(
        params=chosen,
        objective=value,
        witness=witness,
        flat_intervals=flats,
        notes=_shape_note(s, s.reinsurer_var_level, "concave"),
    )


def _worst_split_optimum(s: Scenario, config: SearchConfig) -> tuple[float, float | None]:
    """Optimal split value over caps-pinned layers with zero retentions.

    Per split point each insurer contributes the smaller of its pooled-level
    quantile and its cap, so the whole contract search is one scalar problem.
    Returns (value, t_star); t_star is None for a single insurer.
    """
    caps = caps_at_var(s)
    alpha = s.reinsurer_var_level
    if s.n == 1:
        return min(s.marginals[0].quantile(alpha), caps[0]), None

    def phi(t: float) -> float:
        l1, l2 = _split_levels(alpha, t)
        return min(s.marginals[0].quantile(l1), caps[0]) + min(
            s.marginals[1].quantile(l2), caps[1]
        )

    if boundary_split_certificate(s).boundary_only:
        value, t_star = min((phi(0.0), 0.0), (phi(1.0 - alpha), 1.0 - alpha))
        return value, t_star
    t_star, value = minimize_1d(phi, 0.0, 1.0 - alpha, points=config.t_points)
    return value, t_star


def _idle_pool_note(s: Scenario) -> str:
    alpha = s.reinsurer_var_level
    idle = [i for i in range(s.n) if alpha >= s.insurer_var_level(i)]
    if not idle:
        return ""
    return (
        f"insurers {idle} price at or below the pooled level; "
        "ceding cannot improve their terms"
    )


def _min_var_layers(s: Scenario, config: SearchConfig, witness_kind: str) -> OptimizeResult:
    _expect_mode(s, "VaR", "the worst-coupling layer minimizer")
    if s.n != 2:
        raise ValueError(f"the split minimizer covers exactly two insurers, got n={s.n}")
    caps = caps_at_var(s)
    value, t_star = _worst_split_optimum(s, config)
    params = [[0.0, caps[0]], [0.0, caps[1]]]

    alpha = s.reinsurer_var_level
    if witness_kind == "simplex":
        witness = SimplexPoint(
            (0.0, max(0.0, 1.0 - alpha - t_star), t_star),
            total=1.0 - alpha,
            floor=0.0,
        )

        def evaluate(ps: list[list[float]]) -> float:
            return objective_layers_var_simplex(
                s, [p[0] for p in ps], [p[1] for p in ps], witness
            )

    else:
        witness = t_star

        def evaluate(ps: list[list[float]]) -> float:
            return objective_layers_var_two(
                s, [p[0] for p in ps], [p[1] for p in ps], t_star
            )

    value = evaluate(params)
    b_tops = [d.quantile(_DEDUCTIBLE_TOP) for d in s.marginals]
    boxes = [[(0.0, caps[i]), (0.0, max(b_tops[i], caps[i]))] for i in range(2)]
    flats = _param_flats(params, value, boxes, evaluate, config)
    return OptimizeResult(
        params=tuple(tuple(p) for p in params),
        objective=value,
        witness=witness,
        flat_intervals=flats,
        notes=_idle_pool_note(s),
    )


def _min_layers_var_simplex(s: Scenario, config: SearchConfig) -> OptimizeResult:
    return _min_var_layers(s, config, "simplex")


def _min_layers_var_two(s: Scenario, config: SearchConfig) -> OptimizeResult:
    return _min_var_layers(s, config, "split")


def _min_var_regime(s: Scenario, config: SearchConfig) -> OptimizeResult:
    _expect_mode(s, "VaR", "the regime-priced layer minimizer")
    caps = caps_at_var(s)
    alpha = s.reinsurer_var_level
    n = s.n

    # full layers up to the pinned caps dominate every other layer pointwise
    # along the coupling, for any n; only the inner witness needs solving
    witness: object = None
    retentions = [0.0] * n
    fixed_eval: Callable[[list[list[float]]], float] | None = None
    if s.dependence == "WorstCase" and n > 1:
        if n == 2:
            _, t_star = _worst_split_optimum(s, config)
            witness = t_star

            def fixed_eval(ps: list[list[float]]) -> float:
                return objective_layers_var_two(
                    s, [p[0] for p in ps], [p[1] for p in ps], t_star
                )

        elif n == 3:

            def term(i: int, offset: float, window: float) -> float:
                return _safe_measure(
                    s.marginals[i],
                    LayerGB(0.0, caps[i]),
                    RiskLevels(offset, window),
                    config.quad_nodes,
                )

            _, gamma = solve_scaled_simplex(term, n, 1.0 - alpha, 0.0, config)
            witness = SimplexPoint(gamma, total=1.0 - alpha, floor=0.0)
            pinned = witness

            def fixed_eval(ps: list[list[float]]) -> float:
                return _split_objective_core(s, [LayerGB(*p) for p in ps], pinned)

        else:
            raise ValueError(
                f"the worst-coupling layer minimizer covers up to three insurers, got n={n}"
            )
    elif s.dependence == "IID" and n > 1:
        retentions = _min_iid_retentions(s, caps, config)

    params = [[retentions[i], caps[i]] for i in range(n)]

    def evaluate(ps: list[list[float]]) -> float:
        return objective_var_regime(s, [p[0] for p in ps], [p[1] for p in ps], config)

    value = evaluate(params)
    if fixed_eval is not None:
        # profiles at the frozen witness sit between the optimum and the true
        # re-solved objective, so a verified flat on them is a true flat,
        # and they cost one evaluation instead of an inner search
        evaluate = fixed_eval
    b_tops = [d.quantile(_DEDUCTIBLE_TOP) for d in s.marginals]
    boxes = [[(0.0, caps[i]), (0.0, max(b_tops[i], caps[i]))] for i in range(n)]
    flats = _param_flats(params, value, boxes, evaluate, config)
    note = _idle_pool_note(s) if s.dependence != "IID" else ""
    return OptimizeResult(
        params=tuple(tuple(p) for p in params),
        objective=value,
        witness=witness,
        flat_intervals=flats,
        notes=note,
    )


def _min_iid_retentions(
    s: Scenario, caps: tuple[float, ...], config: SearchConfig
) -> list[float]:
    """Retentions minimizing the normal-approximation total for layers.

    The objective along each axis needs only that insurer's layer moments,
    so the axes are precomputed once and the n=2 case scans the full grid;
    larger n falls back to deterministic cyclic scans from the no-cover
    corner, polished by pattern search.
    """
    n = s.n
    z = _STD_NORMAL.quantile(s.reinsurer_var_level)
    axes = [np.array(grid(0.0, caps[i], config.retention_points)) for i in range(n)]
    means, parts = [], []
    for i, d in enumerate(s.marginals):
        means.append(np.array([d.layer_mean(x, caps[i]) for x in axes[i]]))
        parts.append(np.array([d.layer_second_moment_part(x, caps[i]) for x in axes[i]]))
    variances = [np.maximum(parts[i] - means[i] ** 2, 0.0) for i in range(n)]

    def objective_vec(idx: Sequence[int]) -> float:
        tot = sum(axes[i][idx[i]] + means[i][idx[i]] for i in range(n))
        return tot + z * math.sqrt(sum(variances[i][idx[i]] for i in range(n)))

    if n == 2:
        tot = (
            (axes[0] + means[0])[:, None]
            + (axes[1] + means[1])[None, :]
            + z * np.sqrt(variances[0][:, None] + variances[1][None, :])
        )
        flat = int(np.argmin(tot))
        i0, i1 = divmod(flat, len(axes[1]))
        start = [float(axes[0][i0]), float(axes[1][i1])]
    else:
        idx = [len(axes[i]) - 1 for i in range(n)]
        for _ in range(100):
            moved = False
            for i in range(n):
                others_a = sum(axes[j][idx[j]] + means[j][idx[j]] for j in range(n) if j != i)
                others_v = sum(variances[j][idx[j]] for j in range(n) if j != i)
                col = axes[i] + means[i] + z * np.sqrt(variances[i] + others_v) + others_a
                k = int(np.argmin(col))
                if k != idx[i]:
                    idx[i] = k
                    moved = True
            if not moved:
                break
        start = [float(axes[i][idx[i]]) for i in range(n)]

    def boxed(a_vec: Sequence[float]) -> float:
        tot = 0.0
        var_sum = 0.0
        for i, d in enumerate(s.marginals):
            ai = a_vec[i]
            m1 = d.layer_mean(ai, caps[i])
            tot += ai + m1
            var_sum += max(0.0, d.layer_second_moment_part(ai, caps[i]) - m1 * m1)
        return tot + z * math.sqrt(var_sum)

    step0 = max(caps) / max(config.retention_points - 1, 1)
    polished, v2 = coordinate_descent_box(
        boxed, start, [0.0] * n, list(caps), step0, config.refine_halvings
    )
    return polished if v2 <= boxed(start) else start


OBJECTIVES = {
    "layers_es": _min_layers_es,
    "prop_excess_rvar": _min_prop_excess,
    "layers_var_simplex": _min_layers_var_simplex,
    "layers_var_two": _min_layers_var_two,
    "capped_prop_var": _min_capped_prop,
    "shifted_prop_var": _min_shifted_prop,
    "var_regime": _min_var_regime,
}
