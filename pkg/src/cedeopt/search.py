"""Deterministic scalar search helpers shared by the optimizers.

Everything here is grid-first: scan a fixed lattice, refine every local
minimum bracket with golden sections, and break value ties toward the
smallest parameter.  No randomness, no order dependence, so results are
reproducible bit for bit regardless of chunking or worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class SearchConfig:
    """Resolution knobs for every deterministic search in the package."""

    retention_points: int = 401
    cap_points: int = 101
    t_points: int = 2001
    gamma0_points: int = 201
    simplex_steps: int = 200
    refine_halvings: int = 12
    coord_rounds: int = 30
    coord_shrink: float = 0.5
    refine_top_k: int = 5
    flat_tol: float = 1e-6
    flat_end_precision: float = 1e-2
    quad_nodes: int = 256
    workers: int = 1

    def __post_init__(self) -> None:
        if self.retention_points < 2 or self.t_points < 2:
            raise ValueError("grids need at least two points")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def grid(lo: float, hi: float, points: int) -> list[float]:
    """Inclusive linear grid with exact endpoints."""
    if points < 2 or hi <= lo:
        return [lo]
    step = (hi - lo) / (points - 1)
    xs = [lo + i * step for i in range(points)]
    xs[-1] = hi
    return xs


def golden_min(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12
) -> tuple[float, float]:
    """Golden-section minimum of f on [lo, hi] to an x-tolerance.

    The iteration count is fixed by the interval width, so the result is
    deterministic.  Assumes f is unimodal on the bracket; callers pass
    brackets around grid local minima where that holds piecewise.
    """
    if hi <= lo:
        return lo, f(lo)
    span = hi - lo
    n = max(1, int(math.ceil(math.log(tol / span) / math.log(INV_PHI))))
    a, b = lo, hi
    c = a + INV_PHI2 * span
    d = a + INV_PHI * span
    fc, fd = f(c), f(d)
    for _ in range(n):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = a + INV_PHI2 * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    if fc <= fd:
        return c, fc
    return d, fd


def minimize_1d(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    points: int,
    refine: bool = True,
    tol: float = 1e-12,
) -> tuple[float, float]:
    """Grid scan plus golden refinement of every local-minimum bracket.

    Returns (x, f(x)) with ties broken toward the smallest x.  Refining all
    brackets instead of only the global grid winner keeps the result honest
    when the objective has several shallow valleys.
    """
    xs = grid(lo, hi, points)
    vals = [f(x) for x in xs]
    best = min(zip(vals, xs))
    if not refine or len(xs) < 3:
        return best[1], best[0]
    candidates = [best]
    for i in range(len(xs)):
        left = vals[i - 1] if i > 0 else math.inf
        right = vals[i + 1] if i + 1 < len(xs) else math.inf
        if vals[i] <= left and vals[i] <= right and math.isfinite(vals[i]):
            a = xs[i - 1] if i > 0 else xs[i]
            b = xs[i + 1] if i + 1 < len(xs) else xs[i]
            x, fx = golden_min(f, a, b, tol=tol)
            candidates.append((fx, x))
            candidates.append((vals[i], xs[i]))
    fbest, xbest = min(candidates)
    return xbest, fbest


def chunked_argmin(
    keys: Sequence,
    value_fn: Callable,
    workers: int = 1,
    chunk: int = 256,
) -> tuple[float, object]:
    """Order-independent argmin over candidate keys.

    Values are reduced by the total order (value, key), so the winner does
    not depend on evaluation order or on how the key list is chunked across
    workers.  Worker threads only change wall time, never the result.
    """
    if not keys:
        raise ValueError("empty candidate set")

    def eval_chunk(part: Sequence) -> tuple:
        return min((value_fn(k), k) for k in part)

    parts = [keys[i : i + chunk] for i in range(0, len(keys), chunk)]
    if workers <= 1 or len(parts) == 1:
        results = [eval_chunk(p) for p in parts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(eval_chunk, parts))
    val, key = min(results)
    return val, key


def coordinate_descent_box(
    f: Callable[[Sequence[float]], float],
    x0: Sequence[float],
    lo: Sequence[float],
    hi: Sequence[float],
    step0: float,
    halvings: int = 12,
) -> tuple[list[float], float]:
    """Pattern search over a box: axis moves, step halved when stuck."""
    x = list(x0)
    fx = f(x)
    step = step0
    for _ in range(max(1, halvings)):
        improved = True
        while improved:
            improved = False
            for i in range(len(x)):
                for delta in (step, -step):
                    xi = min(hi[i], max(lo[i], x[i] + delta))
                    if xi == x[i]:
                        continue
                    trial = list(x)
                    trial[i] = xi
                    ft = f(trial)
                    if ft < fx:
                        x, fx = trial, ft
                        improved = True
        step *= 0.5
    return x, fx


def expand_flat_interval(
    f: Callable[[float], float],
    x_star: float,
    f_star: float,
    lo: float,
    hi: float,
    tol: float,
    precision: float,
) -> tuple[float, float]:
    """Largest interval around x_star on which f stays within tol of f_star.

    March outward geometrically to bracket the first point that leaves the
    tolerance band, then bisect the boundary to well below the reporting
    precision.  Assumes the within-band set is an interval around the
    optimum, which holds for the piecewise-linear objectives here.
    """

    def inside(x: float) -> bool:
        return f(x) <= f_star + tol

    def boundary(a: float, b: float) -> float:
        # invariant: inside(a), not inside(b)
        for _ in range(60):
            m = 0.5 * (a + b)
            if inside(m):
                a = m
            else:
                b = m
            if b - a <= precision * 1e-4:
                break
        return a

    step = max(precision * 0.25, (hi - lo) * 1e-9)
    hi_end = x_star
    while hi_end < hi:
        probe = min(hi, hi_end + step)
        if inside(probe):
            hi_end = probe
            step *= 2.0
        else:
            hi_end = boundary(hi_end, probe)
            break
    step = max(precision * 0.25, (hi - lo) * 1e-9)
    lo_end = x_star
    while lo_end > lo:
        probe = max(lo, lo_end - step)
        if inside(probe):
            lo_end = probe
            step *= 2.0
        else:
            lo_end = boundary(lo_end, probe)
            break
    return lo_end, hi_end


def scan_is_flat(
    f: Callable[[float], float], lo: float, hi: float, f_star: float, tol: float,
    points: int = 11,
) -> bool:
    """Check an interval claims flatness honestly: sample points inside."""
    for x in grid(lo, hi, points):
        if f(x) > f_star + tol:
            return False
    return True


def iter_int_compositions(steps: int, parts: int) -> Iterable[tuple[int, ...]]:
    """Integer compositions of `steps` into `parts` nonnegative parts.

    Lexicographic order, so ties downstream resolve to the lexicographically
    smallest witness.
    """
    if parts == 1:
        yield (steps,)
        return

    def rec(remaining: int, k: int):
        if k == 1:
            yield (remaining,)
            return
        for i in range(remaining + 1):
            for rest in rec(remaining - i, k - 1):
                yield (i,) + rest

    yield from rec(steps, parts)


def iter_compositions(total: float, parts: int, steps: int) -> Iterable[tuple[float, ...]]:
    """Lattice points of the scaled simplex {x >= 0, sum x = total}.

    Integer compositions of `steps` scaled by total/steps.
    """
    if parts == 1:
        yield (total,)
        return
    if total <= 0.0 or steps < 1:
        yield (0.0,) * (parts - 1) + (max(total, 0.0),)
        return
    unit = total / steps
    for combo in iter_int_compositions(steps, parts):
        yield tuple(c * unit for c in combo)
