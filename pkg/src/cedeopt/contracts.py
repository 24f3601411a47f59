"""Indemnity families and their admissibility domains.

Four parametric families plus a free piecewise-linear contract for oracle
comparisons.  Every member is nondecreasing, 1-Lipschitz, and zero at zero,
so both the ceded part f(X) and the retained part X - f(X) are monotone
transforms of the loss; the risk-measure layer leans on that.

Each contract reports a `pieces()` decomposition: affine segments
(x_start, value_at_start, slope) covering [0, inf), strictly increasing in
x_start with the last segment unbounded.  Integrators consume this instead
of sampling the function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "Indemnity",
    "LayerGB",
    "PropExcessR",
    "CappedPropL",
    "ShiftedPropH",
    "PiecewiseLinear",
    "Admissibility",
    "check_admissible",
    "from_dict",
]


@dataclass(frozen=True)
class Admissibility:
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


class Indemnity:
    def evaluate(self, x: float) -> float:
        raise NotImplementedError

    def pieces(self) -> tuple[tuple[float, float, float], ...]:
        raise NotImplementedError

    def retained(self, x: float) -> float:
        if math.isinf(x):
            x0, v0, s = self.pieces()[-1]
            # retained part is constant past the last knot iff everything
            # marginal is ceded there
            return x0 - v0 if s >= 1.0 else math.inf
        return x - self.evaluate(x)

    def is_convex(self) -> bool:
        slopes = [s for _, _, s in self.pieces()]
        return all(s1 <= s2 + 1e-15 for s1, s2 in zip(slopes, slopes[1:]))

    def is_concave(self) -> bool:
        slopes = [s for _, _, s in self.pieces()]
        return all(s1 >= s2 - 1e-15 for s1, s2 in zip(slopes, slopes[1:]))

    def to_dict(self) -> dict:
        raise NotImplementedError


def _enc(x: float):
    return "inf" if math.isinf(x) else x


def _dec(x) -> float:
    return math.inf if x == "inf" else float(x)


@dataclass(frozen=True)
class LayerGB(Indemnity):
    """Layer cover: pays (x - a)+ capped at b - a."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.a <= self.b:
            raise ValueError(f"layer contract needs 0 <= a <= b, got ({self.a}, {self.b})")

    def evaluate(self, x: float) -> float:
        return max(0.0, min(x, self.b) - self.a)

    def pieces(self):
        if self.a == self.b:
            return ((0.0, 0.0, 0.0),)
        segs = []
        if self.a > 0.0:
            segs.append((0.0, 0.0, 0.0))
        segs.append((self.a, 0.0, 1.0))
        if math.isfinite(self.b):
            segs.append((self.b, self.b - self.a, 0.0))
        return tuple(segs)

    def to_dict(self) -> dict:
        return {"family": "g", "a": self.a, "b": _enc(self.b)}


@dataclass(frozen=True)
class PropExcessR(Indemnity):
    """Proportional plus excess-of-loss: a*x + c*(x - b)+."""

    a: float
    b: float
    c: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.a and 0.0 <= self.c and self.a + self.c <= 1.0):
            raise ValueError(f"need 0 <= a, c with a + c <= 1, got a={self.a}, c={self.c}")
        if self.b < 0.0:
            raise ValueError(f"kink must satisfy b >= 0, got {self.b}")

    def evaluate(self, x: float) -> float:
        if math.isinf(x):
            return math.inf if self.a + self.c > 0.0 else 0.0
        return self.a * x + self.c * max(0.0, x - self.b)

    def pieces(self):
        if self.c == 0.0 or self.b == 0.0:
            return ((0.0, 0.0, self.a + self.c),)
        return ((0.0, 0.0, self.a), (self.b, self.a * self.b, self.a + self.c))

    def to_dict(self) -> dict:
        return {"family": "r", "a": self.a, "b": self.b, "c": self.c}


@dataclass(frozen=True)
class CappedPropL(Indemnity):
    """Capped quota share: a * min(x, b)."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.a <= 1.0:
            raise ValueError(f"share must satisfy 0 <= a <= 1, got {self.a}")
        if self.b < 0.0:
            raise ValueError(f"cap must satisfy b >= 0, got {self.b}")

    def evaluate(self, x: float) -> float:
        if self.a == 0.0:
            return 0.0
        if math.isinf(x):
            return math.inf if math.isinf(self.b) else self.a * self.b
        return self.a * min(x, self.b)

    def pieces(self):
        if self.a == 0.0 or self.b == 0.0:
            return ((0.0, 0.0, 0.0),)
        if math.isinf(self.b):
            return ((0.0, 0.0, self.a),)
        return ((0.0, 0.0, self.a), (self.b, self.a * self.b, 0.0))

    def to_dict(self) -> dict:
        return {"family": "l", "a": self.a, "b": _enc(self.b)}


@dataclass(frozen=True)
class ShiftedPropH(Indemnity):
    """Proportional stop loss: a * (x - b)+; h with b=inf is the zero contract."""

    a: float
    b: float

    def __post_init__(self) -> None:
        # the wider printed domain would break 1-Lipschitz membership, so the
        # share is capped at 1 like the other families
        if not 0.0 <= self.a <= 1.0:
            raise ValueError(f"share must satisfy 0 <= a <= 1, got {self.a}")
        if self.b < 0.0:
            raise ValueError(f"deductible must satisfy b >= 0, got {self.b}")

    def evaluate(self, x: float) -> float:
        if self.a == 0.0 or math.isinf(self.b):
            return 0.0
        if math.isinf(x):
            return math.inf
        return self.a * max(0.0, x - self.b)

    def pieces(self):
        if self.a == 0.0 or math.isinf(self.b):
            return ((0.0, 0.0, 0.0),)
        if self.b == 0.0:
            return ((0.0, 0.0, self.a),)
        return ((0.0, 0.0, 0.0), (self.b, 0.0, self.a))

    def to_dict(self) -> dict:
        return {"family": "h", "a": self.a, "b": _enc(self.b)}


class PiecewiseLinear(Indemnity):
    """Free member of the admissible class, for dominance tests and oracles.

    knots: (x, y) pairs, x strictly increasing from 0 with y[0] = 0; the
    function continues past the last knot with tail_slope.
    """

    __slots__ = ("knots", "tail_slope")

    def __init__(self, knots, tail_slope: float = 0.0) -> None:
        pts = [(float(x), float(y)) for x, y in knots]
        if not pts or pts[0] != (0.0, 0.0):
            raise ValueError("knots must start at (0, 0)")
        for (x1, y1), (x2, y2) in zip(pts, pts[1:]):
            if x2 <= x1:
                raise ValueError("knot abscissae must be strictly increasing")
            slope = (y2 - y1) / (x2 - x1)
            if not -1e-12 <= slope <= 1.0 + 1e-12:
                raise ValueError(f"segment slope {slope} outside [0, 1]")
        if not 0.0 <= tail_slope <= 1.0:
            raise ValueError(f"tail slope {tail_slope} outside [0, 1]")
        object.__setattr__(self, "knots", tuple(pts))
        object.__setattr__(self, "tail_slope", float(tail_slope))

    def __setattr__(self, *args) -> None:
        raise AttributeError("PiecewiseLinear is immutable")

    def __repr__(self) -> str:
        return f"PiecewiseLinear({len(self.knots)} knots, tail_slope={self.tail_slope})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PiecewiseLinear)
            and self.knots == other.knots
            and self.tail_slope == other.tail_slope
        )

    def __hash__(self) -> int:
        return hash((self.knots, self.tail_slope))

    def evaluate(self, x: float) -> float:
        if math.isinf(x):
            xk, yk = self.knots[-1]
            return yk if self.tail_slope == 0.0 else math.inf
        if x <= 0.0:
            return 0.0
        for (x1, y1), (x2, y2) in zip(self.knots, self.knots[1:]):
            if x <= x2:
                return y1 + (y2 - y1) * (x - x1) / (x2 - x1)
        xk, yk = self.knots[-1]
        return yk + self.tail_slope * (x - xk)

    def pieces(self):
        segs = []
        for (x1, y1), (x2, y2) in zip(self.knots, self.knots[1:]):
            segs.append((x1, y1, (y2 - y1) / (x2 - x1)))
        xk, yk = self.knots[-1]
        segs.append((xk, yk, self.tail_slope))
        # merge equal-slope neighbours so integrators see canonical segments
        merged = [segs[0]]
        for seg in segs[1:]:
            if abs(seg[2] - merged[-1][2]) < 1e-15:
                continue
            merged.append(seg)
        return tuple(merged)

    def to_dict(self) -> dict:
        return {
            "family": "pwl",
            "knots": [[x, y] for x, y in self.knots],
            "tail_slope": self.tail_slope,
        }


def check_admissible(params, domain: str) -> Admissibility:
    """Predicate over per-insurer parameter tuples for domains A1-A4."""
    if domain not in {"A1", "A2", "A3", "A4"}:
        raise ValueError(f"unknown admissibility domain {domain!r}")
    for i, p in enumerate(params):
        if domain == "A1":
            a, b = p
            if not 0.0 <= a <= b:
                return Admissibility(False, f"contract {i}: need 0 <= a <= b, got a={a}, b={b}")
        elif domain == "A2":
            a, b, c = p
            if not (0.0 <= a and 0.0 <= c):
                return Admissibility(False, f"contract {i}: shares must be >= 0, got a={a}, c={c}")
            if a + c > 1.0:
                return Admissibility(False, f"contract {i}: a + c = {a + c} exceeds 1")
            if b < 0.0:
                return Admissibility(False, f"contract {i}: kink must be >= 0, got b={b}")
        else:  # A3 and A4 share the box
            a, b = p
            if not 0.0 <= a <= 1.0:
                return Admissibility(False, f"contract {i}: share outside [0, 1], got a={a}")
            if b < 0.0:
                return Admissibility(False, f"contract {i}: need b >= 0, got b={b}")
    return Admissibility(True)


_FAMILIES = {
    "g": lambda d: LayerGB(a=_dec(d["a"]), b=_dec(d["b"])),
    "r": lambda d: PropExcessR(a=_dec(d["a"]), b=_dec(d["b"]), c=_dec(d["c"])),
    "l": lambda d: CappedPropL(a=_dec(d["a"]), b=_dec(d["b"])),
    "h": lambda d: ShiftedPropH(a=_dec(d["a"]), b=_dec(d["b"])),
    "pwl": lambda d: PiecewiseLinear(knots=d["knots"], tail_slope=d.get("tail_slope", 0.0)),
}


def from_dict(data: dict) -> Indemnity:
    try:
        family = data["family"]
    except (TypeError, KeyError):
        raise ValueError(f"not a contract record: {data!r}") from None
    if family not in _FAMILIES:
        raise ValueError(f"unknown contract family {family!r}")
    try:
        return _FAMILIES[family](data)
    except KeyError as exc:
        raise ValueError(f"contract record for {family!r} is missing {exc}") from None
