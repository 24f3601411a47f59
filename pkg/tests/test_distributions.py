"""Distribution layer: quantiles, layer moments, tail curvature.

Oracles used here and nowhere in the library:
  * scipy.integrate.quad for every layer integral,
  * scipy.special.ndtri for the normal quantile,
  * seeded inverse-transform Monte Carlo for expected layer losses.
"""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from cedeopt.distributions import (
    Discrete,
    DivergenceError,
    Exponential,
    Lomax,
    Normal,
    PointMass,
    Uniform,
    from_dict,
    layer_mean,
    layer_second_moment_part,
    quantile,
    quantile_right,
    tail_shape,
    tail_shape_numeric,
)

RNG = np.random.default_rng(20240811)

PARAMETRIC = [
    Lomax(9.0, 8.0),
    Lomax(6.0, 5.0),
    Lomax(2.5, 1.0),
    Lomax(1.0, 2.0),   # log branch of the layer formulas
    Lomax(2.0, 3.0),   # log branch of the second-moment formula
    Exponential(1.0),
    Exponential(0.25),
    Uniform(0.0, 1.0),
    Uniform(2.0, 7.0),
    PointMass(5.0),
    Normal(10.0, 2.0),
]


def quad_layer_mean(d, a, b):
    val, err = integrate.quad(d.survival, a, b, limit=400)
    assert err < 1e-7 * max(1.0, abs(val))
    return val


def quad_layer_second(d, a, b):
    val, err = integrate.quad(lambda x: 2.0 * (x - a) * d.survival(x), a, b, limit=400)
    assert err < 1e-7 * max(1.0, abs(val))
    return val


def mc_layer_mean(d, a, b, n=1_000_000):
    u = RNG.random(n) * (1.0 - 1e-12) + 1e-12
    x = np.array([d.quantile(v) for v in u]) if not hasattr(d, "_mc_fast") else None
    ceded = np.clip(x, a, b) - a
    return float(ceded.mean()), float(ceded.std(ddof=1) / math.sqrt(n))


# ---------------------------------------------------------------- quantiles


def test_lomax_pinned_quantiles():
    assert Lomax(9, 8).quantile(0.9) == pytest.approx(2.3324, abs=1e-4)
    assert Lomax(9, 8).quantile(0.85) == pytest.approx(1.8772, abs=1e-4)
    assert Lomax(6, 5).quantile(0.9) == pytest.approx(2.3390, abs=1e-4)


def test_trivial_quantiles():
    assert PointMass(5.0).quantile(0.42) == 5.0
    assert Uniform(0.0, 1.0).quantile(0.3) == pytest.approx(0.3)
    assert Uniform(0.0, 1.0).quantile_right(0.0) == 0.0


def test_right_quantile_jumps_past_atoms():
    d = Discrete([(1.0, 0.5), (2.0, 0.5)])
    assert d.quantile(0.5) == 1.0
    assert d.quantile_right(0.5) == 2.0
    assert d.quantile_right(0.49) == 1.0
    assert d.quantile(0.51) == 2.0
    # continuous case: both conventions coincide
    assert Lomax(9, 8).quantile_right(0.9) == pytest.approx(2.3324, abs=1e-4)


def test_quantile_domain_errors():
    d = Lomax(9, 8)
    for bad in (-0.1, 0.0, 1.0 + 1e-12):
        with pytest.raises(ValueError):
            d.quantile(bad)
    for bad in (-1e-12, 1.0):
        with pytest.raises(ValueError):
            d.quantile_right(bad)


def test_unbounded_support_quantile_at_one():
    assert Lomax(9, 8).quantile(1.0) == math.inf
    assert Exponential(2.0).quantile(1.0) == math.inf
    assert Uniform(0, 1).quantile(1.0) == 1.0
    assert Discrete([(0.0, 0.25), (3.0, 0.75)]).quantile(1.0) == 3.0


def test_galois_inequalities_random_levels():
    for d in PARAMETRIC + [Discrete([(0.0, 0.2), (1.0, 0.3), (4.0, 0.5)])]:
        us = RNG.random(1000) * (1 - 2e-12) + 1e-12
        for u in us:
            assert d.cdf(d.quantile(u)) >= u - 1e-12
        xs = [d.quantile(u) for u in RNG.random(1000) * 0.998 + 0.001]
        for x in xs:
            p = d.cdf(x)
            if p > 0.0:
                assert d.quantile(p) <= x + 1e-9


def test_normal_quantile_matches_reference():
    # rational approximation plus one Halley polish; documented budget 1e-9
    us = np.concatenate(
        [
            RNG.random(4000),
            10.0 ** -RNG.uniform(1, 15, 500),
            1.0 - 10.0 ** -RNG.uniform(1, 15, 500),
        ]
    )
    worst = max(abs(Normal(0, 1).quantile(u) - special.ndtri(u)) for u in us)
    assert worst < 1e-9


def test_free_function_spellings_delegate():
    d = Lomax(9, 8)
    assert quantile(d, 0.9) == d.quantile(0.9)
    assert quantile_right(d, 0.9) == d.quantile_right(0.9)
    assert layer_mean(d, 0.0, 1.0) == d.layer_mean(0.0, 1.0)
    assert layer_second_moment_part(d, 0.0, 1.0) == d.layer_second_moment_part(0.0, 1.0)
    assert tail_shape(d, 0.9) == d.tail_shape(0.9)


# ------------------------------------------------------------ layer moments


def test_layer_mean_pinned_value():
    # independent closed form: (lam/(beta-1)) * (1 - (1+b/lam)^(1-beta))
    b = 2.3324
    oracle = 8.0 / 8.0 * (1.0 - (1.0 + b / 8.0) ** (1.0 - 9.0))
    assert oracle == pytest.approx(0.8708, abs=1e-3)
    assert Lomax(9, 8).layer_mean(0.0, b) == pytest.approx(oracle, rel=1e-12)


def test_empty_layer_and_full_mean():
    for d in PARAMETRIC:
        assert d.layer_mean(1.3, 1.3) == 0.0
        assert d.layer_second_moment_part(1.3, 1.3) == 0.0
    assert Exponential(1.0).layer_mean(0.0, math.inf) == pytest.approx(1.0)


def test_uniform_second_moment_part_is_ex2():
    assert Uniform(0, 1).layer_second_moment_part(0.0, 1.0) == pytest.approx(1.0 / 3.0)


@pytest.mark.parametrize("d", PARAMETRIC, ids=lambda d: repr(d))
def test_layer_moments_match_quadrature(d):
    hi = d.quantile(0.995) if math.isinf(d.support()[1]) else d.support()[1]
    lo = max(0.0, d.support()[0])
    for a, b in [(lo, hi), (lo + 0.3 * (hi - lo), lo + 0.9 * (hi - lo)), (0.0, 0.5 * hi)]:
        if b <= a:
            continue
        assert d.layer_mean(a, b) == pytest.approx(quad_layer_mean(d, a, b), rel=1e-6, abs=1e-12)
        assert d.layer_second_moment_part(a, b) == pytest.approx(
            quad_layer_second(d, a, b), rel=1e-6, abs=1e-12
        )


def test_unbounded_cap_layers():
    # +inf cap is a value, not a sentinel
    assert Lomax(9, 8).layer_mean(2.0, math.inf) == pytest.approx(
        quad_layer_mean(Lomax(9, 8), 2.0, 60_000.0), rel=1e-5
    )
    assert Exponential(0.5).layer_second_moment_part(1.0, math.inf) == pytest.approx(
        quad_layer_second(Exponential(0.5), 1.0, 400.0), rel=1e-8
    )
    assert Normal(10, 2).layer_mean(12.0, math.inf) == pytest.approx(
        quad_layer_mean(Normal(10, 2), 12.0, 40.0), rel=1e-8
    )
    assert Lomax(0.8, 1.0).layer_mean(0.0, math.inf) == math.inf
    assert Lomax(1.7, 1.0).layer_second_moment_part(0.0, math.inf) == math.inf


def test_layer_mean_monte_carlo():
    d = Lomax(2.5, 1.0)
    a, b = 0.2, 3.0
    u = RNG.random(1_000_000) * (1 - 1e-12) + 1e-12
    x = d.scale * np.expm1(-np.log1p(-u) / d.shape)
    ceded = np.clip(x, a, b) - a
    se = ceded.std(ddof=1) / 1000.0
    assert d.layer_mean(a, b) == pytest.approx(float(ceded.mean()), abs=3 * se)


def test_layer_domain_errors():
    d = Exponential(1.0)
    with pytest.raises(ValueError):
        d.layer_mean(2.0, 1.0)
    with pytest.raises(ValueError):
        d.layer_mean(-0.5, 1.0)
    with pytest.raises(ValueError):
        d.layer_second_moment_part(3.0, 2.0)


@given(
    points=st.lists(st.floats(0.0, 20.0), min_size=3, max_size=3).map(sorted),
    idx=st.integers(0, len(PARAMETRIC) - 1),
)
@settings(max_examples=120, deadline=None)
def test_layer_mean_additivity(points, idx):
    a, b, c = points
    d = PARAMETRIC[idx]
    lhs = d.layer_mean(a, b) + d.layer_mean(b, c)
    assert lhs == pytest.approx(d.layer_mean(a, c), abs=1e-9)


def test_variance_identity_on_layers():
    # Var(g) = second_moment_part - layer_mean^2, with g capped at the 95% point
    for d in [Lomax(9, 8), Exponential(1.0), Uniform(0, 1), Normal(10, 2)]:
        a, b = 0.1, d.quantile(0.95)
        m = d.layer_mean(a, b)
        s = d.layer_second_moment_part(a, b)
        u = RNG.random(400_000) * (1 - 1e-12) + 1e-12
        x = np.array([d.quantile(v) for v in u[:200_000]])
        g = np.clip(x, a, b) - a
        assert s - m * m == pytest.approx(float(g.var(ddof=1)), rel=0.02)


# ---------------------------------------------------- quantile integrals


@pytest.mark.parametrize("d", PARAMETRIC, ids=lambda d: repr(d))
def test_quantile_integrals_match_quadrature(d):
    for lo, hi in [(0.1, 0.9), (0.0, 0.5), (0.85, 0.999), (0.3, 0.3)]:
        oracle, err = integrate.quad(d.quantile, lo, hi, limit=400) if hi > lo else (0.0, 0.0)
        assert d.quantile_integral(lo, hi) == pytest.approx(oracle, rel=1e-8, abs=1e-10)
        oracle2, _ = (
            integrate.quad(lambda u: d.quantile(u) ** 2, lo, hi, limit=400) if hi > lo else (0.0, 0.0)
        )
        assert d.quantile_square_integral(lo, hi) == pytest.approx(oracle2, rel=1e-7, abs=1e-10)


def test_quantile_integral_to_one_is_mean():
    for d in [Lomax(9, 8), Lomax(6, 5), Exponential(0.5), Uniform(2, 7), Normal(10, 2)]:
        assert d.quantile_integral(0.0, 1.0) == pytest.approx(d.mean(), rel=1e-10)
        assert d.quantile_square_integral(0.0, 1.0) - d.mean() ** 2 == pytest.approx(
            d.variance(), rel=1e-9
        )


def test_quantile_integral_divergence():
    with pytest.raises(DivergenceError):
        Lomax(1.0, 2.0).quantile_integral(0.0, 1.0)
    with pytest.raises(DivergenceError):
        Lomax(0.8, 1.0).quantile_integral(0.5, 1.0)
    with pytest.raises(DivergenceError):
        Lomax(2.0, 1.0).quantile_square_integral(0.5, 1.0)
    # strictly interior windows stay finite even for infinite-mean laws
    val = Lomax(0.8, 1.0).quantile_integral(0.5, 0.999)
    ref, _ = integrate.quad(Lomax(0.8, 1.0).quantile, 0.5, 0.999, limit=400)
    assert val == pytest.approx(ref, rel=1e-8)


def test_discrete_quantile_integral_exact():
    d = Discrete([(0.0, 0.25), (1.0, 0.25), (4.0, 0.5)])
    assert d.quantile_integral(0.0, 1.0) == pytest.approx(d.mean())
    # window straddling an atom boundary: 0.25 of value 1 plus 0.15 of value 4
    assert d.quantile_integral(0.25, 0.65) == pytest.approx(1.0 * 0.25 + 4.0 * 0.15)
    assert d.quantile_square_integral(0.5, 1.0) == pytest.approx(16.0 * 0.5)


@given(
    lo=st.floats(0.0, 1.0),
    mid=st.floats(0.0, 1.0),
    hi=st.floats(0.0, 1.0),
    idx=st.integers(0, len(PARAMETRIC) - 1),
)
@settings(max_examples=120, deadline=None)
def test_quantile_integral_additivity(lo, mid, hi, idx):
    a, b, c = sorted([lo, mid, hi])
    d = PARAMETRIC[idx]
    if isinstance(d, Lomax) and d.shape <= 2.0 and c == 1.0:
        c = 0.999
        b = min(b, c)
        a = min(a, b)
    both = d.quantile_integral(a, b) + d.quantile_integral(b, c)
    assert both == pytest.approx(d.quantile_integral(a, c), abs=1e-10, rel=1e-10)


# ----------------------------------------------------------- tail shape


def test_tail_shape_examples():
    assert Lomax(9, 8).tail_shape(0.9).concave_beyond is True
    u = Uniform(0, 1).tail_shape(0.5)
    assert u.convex_beyond and u.concave_beyond
    assert Normal(0, 1).tail_shape(0.5).concave_beyond is True
    assert Normal(0, 1).tail_shape(0.3).concave_beyond is False
    d = Discrete([(1.0, 0.5), (2.0, 0.5)]).tail_shape(0.5)
    assert not d.convex_beyond and not d.concave_beyond


def test_tail_shape_numeric_agrees_with_analytic():
    cases = [
        (Lomax(9, 8), 0.9),
        (Lomax(2.5, 1.0), 0.5),
        (Exponential(1.0), 0.85),
        (Uniform(0, 1), 0.4),
        (PointMass(5.0), 0.6),
        (Normal(0, 1), 0.5),
        (Normal(0, 1), 0.7),
        (Normal(0, 1), 0.3),
    ]
    for d, alpha in cases:
        analytic = d.tail_shape(alpha)
        numeric = tail_shape_numeric(d, alpha)
        assert numeric.convex_beyond == analytic.convex_beyond, (d, alpha)
        assert numeric.concave_beyond == analytic.concave_beyond, (d, alpha)


# --------------------------------------------------------- serialization


def test_json_roundtrip():
    originals = PARAMETRIC + [Discrete([(0.0, 0.125), (2.0, 0.375), (7.5, 0.5)])]
    for d in originals:
        blob = json.dumps(d.to_dict())
        back = from_dict(json.loads(blob))
        assert back == d


def test_from_dict_rejects_unknown():
    with pytest.raises(ValueError):
        from_dict({"family": "weibull", "k": 2})
    with pytest.raises(ValueError):
        from_dict({"shape": 2})
    with pytest.raises(ValueError):
        from_dict({"family": "lomax", "shape": 2})


def test_discrete_construction_rules():
    with pytest.raises(ValueError):
        Discrete([])
    with pytest.raises(ValueError):
        Discrete([(1.0, 0.5), (2.0, 0.4)])
    with pytest.raises(ValueError):
        Discrete([(-1.0, 1.0)])
    with pytest.raises(ValueError):
        Discrete([(1.0, 0.0), (2.0, 1.0)])
    merged = Discrete([(1.0, 0.25), (1.0, 0.25), (2.0, 0.5)])
    assert len(merged.values) == 2
    assert merged.cdf(1.0) == pytest.approx(0.5)


def test_parameter_validation():
    with pytest.raises(ValueError):
        Lomax(0.0, 1.0)
    with pytest.raises(ValueError):
        Lomax(2.0, -1.0)
    with pytest.raises(ValueError):
        Exponential(0.0)
    with pytest.raises(ValueError):
        Uniform(1.0, 1.0)
    with pytest.raises(ValueError):
        Normal(0.0, 0.0)
    with pytest.raises(ValueError):
        PointMass(-2.0)
