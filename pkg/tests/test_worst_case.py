"""Worst-case aggregation bounds, cross-checked three independent ways.

The simplex solver is validated against the two-risk quantile-split bound,
exhaustive coupling enumeration on small discrete laws, the rearrangement
heuristic, and a from-scratch composition-grid brute force written here.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from cedeopt.distributions import (
    Discrete,
    DivergenceError,
    Exponential,
    Lomax,
    Normal,
    PointMass,
    Uniform,
)
from cedeopt.risk_measures import RiskLevels, rvar
from cedeopt.search import SearchConfig
from cedeopt.worst_case import (
    SimplexPoint,
    comonotonic_aggregate,
    makarov_two,
    oracle_max_var_discrete,
    oracle_rearrangement,
    read_matrix_csv,
    simplex_rvar_bound,
    simplex_var_bound,
    tail_quantile_matrix,
)

# coarse settings for property tests where only inequalities are asserted
FAST = SearchConfig(gamma0_points=31, simplex_steps=40, coord_rounds=12, t_points=301)


def eval_witness(marginals, point: SimplexPoint) -> float:
    return sum(
        rvar(d, RiskLevels(beta=g, alpha=point.gamma0))
        for d, g in zip(marginals, point.parts)
    )


def left_discretized(d, m: int) -> Discrete:
    atoms = [(d.quantile_right(0.0), 1.0 / m)]
    atoms += [(d.quantile(j / m), 1.0 / m) for j in range(1, m)]
    return Discrete(atoms)


def right_discretized(d, m: int) -> Discrete:
    # finite support only, otherwise the top atom is infinite
    return Discrete([(d.quantile((j + 1) / m), 1.0 / m) for j in range(m)])


class TestSimplexPoint:
    def test_valid(self):
        p = SimplexPoint(gamma=(0.05, 0.03, 0.02), total=0.1, floor=0.01)
        assert p.gamma0 == 0.05
        assert p.parts == (0.03, 0.02)

    def test_rejects_negative_component(self):
        with pytest.raises(ValueError, match="negative"):
            SimplexPoint(gamma=(0.05, -0.01, 0.06), total=0.1)

    def test_rejects_gamma0_below_floor(self):
        with pytest.raises(ValueError, match="floor"):
            SimplexPoint(gamma=(0.01, 0.09), total=0.1, floor=0.02)

    def test_rejects_sum_mismatch(self):
        with pytest.raises(ValueError, match="sum"):
            SimplexPoint(gamma=(0.05, 0.04), total=0.1)

    def test_rejects_missing_parts(self):
        with pytest.raises(ValueError, match="at least one"):
            SimplexPoint(gamma=(0.1,), total=0.1)


class TestSimplexRvarBound:
    def test_single_marginal_equals_plain_rvar(self):
        cases = [
            (Lomax(9.0, 8.0), 0.1, 0.05),
            (Exponential(1.0), 0.05, 0.1),
            (Uniform(0.0, 1.0), 0.2, 0.3),
            (Lomax(9.0, 8.0), 0.0, 0.1),
        ]
        for d, beta, alpha in cases:
            b = simplex_rvar_bound([d], beta=beta, alpha=alpha)
            direct = rvar(d, RiskLevels(beta, alpha))
            assert b.value == pytest.approx(direct, abs=1e-6)
            assert b.assumptions_met

    def test_two_point_masses(self):
        b = simplex_rvar_bound([PointMass(3.0), PointMass(3.0)], beta=0.1, alpha=0.05)
        assert b.value == pytest.approx(6.0, abs=1e-9)

    def test_vanishing_window_approaches_var_bound(self):
        d = Lomax(9.0, 8.0)
        b = simplex_rvar_bound([d, d], beta=0.1, alpha=1e-6)
        assert b.value == pytest.approx(6.3194, abs=1e-2)
        assert b.witness.gamma0 >= 1e-6 - 1e-12

    def test_witness_reproduces_value(self):
        marginals = [Lomax(9.0, 8.0), Lomax(6.0, 5.0)]
        b = simplex_rvar_bound(marginals, beta=0.08, alpha=0.04)
        assert abs(eval_witness(marginals, b.witness) - b.value) <= 1e-10
        assert abs(sum(b.witness.gamma) - 0.12) <= 1e-12

    def test_assumption_flag_when_tail_not_concave(self):
        marginals = [Normal(10.0, 2.0), Normal(8.0, 1.0)]
        b = simplex_rvar_bound(marginals, beta=0.6, alpha=0.1)
        assert not b.assumptions_met
        assert "upper bound" in b.note
        como = comonotonic_aggregate(marginals, RiskLevels(0.6, 0.1))
        assert b.value >= como - 1e-9

    def test_divergent_everywhere_raises(self):
        with pytest.raises(DivergenceError):
            simplex_rvar_bound([Lomax(0.9, 1.0)], beta=0.0, alpha=0.05)

    def test_rejects_zero_window(self):
        with pytest.raises(ValueError, match="window"):
            simplex_rvar_bound([Lomax(9.0, 8.0)], beta=0.1, alpha=0.0)


class TestSimplexVarBound:
    def test_agrees_with_two_risk_split_on_random_pairs(self):
        rng = np.random.default_rng(20260819)
        for _ in range(20):
            pair = []
            for _ in range(2):
                if rng.random() < 0.5:
                    pair.append(Lomax(rng.uniform(2.2, 9.0), rng.uniform(0.5, 8.0)))
                else:
                    pair.append(Exponential(rng.uniform(0.2, 2.0)))
            alpha = rng.uniform(0.7, 0.97)
            b = simplex_var_bound(pair, alpha)
            mk, _ = makarov_two(pair[0], pair[1], alpha)
            assert abs(b.value - mk) <= 1e-4
            assert b.assumptions_met

    def test_symmetric_lomax_pair(self):
        d = Lomax(9.0, 8.0)
        b = simplex_var_bound([d, d], 0.9)
        assert b.value == pytest.approx(6.3194, abs=1e-3)
        assert b.value == pytest.approx(2.0 * d.quantile(0.95), abs=1e-6)

    def test_three_identical_marginals_match_symmetric_reduction(self):
        # by symmetry the inner offsets are equal, leaving one scalar to
        # optimize; an interior shared window beats the plain-quantile split
        d = Lomax(9.0, 8.0)
        total = 0.1

        def symmetric_value(g0):
            g0 = min(max(g0, 1e-12), total)
            return 3.0 * rvar(d, RiskLevels((total - g0) / 3.0, g0))

        ref = minimize_scalar(
            symmetric_value, bounds=(1e-12, total), method="bounded",
            options={"xatol": 1e-12},
        )
        b = simplex_var_bound([d, d, d], 0.9)
        assert b.value == pytest.approx(ref.fun, abs=1e-8)
        assert b.witness.gamma0 > 0.01
        assert b.value < 3.0 * d.quantile(1.0 - total / 3.0) - 0.1

    def test_three_marginals_beat_composition_brute_force(self):
        marginals = [Lomax(9.0, 8.0), Lomax(6.0, 5.0), Exponential(0.5)]
        alpha = 0.9
        steps = 30
        total = 1.0 - alpha
        brute = math.inf
        for i0 in range(steps + 1):
            g0 = total * i0 / steps
            for i1 in range(steps + 1 - i0):
                for i2 in range(steps + 1 - i0 - i1):
                    parts = (
                        total * i1 / steps,
                        total * i2 / steps,
                        max(0.0, total * (steps - i0 - i1 - i2) / steps),
                    )
                    brute = min(
                        brute,
                        sum(
                            rvar(d, RiskLevels(g, g0))
                            for d, g in zip(marginals, parts)
                        ),
                    )
        b = simplex_var_bound(marginals, alpha)
        assert b.value <= brute + 1e-6
        assert brute - b.value <= 5e-3

    def test_witness_reproduces_value(self):
        marginals = [Lomax(9.0, 8.0), Lomax(9.0, 8.0), Lomax(9.0, 8.0)]
        b = simplex_var_bound(marginals, 0.9)
        assert abs(eval_witness(marginals, b.witness) - b.value) <= 1e-10

    def test_dominates_comonotonic_and_independent_mc(self):
        rng = np.random.default_rng(np.random.Philox(7))
        n_draws = 10**6
        cases = [
            ((Lomax(9.0, 8.0), Lomax(9.0, 8.0)), 0.9),
            ((Lomax(2.5, 1.0), Lomax(6.0, 5.0)), 0.95),
        ]
        for (d1, d2), alpha in cases:
            b = simplex_var_bound([d1, d2], alpha)
            como = d1.quantile(alpha) + d2.quantile(alpha)
            assert b.value >= como - 1e-9
            u = rng.random((2, n_draws))
            draws = sum(
                d.scale * ((1.0 - u[i]) ** (-1.0 / d.shape) - 1.0)
                for i, d in enumerate((d1, d2))
            )
            # order-statistic lower confidence bound stands in for -3 SE
            k = math.ceil(alpha * n_draws) - math.ceil(
                3.0 * math.sqrt(n_draws * alpha * (1.0 - alpha))
            )
            mc_low = np.partition(draws, k - 1)[k - 1]
            assert b.value >= mc_low

    def test_partial_divergence_stays_finite(self):
        # infinite-mean component: windows touching u=1 blow up but the
        # optimum avoids them
        b = simplex_var_bound([Lomax(0.9, 1.0), Lomax(9.0, 8.0)], 0.9)
        assert math.isfinite(b.value)
        assert b.assumptions_met

    def test_assumption_flag_on_mixed_tail_shapes(self):
        mixed = [Discrete([(0.0, 0.5), (1.0, 0.5)]), Lomax(9.0, 8.0)]
        b = simplex_var_bound(mixed, 0.8)
        assert not b.assumptions_met
        assert "upper bound" in b.note

    def test_worker_count_does_not_change_result(self):
        marginals = [Lomax(9.0, 8.0), Exponential(1.0)]
        serial = simplex_var_bound(marginals, 0.9, SearchConfig(workers=1))
        threaded = simplex_var_bound(marginals, 0.9, SearchConfig(workers=4))
        assert serial.value == threaded.value
        assert serial.witness.gamma == threaded.witness.gamma

    def test_rejects_bad_level(self):
        with pytest.raises(ValueError):
            simplex_var_bound([Lomax(9.0, 8.0)], 1.0)


class TestMakarovTwo:
    def test_uniform_pair_flat_split(self):
        value, t_star = makarov_two(Uniform(0.0, 1.0), Uniform(0.0, 1.0), 0.9)
        assert value == 1.9
        assert t_star == 0.0

    def test_symmetric_lomax_pair(self):
        d = Lomax(9.0, 8.0)
        value, t_star = makarov_two(d, d, 0.9)
        assert value == pytest.approx(6.3194, abs=1e-3)
        assert value == pytest.approx(2.0 * d.quantile(0.95), abs=1e-8)
        assert t_star == pytest.approx(0.05, abs=1e-6)

    def test_asymmetric_pair_matches_scalar_oracle(self):
        d1, d2 = Lomax(9.0, 8.0), Lomax(6.0, 5.0)
        value, t_star = makarov_two(d1, d2, 0.9)

        def split(t):
            return d1.quantile(min(0.9 + t, 1.0 - 1e-15)) + d2.quantile(1.0 - t)

        ref = minimize_scalar(
            split, bounds=(1e-15, 0.1 - 1e-15), method="bounded",
            options={"xatol": 1e-14},
        )
        assert value == pytest.approx(ref.fun, abs=1e-8)
        assert value == pytest.approx(6.3944, abs=1e-3)
        assert t_star == pytest.approx(0.052, abs=2e-3)

    def test_infinite_endpoints_tolerated(self):
        # q(1) is infinite for both, so both endpoints of the split blow up
        value, t_star = makarov_two(Lomax(2.0, 3.0), Lomax(2.5, 1.0), 0.8)
        assert math.isfinite(value)
        assert 0.0 < t_star < 0.2

    def test_rejects_bad_level(self):
        with pytest.raises(ValueError):
            makarov_two(Uniform(0.0, 1.0), Uniform(0.0, 1.0), 0.0)


class TestComonotonicAggregate:
    def test_lomax_pair_var(self):
        v = comonotonic_aggregate(
            [Lomax(9.0, 8.0), Lomax(9.0, 8.0)], RiskLevels(beta=0.15, alpha=0.0)
        )
        assert v == pytest.approx(3.7545, abs=1e-3)

    def test_point_masses(self):
        v = comonotonic_aggregate(
            [PointMass(2.0), PointMass(3.0)], RiskLevels(beta=0.1, alpha=0.05)
        )
        assert v == pytest.approx(5.0, abs=1e-12)

    def test_uniform_pair_es(self):
        v = comonotonic_aggregate(
            [Uniform(0.0, 1.0), Uniform(0.0, 1.0)], RiskLevels.es_at(0.5)
        )
        assert v == pytest.approx(1.5, abs=1e-9)


class TestEnumerationOracle:
    def test_three_atom_uniform_pair(self):
        d = Discrete([(0.0, 1 / 3), (1.0, 1 / 3), (2.0, 1 / 3)])
        assert oracle_max_var_discrete([d, d], 2 / 3) == pytest.approx(3.0)

    def test_two_atom_uniform_pair_antithetic(self):
        d = Discrete([(0.0, 0.5), (1.0, 0.5)])
        assert oracle_max_var_discrete([d, d], 0.5) == pytest.approx(1.0)

    def test_single_atom_pair(self):
        d = Discrete([(4.5, 1.0)])
        assert oracle_max_var_discrete([d, d], 0.7) == pytest.approx(9.0)

    def test_three_two_atom_marginals(self):
        d = Discrete([(0.0, 0.5), (1.0, 0.5)])
        assert oracle_max_var_discrete([d, d, d], 0.5) == pytest.approx(1.0)

    def test_validation(self):
        d3 = Discrete([(0.0, 1 / 3), (1.0, 1 / 3), (2.0, 1 / 3)])
        with pytest.raises(ValueError, match="2 or 3"):
            oracle_max_var_discrete([d3], 0.5)
        big = left_discretized(Lomax(9.0, 8.0), 9)
        with pytest.raises(ValueError, match="limited"):
            oracle_max_var_discrete([big, big], 0.5)
        seven = left_discretized(Lomax(9.0, 8.0), 7)
        with pytest.raises(ValueError, match="limited"):
            oracle_max_var_discrete([seven, seven, seven], 0.5)
        lopsided = Discrete([(0.0, 0.25), (1.0, 0.75)])
        with pytest.raises(ValueError, match="equiprobable"):
            oracle_max_var_discrete([lopsided, lopsided], 0.5)
        two = Discrete([(0.0, 0.5), (1.0, 0.5)])
        with pytest.raises(ValueError, match="atom count"):
            oracle_max_var_discrete([two, d3], 0.5)
        with pytest.raises(ValueError, match="level"):
            oracle_max_var_discrete([two, two], 0.0)

    def test_left_discretization_never_beats_split_bound(self):
        # coarsening every quantile downward can only shrink the worst case
        cases = [
            (Lomax(9.0, 8.0), Lomax(9.0, 8.0), 0.75),
            (Lomax(9.0, 8.0), Lomax(6.0, 5.0), 0.5),
            (Lomax(2.5, 1.0), Exponential(1.0), 0.75),
            (Exponential(1.0), Exponential(0.5), 0.5),
            (Lomax(6.0, 5.0), Exponential(2.0), 0.625),
            (Lomax(3.0, 2.0), Lomax(9.0, 8.0), 0.75),
        ]
        m = 8
        for d1, d2, alpha in cases:
            mk, _ = makarov_two(d1, d2, alpha)
            left = oracle_max_var_discrete(
                [left_discretized(d1, m), left_discretized(d2, m)], alpha
            )
            assert left <= mk + 1e-9
            spacing = sum(
                max(d.quantile((j + 1) / m) - d.quantile(j / m) for j in range(1, m - 1))
                for d in (d1, d2)
            )
            assert left >= mk - spacing - 1e-9

    def test_bounded_supports_sandwich_the_split_bound(self):
        cases = [
            (Uniform(0.0, 1.0), Uniform(0.0, 1.0), 0.75),
            (Uniform(0.0, 1.0), Uniform(0.0, 1.0), 0.5),
            (Uniform(2.0, 7.0), Uniform(0.0, 1.0), 0.75),
            (Uniform(2.0, 7.0), Uniform(2.0, 7.0), 0.5),
        ]
        m = 8
        for d1, d2, alpha in cases:
            mk, _ = makarov_two(d1, d2, alpha)
            left = oracle_max_var_discrete(
                [left_discretized(d1, m), left_discretized(d2, m)], alpha
            )
            right = oracle_max_var_discrete(
                [right_discretized(d1, m), right_discretized(d2, m)], alpha
            )
            assert left <= mk + 1e-9
            assert mk <= right + 1e-9


class TestRearrangement:
    def test_identical_three_atom_columns(self):
        got = oracle_rearrangement(np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]))
        assert got.value == pytest.approx(2.0)
        assert got.converged
        assert got.sweeps == 2

    def test_single_column_is_its_own_quantile(self):
        m = tail_quantile_matrix([Lomax(9.0, 8.0)], 0.9, 50)
        got = oracle_rearrangement(m)
        assert got.value == pytest.approx(Lomax(9.0, 8.0).quantile(0.9), abs=1e-12)
        assert got.converged

    def test_constant_columns(self):
        got = oracle_rearrangement(np.full((10, 2), 3.0))
        assert got.value == pytest.approx(6.0)
        assert got.converged

    def test_matches_split_bound_on_fine_grid(self):
        d = Lomax(9.0, 8.0)
        matrix = tail_quantile_matrix([d, d], 0.9, 10**4)
        got = oracle_rearrangement(matrix)
        mk, _ = makarov_two(d, d, 0.9)
        assert abs(got.value - mk) <= 1e-2
        assert got.converged

    def test_three_columns_confirm_simplex_bound(self):
        d = Lomax(9.0, 8.0)
        matrix = tail_quantile_matrix([d, d, d], 0.9, 10**4)
        got = oracle_rearrangement(matrix)
        b = simplex_var_bound([d, d, d], 0.9)
        assert got.value <= b.value + 1e-9
        assert abs(got.value - b.value) <= 5e-3

    def test_sweep_budget_flag(self):
        matrix = tail_quantile_matrix([Lomax(9.0, 8.0), Lomax(9.0, 8.0)], 0.9, 100)
        got = oracle_rearrangement(matrix, max_sweeps=1)
        assert got.sweeps == 1
        assert not got.converged

    def test_deterministic(self):
        matrix = tail_quantile_matrix([Lomax(9.0, 8.0), Exponential(1.0)], 0.8, 500)
        a = oracle_rearrangement(matrix)
        b = oracle_rearrangement(matrix)
        assert a == b

    def test_rejects_empty_matrix(self):
        with pytest.raises(ValueError):
            oracle_rearrangement(np.zeros((0, 2)))


class TestTailQuantileMatrix:
    def test_shape_and_first_row(self):
        d1, d2 = Lomax(9.0, 8.0), Exponential(1.0)
        m = tail_quantile_matrix([d1, d2], 0.9, 64)
        assert m.shape == (64, 2)
        assert m[0, 0] == pytest.approx(d1.quantile(0.9))
        assert m[0, 1] == pytest.approx(d2.quantile(0.9))
        assert np.all(np.diff(m, axis=0) >= 0)

    def test_validation(self):
        with pytest.raises(ValueError):
            tail_quantile_matrix([Lomax(9.0, 8.0)], 1.0, 10)
        with pytest.raises(ValueError):
            tail_quantile_matrix([Lomax(9.0, 8.0)], 0.9, 0)


class TestCsvRoundtrip:
    def test_roundtrip(self, tmp_path):
        matrix = tail_quantile_matrix([Lomax(9.0, 8.0), Exponential(1.0)], 0.9, 16)
        path = tmp_path / "matrix.csv"
        np.savetxt(path, matrix, delimiter=",")
        again = read_matrix_csv(path)
        assert np.allclose(matrix, again, atol=1e-12)

    def test_single_row(self, tmp_path):
        path = tmp_path / "row.csv"
        path.write_text("1.5,2.5\n")
        got = read_matrix_csv(path)
        assert got.shape == (1, 2)


@given(
    shape1=st.floats(2.2, 8.0),
    scale1=st.floats(0.5, 6.0),
    rate2=st.floats(0.3, 2.0),
    alpha=st.floats(0.6, 0.95),
)
@settings(max_examples=20, deadline=None)
def test_var_bound_dominates_comonotonic(shape1, scale1, rate2, alpha):
    marginals = [Lomax(shape1, scale1), Exponential(rate2)]
    b = simplex_var_bound(marginals, alpha, FAST)
    como = sum(d.quantile(alpha) for d in marginals)
    assert b.value >= como - 1e-9


@given(
    shape=st.floats(2.2, 8.0),
    scale=st.floats(0.5, 6.0),
    rate=st.floats(0.3, 2.0),
    alpha=st.floats(0.6, 0.95),
)
@settings(max_examples=25, deadline=None)
def test_split_bound_dominates_comonotonic(shape, scale, rate, alpha):
    d1, d2 = Lomax(shape, scale), Exponential(rate)
    value, _ = makarov_two(d1, d2, alpha, FAST)
    assert value >= d1.quantile(alpha) + d2.quantile(alpha) - 1e-9
