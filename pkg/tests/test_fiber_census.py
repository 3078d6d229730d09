"""Tests for the census engine and the bias statistics.

Quadric fiber sizes are checked against the classical count of
Q_r = x0*x1 + x2*x3 + ... : q^{2r-1} + q^r - q^{r-1} zeros and
q^{2r-1} - q^{r-1} points on every other fiber.
"""

from fractions import Fraction

import numpy as np
import pytest

from src.errors import BudgetExceededError, NoCompletedLevelsError, UsageError
from src.fiber_census import (
    bias_estimate,
    census,
    census_naive,
    compare_same_top,
    fiber_identity_check,
    measures,
    projective_count,
    regular_count_profile,
)
from src.finite_field import FieldElement, enumerate_elements, extend, make_field
from src.polynomial import MultiPoly, parse, random_poly
from src.reports import dumps


def hyperbolic(ctx, r):
    return parse(" + ".join(f"x{2 * i}*x{2 * i + 1}" for i in range(r)), ctx, 2 * r)


HYPERBOLIC_GRID = [
    (q, r, n)
    for q in (2, 3)
    for r in (1, 2, 3)
    for n in (1, 2)
    if q ** (n * 2 * r) <= 10**8
]


@pytest.mark.parametrize("q,r,n", HYPERBOLIC_GRID)
def test_quadric_fibers_match_classical_count(q, r, n):
    Q = hyperbolic(make_field(q), r)
    c = census(Q, n)
    Qn = q**n
    assert c.counts[0] == Qn ** (2 * r - 1) + Qn**r - Qn ** (r - 1)
    for t in range(1, Qn):
        assert c.counts[t] == Qn ** (2 * r - 1) - Qn ** (r - 1)


@pytest.mark.parametrize("q,r,n", HYPERBOLIC_GRID)
def test_hyperbolic_bias_is_exact(q, r, n):
    level = measures(census(hyperbolic(make_field(q), r), n))
    assert level.delta == Fraction(1, (q**n) ** r)
    assert level.b_n == Fraction(r)
    assert isinstance(level.b_n, Fraction)


def test_naive_enumerator_agrees_with_quadric_oracle():
    for q, r in [(2, 1), (3, 1), (2, 2)]:
        c = census_naive(hyperbolic(make_field(q), r), 1)
        assert c.counts[0] == q ** (2 * r - 1) + q**r - q ** (r - 1)


@pytest.mark.parametrize("seed", range(4))
def test_compiled_census_matches_naive(seed):
    k = make_field(2, 2)
    F = random_poly(k, 2, 3, seed=seed)
    assert census(F, 1).counts == census_naive(F, 1).counts
    F3 = random_poly(make_field(3), 2, 2, seed=seed)
    assert census(F3, 2).counts == census_naive(F3, 2).counts


def test_census_of_x0x1_over_f2():
    c = census(parse("x0*x1", make_field(2), 2), 1)
    assert c.as_mapping() == {"0": 3, "1": 1}
    assert c.total == 4


def test_budget_is_enforced():
    F = random_poly(make_field(3), 4, 2, seed=0)
    with pytest.raises(BudgetExceededError) as info:
        census(F, 2, budget=1000)
    assert info.value.required == 3**8


@pytest.mark.parametrize("p", [2, 3])
def test_chevalley_warning(p):
    F_p = make_field(p)
    for seed in range(50):
        N = 3 + seed % 2
        F = random_poly(F_p, N, N - 1, seed=seed)
        F = F - MultiPoly.constant(F_p, N, F.coefficient((0,) * N))
        assert census(F, 1).counts[0] % p == 0


def test_fiber_identity_on_random_cubics():
    F3 = make_field(3)
    rng = np.random.default_rng(2024)
    for seed in range(20):
        F = random_poly(F3, 3, 3, seed=seed)
        if F.degree < 3:
            continue
        for n in (1, 2):
            k = extend(F3, n)
            affine = census(F, n)
            for code in rng.integers(0, k.size, size=3):
                t = FieldElement(k, int(code))
                report = fiber_identity_check(F, t, n, affine_census=affine)
                assert report.holds
                assert report.affine == report.y_points - report.x_points


def test_bias_of_hyperbolic_quadric():
    report = bias_estimate(parse("x0*x1+x2*x3", make_field(3), 4), n_max=2)
    assert report.b_values() == {1: Fraction(2), 2: Fraction(2)}
    assert report.bias_exact == Fraction(1, 2)
    assert report.bias_estimate == 0.5
    assert report.stabilized


def test_linear_polynomial_is_uniform():
    report = bias_estimate(parse("x0 + 2*x1", make_field(3), 2), n_max=2)
    assert all(level.uniform for level in report.levels)
    assert report.bias_exact == 0


def test_levels_beyond_budget_are_skipped():
    F = parse("x0*x1+x2*x3", make_field(3), 4)
    report = bias_estimate(F, n_max=3, budget=3**8)
    assert [level.n for level in report.levels] == [1, 2]
    assert [s.n for s in report.skipped] == [3]
    with pytest.raises(NoCompletedLevelsError):
        bias_estimate(F, n_max=2, budget=10)


def test_projective_count_of_a_conic():
    # smooth conic x0*x1 - x2^2 has q^n + 1 points
    H = parse("x0*x1 - x2^2", make_field(5), 3)
    for n in (1, 2):
        assert projective_count(H, n).points == 5**n + 1


def test_same_top_part_comparison():
    F3 = make_field(3)
    F = parse("x0*x1 + x2*x3 + x0", F3, 4)
    G = parse("x0*x1 + x2*x3 + 2", F3, 4)
    report = compare_same_top(F, G, 1)
    assert report.baseline == 27
    assert report.within_twice


@pytest.mark.parametrize("seed", range(6))
def test_compare_same_top_on_random_lower_terms(seed):
    F3 = make_field(3)
    top = random_poly(F3, 3, 3, homogeneous=True, seed=seed)
    if top.is_zero():
        pytest.skip("zero top form")
    F = top + random_poly(F3, 3, 2, seed=100 + seed)
    G = top + random_poly(F3, 3, 2, seed=200 + seed)
    for n in (1, 2):
        report = compare_same_top(F, G, n)
        assert report.baseline == (3**n) ** 2
        assert sum(report.deviations_f.values()) == 0
        assert sum(report.deviations_g.values()) == 0
        assert report.max_gap <= report.max_deviation_f + report.max_deviation_g
        assert report.within_twice


def test_compare_same_top_rejects_different_tops():
    F3 = make_field(3)
    with pytest.raises(UsageError):
        compare_same_top(parse("x0*x1", F3, 2), parse("x0^2", F3, 2), 1)


def test_regular_count_profile_of_smooth_quadric():
    # x0*x1 + x2*x3 in P^3 has (q^n + 1)^2 points; c = 2 keeps only q^{2n}
    H = parse("x0*x1 + x2*x3", make_field(3), 4)
    report = regular_count_profile(H, 2, 2)
    for level in report.levels:
        assert level.points == (3**level.n + 1) ** 2
        assert level.deviation == 2 * 3**level.n + 1
    assert report.non_increasing
    assert report.m_hat == pytest.approx(7 / 3)


@pytest.mark.parametrize("seed", range(10))
def test_census_is_identical_across_worker_counts(seed):
    F = random_poly(make_field(3), 11, 2, seed=seed)
    texts = {dumps(census(F, 1, workers=w)) for w in (1, 2, 8)}
    assert len(texts) == 1


def test_every_fiber_value_is_listed():
    k = extend(make_field(2), 2)
    c = census(parse("x0^3", make_field(2), 1), 2)
    assert len(c.counts) == k.size
    assert sum(c.counts) == k.size
    assert c.count(list(enumerate_elements(k))[1]) == 3
