"""Тесты особых точек, оценки размерности и вердиктов c-регулярности.

Все подсчёты точные (полный перебор), поэтому ожидаемые значения
проверяются на равенство без допусков.
"""

import math

import numpy as np
import pytest

from src import linalg
from src.config import Variety, Verdict
from src.errors import InsufficientLevelsError, NotHomogeneousError
from src.fiber_census import projective_count
from src.finite_field import make_field
from src.polynomial import MultiPoly, parse, random_poly
from src.singular_locus import (
    c_good_check,
    c_good_sweep,
    c_regularity,
    common_zeros,
    dim_estimate,
    singular_points,
)


@pytest.fixture
def F3():
    return make_field(3)


@pytest.mark.parametrize("p,d,N", [(5, 3, 3), (3, 2, 4), (7, 2, 3), (2, 3, 3)])
def test_fermat_hypersurfaces_are_smooth(p, d, N):
    H = parse(" + ".join(f"x{i}^{d}" for i in range(N)), make_field(p), N)
    for n in (1, 2):
        assert singular_points(H, n).count == 0
    report = c_regularity(H, n_max=2)
    assert report.empty and report.confident
    assert report.codim == N


def test_two_lines_meet_in_one_point(F3):
    H = parse("x0*x1", F3, 3)
    for n in (1, 2, 3):
        result = singular_points(H, n)
        assert result.count == 1
        assert result.points == [["0", "0", "1"]]


def test_quadric_cone_has_only_its_vertex(F3):
    H = parse("x0*x1 + x2*x3", F3, 5)
    result = singular_points(H, 1)
    assert result.count == 1
    assert result.points == [["0", "0", "0", "0", "1"]]


def test_singular_points_need_homogeneous_input(F3):
    with pytest.raises(NotHomogeneousError):
        singular_points(parse("x0*x1 + x0", F3, 2), 1)


def test_dim_estimate_examples():
    assert dim_estimate({1: 4, 2: 10, 3: 28}, 3) == (1, True)
    assert dim_estimate({1: 1, 2: 1, 3: 1}, 3) == (0, True)
    assert dim_estimate({1: 0, 2: 0}, 3) == (None, True)
    assert dim_estimate({1: 0}, 3) == (None, False)
    with pytest.raises(InsufficientLevelsError):
        dim_estimate({1: 0, 2: 5}, 3)
    with pytest.raises(InsufficientLevelsError):
        dim_estimate({}, 3)


def test_inconsistent_growth_is_not_confident():
    d_hat, confident = dim_estimate({1: 1, 2: 1, 3: 27}, 3)
    assert d_hat == 3
    assert not confident


def test_smooth_quadric_is_regular_for_every_c_up_to_n(F3):
    report = c_regularity(parse("x0*x1 + x2*x3", F3, 4), n_max=2, c_values=[1, 2, 3, 4, 5])
    assert report.empty and report.codim == 4
    assert report.regular == {1: True, 2: True, 3: True, 4: True, 5: False}


def test_two_lines_have_codim_one(F3):
    report = c_regularity(parse("x0*x1", F3, 3), n_max=3, c_values=[1, 2])
    assert report.counts == {1: 1, 2: 1, 3: 1}
    assert report.dim_estimate == 0 and report.confident
    assert report.codim == 1
    assert report.regular == {1: True, 2: False}
    assert report.ambient_codim == 2


def test_quadric_cone_codim(F3):
    report = c_regularity(parse("x0*x1 + x2*x3", F3, 5), n_max=2)
    assert report.codim == 3
    assert report.confident


def test_levels_beyond_budget_are_skipped(F3):
    report = c_regularity(parse("x0*x1", F3, 3), n_max=3, budget=3**6)
    assert report.skipped == [3]
    assert sorted(report.counts) == [1, 2]


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("dim", [0, 1, 2])
def test_planted_linear_subspaces_recover_dimension(p, dim):
    k = make_field(p)
    rng = np.random.default_rng(10 * p + dim)
    M = linalg.random_invertible(k, 5, rng)
    forms = [MultiPoly.linear_form(k, row) for row in M[: 4 - dim]]
    counts = {n: common_zeros(forms, n).count for n in (1, 2, 3)}
    for n, count in counts.items():
        assert count == sum(p ** (n * i) for i in range(dim + 1))
    assert dim_estimate(counts, p) == (dim, True)


def _smooth_plane_cubics(p, wanted):
    k = make_field(p)
    found, seed = [], 0
    while len(found) < wanted:
        H = random_poly(k, 3, 3, homogeneous=True, seed=seed)
        seed += 1
        if H.degree != 3:
            continue
        if all(singular_points(H, n).count == 0 for n in (1, 2)):
            found.append(H)
    return found


@pytest.mark.parametrize("p", [5, 7, 11, 13])
def test_hasse_bound_on_smooth_plane_cubics(p):
    for H in _smooth_plane_cubics(p, 20):
        points = projective_count(H, 1).points
        assert abs(points - (p + 1)) <= 2 * math.sqrt(p)


def test_hyperbolic_quadric_is_3_good(F3):
    verdict = c_good_check(parse("x0*x1 + x2*x3", F3, 4), 3, n_max=2)
    assert verdict.overall is Verdict.GOOD
    codims = {(v.variety, v.t): v.codim for v in verdict.varieties}
    assert codims[(Variety.X, None)] == 4
    assert codims[(Variety.Y, "0")] == 3
    assert codims[(Variety.Y, "1")] == 5
    assert "k_1" in verdict.t_sample_spec


def test_product_is_not_2_good(F3):
    verdict = c_good_check(parse("x0*x1", F3, 2), 2, n_max=2)
    assert verdict.overall is Verdict.NOT_GOOD
    failing = [v for v in verdict.varieties if v.regular is False]
    assert [(v.variety, v.t) for v in failing] == [(Variety.Y, "0")]


def test_c_zero_is_vacuous(F3):
    verdict = c_good_check(parse("x0*x1", F3, 2), 0)
    assert verdict.overall is Verdict.GOOD
    assert verdict.varieties == []


def test_sweep_reports_min_codim(F3):
    sweep = c_good_sweep(parse("x0*x1 + x2*x3", F3, 4), [2, 3, 4], n_max=2)
    assert sweep.min_codim == 3
    assert sweep.confident
    assert [sweep.verdicts[c].overall for c in (2, 3, 4)] == [
        Verdict.GOOD,
        Verdict.GOOD,
        Verdict.NOT_GOOD,
    ]
