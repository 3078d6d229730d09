"""Unit tests for ``src.polynomial``: parsing, printing, ring operations,
homogenization and the vectorized evaluator."""

import itertools

import numpy as np
import pytest

from src.errors import (
    CoefficientNotInFieldError,
    DimensionMismatchError,
    PolynomialSyntaxError,
    UnknownVariableError,
    ZeroPolynomialError,
)
from src.finite_field import enumerate_elements, extend, make_field
from src.polynomial import (
    MultiPoly,
    compile_poly,
    evaluate,
    homogenize,
    monomials,
    parse,
    partials,
    random_poly,
    top_homogeneous,
)


@pytest.fixture
def F3():
    return make_field(3)


def test_parse_collects_and_reduces(F3):
    P = parse("x0*x1 + x1*x0 + 4", F3, 2)
    assert P.coefficient((1, 1)) == 2
    assert P.coefficient((0, 0)) == 1
    assert str(P) == "2*x0*x1 + 1"


def test_canonical_order_is_graded_lex(F3):
    P = parse("1 + x1 + x0^2 + x0*x1^2", F3, 2)
    assert str(P) == "x0*x1^2 + x0^2 + x1 + 1"


@pytest.mark.parametrize(
    "field_spec,text,nvars",
    [
        ((3, 1, 1), "x0^2*x1 - x2 + 2", 3),
        ((2, 2, 1), "g*x0 + x1^3 + g + 1", 2),
        ((3, 1, 2), "y*x0*z + 2*y + 1", 3),
        ((2, 2, 2), "g*y*x0 + y + g*x1^2", 2),
    ],
)
def test_print_parse_round_trip(field_spec, text, nvars):
    p, m, n = field_spec
    k = extend(make_field(p, m), n)
    P = parse(text, k, nvars)
    assert parse(str(P), k, nvars) == P


def test_z_is_last_variable(F3):
    assert parse("x0*z", F3, 3) == parse("x0*x2", F3, 3)


def test_syntax_errors_carry_position(F3):
    with pytest.raises(PolynomialSyntaxError) as info:
        parse("x0 + * x1", F3, 2)
    assert info.value.position == 5
    with pytest.raises(UnknownVariableError):
        parse("x3", F3, 2)
    with pytest.raises(CoefficientNotInFieldError):
        parse("g*x0", F3, 1)
    with pytest.raises(CoefficientNotInFieldError):
        parse("y", F3, 1)
    with pytest.raises(PolynomialSyntaxError):
        parse("x0 ^ x1", F3, 2)


def test_ring_operations(F3):
    x0 = MultiPoly.variable(F3, 2, 0)
    x1 = MultiPoly.variable(F3, 2, 1)
    assert (x0 + x1) ** 3 == parse("x0^3 + x1^3", F3, 2)
    assert (x0 - x1) * (x0 + x1) == parse("x0^2 - x1^2", F3, 2)
    with pytest.raises(DimensionMismatchError):
        x0 + MultiPoly.variable(F3, 3, 0)


def test_evaluate_matches_compiled(F3):
    k = extend(F3, 2)
    P = parse("x0^2*x1 + 2*x1 + 1", F3, 2)
    compiled = compile_poly(P, k)
    points = list(itertools.product(list(enumerate_elements(k)), repeat=2))
    coords = [np.array([pt[i].code for pt in points]) for i in range(2)]
    values = compiled(coords)
    for pt, v in zip(points, values):
        assert evaluate(P, list(pt)).code == int(v)


def test_evaluate_dimension_check(F3):
    with pytest.raises(DimensionMismatchError):
        evaluate(parse("x0", F3, 2), [F3.one])


def test_top_homogeneous(F3):
    F = parse("x0*x1 + x0 + 1", F3, 2)
    assert top_homogeneous(F) == parse("x0*x1", F3, 2)
    with pytest.raises(ZeroPolynomialError):
        top_homogeneous(MultiPoly.zero(F3, 2))


def test_homogenize_restricts_correctly(F3):
    F = parse("x0^2*x1 + x1 + 2", F3, 2)
    t = F3.element(1)
    H = homogenize(F, t).poly
    assert H.nvars == 3 and H.is_homogeneous() and H.degree == 3
    # z = 0 gives the top part, z = 1 gives F − t
    assert H.specialize(2, 0) == top_homogeneous(F)
    assert H.specialize(2, 1) == F - MultiPoly.constant(F3, 2, t.code)


def test_homogenize_promotes_to_the_field_of_t(F3):
    k2 = extend(F3, 2)
    F = parse("x0*x1", F3, 2)
    H = homogenize(F, k2.gen).poly
    assert H.ctx == k2
    assert str(H) == "x0*x1 + 2*y*x2^2"


def test_partials_drop_exponents_divisible_by_p(F3):
    F = parse("x0^3 + x0*x1^2", F3, 2)
    d0, d1 = partials(F)
    assert d0 == parse("x1^2", F3, 2)
    assert d1 == parse("2*x0*x1", F3, 2)


def test_monomials_counts():
    assert len(monomials(3, 2, homogeneous=True)) == 6
    assert len(monomials(3, 2)) == 10
    assert monomials(2, 1, homogeneous=True) == [(1, 0), (0, 1)]


def test_random_poly_is_deterministic(F3):
    assert random_poly(F3, 3, 3, seed=7) == random_poly(F3, 3, 3, seed=7)
    H = random_poly(F3, 3, 3, homogeneous=True, seed=1)
    assert H.is_homogeneous()


def test_linear_substitution_and_change_ring(F3):
    F = parse("x0*x1", F3, 2)
    swapped = F.linear_substitution([[0, 1], [1, 0]])
    assert swapped == F
    sheared = F.linear_substitution([[1, 1], [0, 1]])
    assert sheared == parse("x0*x1 + x1^2", F3, 2)
    k2 = extend(F3, 2)
    assert F.change_ring(k2).ctx == k2
    assert str(F.change_ring(k2)) == str(F)


# ---------------------------------------------------------------------------
# Properties on random inputs
# ---------------------------------------------------------------------------
def _random_point(k, nvars, rng):
    return [k(int(c)) for c in rng.integers(0, k.size, size=nvars)]


@pytest.mark.parametrize("p,nvars,d", [(5, 3, 3), (7, 4, 4), (3, 3, 2), (11, 2, 5)])
def test_euler_identity(p, nvars, d):
    k = make_field(p)
    for seed in range(10):
        F = random_poly(k, nvars, d, homogeneous=True, seed=seed)
        euler = MultiPoly.zero(k, nvars)
        for i, dF in enumerate(partials(F)):
            euler = euler + MultiPoly.variable(k, nvars, i) * dF
        assert euler == F.scale(k.from_int(d))


def test_random_poly_is_uniform_over_f2_linear_polynomials():
    F2 = make_field(2)
    mons = monomials(2, 1)
    seen = {key: 0 for key in itertools.product(range(2), repeat=len(mons))}
    for seed in range(1000):
        P = random_poly(F2, 2, 1, seed=seed)
        seen[tuple(P.coefficient(e) for e in mons)] += 1
    sigma = (1000 * (1 / 8) * (7 / 8)) ** 0.5
    assert len(seen) == 8
    for count in seen.values():
        assert abs(count - 125) <= 5 * sigma


@pytest.mark.parametrize("field_spec", [(3, 1, 1), (5, 1, 1), (2, 2, 1), (3, 1, 2)])
def test_evaluate_is_a_ring_homomorphism(field_spec):
    p, m, n = field_spec
    k = extend(make_field(p, m), n)
    rng = np.random.default_rng(p * 10 + n)
    for seed in range(10):
        P = random_poly(k, 3, 2, seed=seed)
        Q = random_poly(k, 3, 3, seed=seed + 100)
        for _ in range(5):
            point = _random_point(k, 3, rng)
            assert evaluate(P + Q, point) == evaluate(P, point) + evaluate(Q, point)
            assert evaluate(P * Q, point) == evaluate(P, point) * evaluate(Q, point)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_homogenization_at_z_one_is_p_minus_t(p):
    k = make_field(p)
    rng = np.random.default_rng(p)
    for seed in range(10):
        P = random_poly(k, 3, 3, seed=seed)
        if P.is_zero():
            continue
        t = k(int(rng.integers(0, p)))
        H = homogenize(P, t).poly
        for _ in range(5):
            v = _random_point(k, 3, rng)
            assert evaluate(H, v + [k.one]) == evaluate(P, v) - t


@pytest.mark.parametrize("seed", range(20))
def test_top_part_keeps_the_degree(seed):
    k = make_field(3) if seed % 2 else extend(make_field(2, 2), 2)
    P = random_poly(k, 3, 1 + seed % 4, seed=seed)
    if P.is_zero():
        pytest.skip("zero sample")
    G = top_homogeneous(P)
    assert G.degree == P.degree
    assert G.is_homogeneous()


@pytest.mark.parametrize(
    "field_spec,nvars,d",
    [((3, 1, 1), 3, 3), ((2, 2, 1), 2, 4), ((3, 1, 2), 3, 2), ((2, 2, 2), 2, 3), ((7, 1, 1), 4, 2)],
)
def test_print_parse_round_trip_on_random_polynomials(field_spec, nvars, d):
    p, m, n = field_spec
    k = extend(make_field(p, m), n)
    for seed in range(100):
        P = random_poly(k, nvars, d, seed=seed)
        assert parse(str(P), k, nvars) == P
