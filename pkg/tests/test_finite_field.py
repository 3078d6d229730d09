"""Тесты арифметики конечных полей ``src.finite_field``.

Проверяются аксиомы поля на малых полях целиком, башни расширений,
вложения k_e ⊂ k_n, извлечение корней и разбор спецификаций полей.
"""

import itertools

import numpy as np
import pytest

from src.errors import (
    DivisionByZeroError,
    FieldSpecError,
    MixedFieldsError,
    NotPrimeError,
    SizeOverflowError,
)
from src.finite_field import (
    FieldElement,
    embed,
    embed_codes,
    enumerate_elements,
    extend,
    format_modulus,
    frobenius,
    is_irreducible,
    make_field,
    parse_field_spec,
    sqrt,
)


SMALL_FIELDS = [(2, 1, 1), (3, 1, 1), (2, 2, 1), (3, 1, 2), (2, 2, 2), (5, 1, 2)]


def _field(p, m, n):
    return extend(make_field(p, m), n)


@pytest.mark.parametrize("p,m,n", SMALL_FIELDS)
def test_field_axioms_exhaustive(p, m, n):
    k = _field(p, m, n)
    elements = list(enumerate_elements(k))
    assert len(elements) == p ** (m * n)
    for a, b in itertools.product(elements, repeat=2):
        assert a + b == b + a
        assert a * b == b * a
        assert (a - b) + b == a
        if b:
            assert (a / b) * b == a
    for a, b, c in itertools.product(elements[:5], repeat=3):
        assert a * (b + c) == a * b + a * c


@pytest.mark.parametrize("p,m,n", SMALL_FIELDS)
def test_multiplicative_group_order(p, m, n):
    k = _field(p, m, n)
    for a in enumerate_elements(k, 1):
        assert a ** (k.size - 1) == k.one


def test_f4_generator_relation():
    F4 = make_field(2, 2)
    g = F4.gen
    assert g * g == g + F4.one
    assert str(g * g) == "g+1"


def test_k2_over_f3_printing_and_frobenius():
    k2 = extend(make_field(3), 2)
    y = k2.gen
    assert k2.size == 9
    # Frobenius fixes exactly F_3
    fixed = [a for a in enumerate_elements(k2) if frobenius(a) == a]
    assert [a.code for a in fixed] == [0, 1, 2]
    assert str(y * k2.element(2) + k2.one) == "2*y+1"


def test_inverse_of_zero_raises():
    F5 = make_field(5)
    with pytest.raises(DivisionByZeroError):
        F5.zero.inverse()
    with pytest.raises(ZeroDivisionError):
        F5.one / F5.zero


def test_mixed_fields_rejected():
    F3, F5 = make_field(3), make_field(5)
    with pytest.raises(MixedFieldsError):
        F3.one + F5.one
    with pytest.raises(TypeError):
        F3.one == F5.one


def test_not_prime_and_overflow():
    with pytest.raises(NotPrimeError):
        make_field(4)
    with pytest.raises(SizeOverflowError):
        make_field(2, 30)
    with pytest.raises(SizeOverflowError):
        extend(make_field(3), 20)


def test_moduli_are_irreducible_and_least():
    F2 = make_field(2)
    k = extend(F2, 3)
    assert k.ext_modulus == (1, 1, 0, 1)
    assert is_irreducible(list(k.ext_modulus), F2)
    assert not is_irreducible([1, 0, 1], F2)  # (x + 1)^2
    assert format_modulus(make_field(2, 2)) == "base: 1 + y + y^2"


@pytest.mark.parametrize("p,m,e,n", [(2, 1, 2, 4), (3, 1, 2, 4), (2, 2, 1, 3), (2, 1, 3, 6)])
def test_embedding_is_a_ring_homomorphism(p, m, e, n):
    base = make_field(p, m)
    small, large = extend(base, e), extend(base, n)
    for a, b in itertools.product(enumerate_elements(small), repeat=2):
        assert embed(a + b, large) == embed(a, large) + embed(b, large)
        assert embed(a * b, large) == embed(a, large) * embed(b, large)
    # F_q codes are fixed
    assert list(embed_codes(np.arange(base.size), small, large)) == list(range(base.size))


def test_embedding_needs_divisibility():
    base = make_field(2)
    with pytest.raises(MixedFieldsError):
        embed(extend(base, 2).gen, extend(base, 3))


@pytest.mark.parametrize("p,m,n", [(3, 1, 1), (5, 1, 1), (7, 1, 1), (3, 1, 2), (5, 1, 2), (2, 2, 1)])
def test_sqrt(p, m, n):
    k = _field(p, m, n)
    squares = {(a * a).code for a in enumerate_elements(k)}
    for a in enumerate_elements(k):
        root = sqrt(a)
        if a.code in squares:
            assert root is not None and root * root == a
        else:
            assert root is None


def test_every_element_of_fq_is_a_square_in_k2():
    F7 = make_field(7)
    k2 = extend(F7, 2)
    for a in enumerate_elements(F7):
        root = sqrt(embed(a, k2))
        assert root is not None and root * root == embed(a, k2)


def test_parse_field_spec():
    k = parse_field_spec("3^1:2")
    assert (k.p, k.m, k.n, k.size) == (3, 1, 2, 9)
    assert parse_field_spec("5").size == 5
    assert parse_field_spec(" 2^2 ").q == 4
    with pytest.raises(FieldSpecError):
        parse_field_spec("three")
    with pytest.raises(NotPrimeError):
        parse_field_spec("6^1")


def test_kernels_accept_arrays():
    k = extend(make_field(2, 2), 2)
    codes = np.arange(k.size, dtype=np.int64)
    products = k.kernel.mul(codes, codes)
    for code in range(k.size):
        assert int(products[code]) == k.mul(code, code)
    assert FieldElement(k, 5) == k(5)


# ---------------------------------------------------------------------------
# Свойства
# ---------------------------------------------------------------------------
def _power_codes(k, codes, e):
    """x^e for an array of codes by square-and-multiply on the kernel."""
    mul = k.kernel.mul
    result = np.full_like(codes, k.one.code)
    base = codes.copy()
    while e:
        if e & 1:
            result = np.asarray(mul(result, base), dtype=np.int64)
        base = np.asarray(mul(base, base), dtype=np.int64)
        e >>= 1
    return result


@pytest.mark.parametrize(
    "p,m,n",
    [(2, 1, 12), (2, 2, 6), (2, 3, 4), (3, 1, 7), (5, 1, 5), (7, 1, 4), (3, 2, 3), (11, 1, 3)],
)
def test_every_element_is_fixed_by_the_full_frobenius(p, m, n):
    k = _field(p, m, n)
    assert k.size <= 2**12
    codes = np.arange(k.size, dtype=np.int64)
    assert list(_power_codes(k, codes, k.size)) == list(codes)


@pytest.mark.parametrize("p,m,n", [(2, 1, 1), (3, 1, 2), (2, 2, 2), (5, 1, 2), (2, 1, 5), (3, 1, 3)])
def test_frobenius_is_a_ring_homomorphism(p, m, n):
    k = _field(p, m, n)
    elements = list(enumerate_elements(k))
    for a, b in itertools.product(elements, repeat=2):
        assert frobenius(a + b) == frobenius(a) + frobenius(b)
        assert frobenius(a * b) == frobenius(a) * frobenius(b)


@pytest.mark.parametrize("p,m,n", SMALL_FIELDS + [(2, 1, 10)])
def test_enumeration_resumes_at_any_offset(p, m, n):
    k = _field(p, m, n)
    full = list(enumerate_elements(k))
    assert [a.code for a in full] == list(range(k.size))
    for offset in sorted({0, 1, k.size // 3, k.size - 1, k.size}):
        assert list(enumerate_elements(k, offset)) == full[offset:]
