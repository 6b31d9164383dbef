import itertools

import pytest
from hypothesis import given, strategies as st

from twinmul.field import (DivisionByZero, FieldElem, FieldError, ModulusMismatch,
                           PrimeField, fe_add, fe_inv, fe_mul)

SMALL = [2, 3, 5, 7]


def el(v, p):
    return FieldElem(v, p)


@pytest.mark.parametrize("a,b,p,want", [(1, 1, 2, 0), (0, 4, 5, 4), (3, 4, 5, 2)])
def test_add_examples(a, b, p, want):
    assert fe_add(el(a, p), el(b, p), PrimeField(p)).value == want


@pytest.mark.parametrize("a,b,p,want", [(1, 6, 7, 6), (2, 3, 5, 1), (0, 4, 5, 0)])
def test_mul_examples(a, b, p, want):
    assert fe_mul(el(a, p), el(b, p), PrimeField(p)).value == want


@pytest.mark.parametrize("a,p,want", [(1, 11, 1), (2, 5, 3), (4, 7, 2)])
def test_inv_examples(a, p, want):
    assert fe_inv(el(a, p), PrimeField(p)).value == want


def test_inverse_of_zero_raises():
    with pytest.raises(DivisionByZero):
        fe_inv(el(0, 5), PrimeField(5))


def test_mixed_moduli_raise():
    with pytest.raises(ModulusMismatch):
        fe_add(el(1, 3), el(1, 5), PrimeField(5))


@pytest.mark.parametrize("p", [0, 1, 4, 9, 15])
def test_non_prime_moduli_rejected(p):
    with pytest.raises(FieldError):
        PrimeField(p)


def test_extension_field_named_in_error():
    with pytest.raises(FieldError, match="extension"):
        PrimeField(8)


def test_residue_range_enforced():
    with pytest.raises(FieldError):
        FieldElem(5, 5)


@pytest.mark.parametrize("p", SMALL)
def test_axioms_exhaustive(p):
    F = PrimeField(p)
    for a, b, c in itertools.product(range(p), repeat=3):
        assert F.add(a, b) == F.add(b, a)
        assert F.mul(a, b) == F.mul(b, a)
        assert F.add(F.add(a, b), c) == F.add(a, F.add(b, c))
        assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
        assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
    for a in range(1, p):
        assert F.mul(a, F.inv(a)) == 1


@given(st.sampled_from([11, 13, 101, 257, 65537]), st.integers(), st.integers())
def test_axioms_random_large(p, a, b):
    F = PrimeField(p)
    a, b = a % p, b % p
    assert F.add(a, b) == (a + b) % p
    assert F.mul(a, b) == (a * b) % p
    assert F.sub(F.add(a, b), b) == a
    if a:
        assert F.mul(a, F.inv(a)) == 1


def test_binary_path_matches_generic():
    F = PrimeField(2)
    for a, b in itertools.product(range(2), repeat=2):
        assert F.add(a, b) == (a + b) % 2
        assert F.mul(a, b) == (a * b) % 2
