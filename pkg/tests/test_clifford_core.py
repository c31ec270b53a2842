import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cliffspec.clifford_core import (
    Multivector,
    conjugation,
    format_multivector,
    geometric_product as gp,
    grade_involution,
    in_gamma,
    in_pin,
    is_vector,
    kelvin_inverse,
    modulus,
    mv_inverse,
    parse_multivector,
    reversion,
    vector_embed,
)
from cliffspec.errors import DimensionMismatchError, NotInvertibleError, SingularVectorError


def e(dim, *idx):
    out = Multivector.scalar(dim)
    for i in idx:
        out = gp(out, Multivector.basis_vector(dim, i))
    return out


def test_generator_squares_to_minus_one():
    for dim in range(1, 6):
        for i in range(1, dim + 1):
            assert gp(e(dim, i), e(dim, i)).allclose(Multivector.scalar(dim, -1.0))


def test_anticommutation():
    assert gp(e(3, 1), e(3, 2)).allclose(-gp(e(3, 2), e(3, 1)))


def test_unit_is_neutral(rng):
    a = Multivector(3, rng.normal(size=8))
    assert gp(Multivector.scalar(3), a).allclose(a)
    assert gp(a, Multivector.scalar(3)).allclose(a)


def test_bivector_times_reverse():
    assert gp(e(2, 1, 2), e(2, 2, 1)).allclose(Multivector.scalar(2))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        gp(e(2, 1), e(3, 1))


def test_involutions_on_bivector():
    b = e(2, 1, 2)
    assert reversion(b).allclose(-b)
    assert conjugation(b).allclose(-b)
    assert grade_involution(b).allclose(b)


def test_involutions_fix_scalars():
    s = Multivector.scalar(4, 2.5)
    for f in (reversion, conjugation, grade_involution):
        assert f(s).allclose(s)


def test_vector_embed_and_predicate():
    assert vector_embed([1.0, 0.0, 0.0]).allclose(e(3, 1))
    assert is_vector(vector_embed(np.zeros(3)))
    assert not is_vector(e(2, 1, 2))


def test_kelvin_inverse_values():
    assert kelvin_inverse(e(3, 1)).allclose(-e(3, 1))
    assert kelvin_inverse(2.0 * e(3, 2)).allclose(-0.5 * e(3, 2))
    with pytest.raises(SingularVectorError):
        kelvin_inverse(vector_embed(np.zeros(3)))


def test_mv_inverse_values():
    one = Multivector.scalar(2)
    assert mv_inverse(one).allclose(one)
    assert mv_inverse(one + e(2, 1, 2)).allclose((one - e(2, 1, 2)) * 0.5)
    assert mv_inverse(e(3, 2)).allclose(-e(3, 2))


def test_mv_inverse_singular():
    # (1 + e123) is a zero divisor in Cl_3: (1 + e123)(1 - e123) = 1 + e123^2 = 0
    with pytest.raises(NotInvertibleError):
        mv_inverse(Multivector.scalar(3) + e(3, 1, 2, 3))


def test_modulus_values():
    assert modulus(vector_embed([3.0, 4.0])) == pytest.approx(5.0)
    assert modulus(Multivector.scalar(2)) == pytest.approx(1.0)
    assert modulus(gp(e(2, 1), 3.0 * e(2, 2))) == pytest.approx(3.0)


def test_group_membership():
    assert in_gamma(e(3, 1)) and in_pin(e(3, 1))
    assert not in_gamma(Multivector.scalar(3) + e(3, 1))
    ab = gp(vector_embed([0.6, 0.8, 0.0]), vector_embed([0.0, 0.0, 1.0]))
    assert in_pin(ab)


def test_text_round_trip(rng):
    for dim in (2, 3, 4):
        a = Multivector(dim, np.round(rng.normal(size=1 << dim), 3))
        assert parse_multivector(format_multivector(a), dim) == a


coeffs = st.lists(st.floats(-10, 10), min_size=8, max_size=8)


@settings(max_examples=200, deadline=None)
@given(coeffs, coeffs, coeffs)
def test_associativity_property(a, b, c):
    A, B, C = (Multivector(3, np.array(x)) for x in (a, b, c))
    assert gp(gp(A, B), C).allclose(gp(A, gp(B, C)), 1e-9)


@settings(max_examples=200, deadline=None)
@given(coeffs, coeffs)
def test_anti_automorphisms_property(a, b):
    A, B = Multivector(3, np.array(a)), Multivector(3, np.array(b))
    assert reversion(gp(A, B)).allclose(gp(reversion(B), reversion(A)), 1e-9)
    assert conjugation(gp(A, B)).allclose(gp(conjugation(B), conjugation(A)), 1e-9)
    assert grade_involution(gp(A, B)).allclose(gp(grade_involution(A), grade_involution(B)), 1e-9)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=4, max_size=4).filter(lambda v: np.dot(v, v) > 1e-6))
def test_kelvin_inverse_property(v):
    x = vector_embed(np.array(v))
    y = kelvin_inverse(x)
    one = Multivector.scalar(4)
    assert gp(x, y).allclose(one, 1e-9) and gp(y, x).allclose(one, 1e-9)
    assert gp(x, conjugation(x)).allclose(Multivector.scalar(4, float(np.dot(v, v))), 1e-9)
