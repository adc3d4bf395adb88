import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lib.supercalc import (
    IOTA,
    LIE,
    GradedDerivation,
    KahlerOneForm,
    SuperElement,
    TildeField,
    cone_differential,
    de_rham,
    de_rham_derivation,
    gder_apply,
    gder_bracket,
    interior,
    kahler_contract,
    kahler_d,
    kahler_lie,
    lie,
    tilde_field_bracket,
)
from lib.symcalc import Form, VectorField, exterior_d, field_bracket, parity_sign, poly_ring, var
from utils.sampling import random_field, random_form, random_super

seeds = st.integers(min_value=0, max_value=10**6)


def test_odd_generators_anticommute():
    t1, t2 = SuperElement.odd(2, 1), SuperElement.odd(2, 2)
    assert t1 * t2 == -(t2 * t1)
    assert (t1 * t1).is_zero()


def test_degree_of_mixed_element_is_an_error():
    mixed = SuperElement.one(2) + SuperElement.odd(2, 1)
    assert set(mixed.pieces()) == {0, 1}
    with pytest.raises(ValueError, match="mixed degrees"):
        mixed.degree


def test_render():
    x1 = var(2, 1)
    a = SuperElement(2, {(): x1, (1, 2): 3 * x1})
    assert a.render() == "x1 + 3*x1*t1*t2"


@given(seeds)
def test_de_rham_matches_exterior_derivative(seed):
    rng = random.Random(seed)
    omega = random_form(rng, 3, rng.randint(0, 2), 3)
    assert de_rham(SuperElement.from_form(omega)) == SuperElement.from_form(exterior_d(omega))


@given(seeds)
def test_de_rham_squares_to_zero(seed):
    a = random_super(random.Random(seed), 3, 3)
    assert de_rham(de_rham(a)).is_zero()


@given(seeds)
def test_graded_leibniz_rule(seed):
    rng = random.Random(seed)
    p = rng.randint(0, 2)
    a, b = random_super(rng, 3, 2, p), random_super(rng, 3, 2)
    xi = random_field(rng, 3, 2)
    for D in (de_rham_derivation(3), interior(xi), lie(xi)):
        expected = gder_apply(D, a) * b + (a * gder_apply(D, b)).scale(parity_sign(D.degree * p))
        assert gder_apply(D, a * b) == expected


@given(seeds)
def test_cartan_relations(seed):
    rng = random.Random(seed)
    xi, eta = random_field(rng, 2, 2), random_field(rng, 2, 2)
    d = de_rham_derivation(2)
    assert gder_bracket(d, interior(xi)) == lie(xi)
    assert gder_bracket(lie(xi), interior(eta)) == interior(field_bracket(xi, eta))
    assert gder_bracket(lie(xi), lie(eta)) == lie(field_bracket(xi, eta))
    assert gder_bracket(interior(xi), interior(eta)).is_zero()
    assert gder_bracket(d, d).is_zero()


def test_derivation_images_must_be_homogeneous():
    ones = tuple(SuperElement.one(1) for _ in range(1))
    with pytest.raises(ValueError, match="must have degree"):
        GradedDerivation(1, 0, ones, ones)


def test_scaled_derivation():
    t1 = SuperElement.odd(2, 1)
    D = interior(VectorField.frame(2, 2)).scale(t1)
    assert D.degree == 0
    assert gder_apply(D, SuperElement.odd(2, 2)) == t1


def test_cone_structure():
    e1, e2 = VectorField.frame(2, 1), VectorField.frame(2, 2, var(2, 1))
    i1 = TildeField(2, IOTA, e1)
    assert cone_differential(i1) == TildeField(2, LIE, e1)
    assert cone_differential(TildeField(2, LIE, e1)) is None
    assert tilde_field_bracket(i1, TildeField(2, IOTA, e2)) is None
    assert tilde_field_bracket(TildeField(2, LIE, e1), TildeField(2, IOTA, e2)) == TildeField(2, IOTA, VectorField.frame(2, 2))
    with pytest.raises(ValueError, match="cone level"):
        TildeField(2, 1, e1)


def test_kahler_d_of_monomials():
    n = 2
    x1 = var(n, 1)
    t1, t2 = SuperElement.odd(n, 1), SuperElement.odd(n, 2)
    assert kahler_d(SuperElement.even(x1)) == KahlerOneForm.generator(n, "x", 1)
    # D(t1*t2) = Dt1*t2 + t1*Dt2 = -t2*Dt1 + t1*Dt2
    expected = KahlerOneForm.generator(n, "t", 1, -t2) + KahlerOneForm.generator(n, "t", 2, t1)
    assert kahler_d(t1 * t2) == expected
    assert kahler_d(SuperElement.even(poly_ring(n).one)).is_zero()


def test_kahler_render():
    n = 1
    omega = KahlerOneForm.generator(n, "x", 1, -SuperElement.one(n)) + KahlerOneForm.generator(n, "t", 1, SuperElement.even(var(n, 1)))
    assert omega.render() == "-Dx1 + x1*Dt1"


@given(seeds)
def test_kahler_d_evaluates_to_the_derivation(seed):
    rng = random.Random(seed)
    a = random_super(rng, 2, 2)
    xi = random_field(rng, 2, 2)
    for D in (de_rham_derivation(2), interior(xi), lie(xi)):
        assert kahler_contract(D, kahler_d(a)) == gder_apply(D, a)


@given(seeds)
def test_kahler_lie_commutes_with_d(seed):
    rng = random.Random(seed)
    a = random_super(rng, 2, 2)
    xi = random_field(rng, 2, 2)
    for D in (de_rham_derivation(2), interior(xi), lie(xi)):
        assert kahler_lie(D, kahler_d(a)) == kahler_d(gder_apply(D, a))


def test_right_multiplication_moves_odd_factors():
    t1 = SuperElement.odd(1, 1)
    omega = KahlerOneForm.generator(1, "t", 1)
    assert omega.right_mul(t1) == KahlerOneForm.generator(1, "t", 1, -t1)
    assert KahlerOneForm.generator(1, "x", 1).right_mul(t1) == KahlerOneForm.generator(1, "x", 1, t1)


def test_from_form_round_trip(volume3):
    assert SuperElement.from_form(volume3).to_form(3) == volume3
    assert SuperElement.from_form(Form.zero(3, 2)).is_zero()
