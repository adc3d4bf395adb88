import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lib.chiral import (
    TildeUSection,
    anchor_apply,
    check_tilde_u_identities,
    koszul_sign,
    random_tilde_section,
    section_degree,
    tilde_u_anchor,
    tilde_u_bracket,
    tilde_u_differential,
    tilde_u_pairing,
    tilde_u_partial,
    tilde_u_star,
)
from lib.supercalc import IOTA, LIE, KahlerOneForm, SuperElement, TildeField, gder_apply, interior, tilde_field_bracket
from lib.symcalc import VectorField, monomial, var
from lib.window import Truncation, window_fields

seeds = st.integers(min_value=0, max_value=10**6)


def tensor(beta: SuperElement, level: int, xi: VectorField) -> TildeUSection:
    return TildeUSection.tensor_term(beta, TildeField(xi.n, level, xi))


def test_koszul_sign_counts_odd_transpositions():
    degrees = {"a": 1, "b": 1, "c": 0}
    assert koszul_sign(degrees, ("a", "b", "c"), ("b", "a", "c")) == -1
    assert koszul_sign(degrees, ("a", "b", "c"), ("c", "a", "b")) == 1
    assert koszul_sign(degrees, ("a", "b", "c"), ("b", "c", "a")) == -1


def test_section_canonical_form():
    x1 = var(1, 1)
    u = tensor(SuperElement.one(1), IOTA, VectorField.frame(1, 1, x1 + 1))
    assert set(u.tensor) == {((1,), 1, IOTA), ((0,), 1, IOTA)}
    assert (u - u).is_zero()
    assert section_degree(u) == -1
    with pytest.raises(ValueError, match="cone level"):
        TildeUSection(1, KahlerOneForm.zero(1), {((0,), 1, 2): SuperElement.one(1)})


def test_render():
    n = 1
    x1 = var(n, 1)
    u = tensor(SuperElement.odd(n, 1).scale(x1), IOTA, VectorField.frame(n, 1)) + TildeUSection.from_kform(KahlerOneForm.generator(n, "x", 1, -SuperElement.one(n)))
    assert u.render() == "-Dx1 + x1*t1*i1"
    assert tensor(SuperElement.one(n), LIE, VectorField.frame(n, 1, x1 * x1)).render() == "L1[x1*x1]"


def test_star_of_odd_generator():
    n = 1
    t1, x1 = SuperElement.odd(n, 1), var(n, 1)
    u = tensor(SuperElement.even(x1), IOTA, VectorField.frame(n, 1))
    expected = TildeUSection.from_kform(KahlerOneForm.generator(n, "x", 1, -SuperElement.one(n))) + tensor(t1.scale(x1), IOTA, VectorField.frame(n, 1))
    assert tilde_u_star(t1, u) == expected


@given(seeds)
def test_unit_acts_trivially(seed):
    u = random_tilde_section(random.Random(seed), 2, 2, 0)
    assert tilde_u_star(SuperElement.one(2), u) == u


def test_star_without_corrections():
    n = 2
    t2 = SuperElement.odd(n, 2)
    u = tensor(SuperElement.one(n), LIE, VectorField.frame(n, 1))
    assert tilde_u_star(t2, u) == tensor(t2, LIE, VectorField.frame(n, 1))


def test_pairing_examples():
    n = 1
    e1 = VectorField.frame(n, 1)
    one, t1, x1 = SuperElement.one(n), SuperElement.odd(n, 1), SuperElement.even(var(n, 1))
    assert tilde_u_pairing(tensor(one, IOTA, e1), tensor(one, IOTA, e1)).is_zero()
    assert tilde_u_pairing(tensor(t1, IOTA, e1), tensor(t1, IOTA, e1)) == one
    assert tilde_u_pairing(tensor(x1, IOTA, e1), tensor(t1, IOTA, e1)).is_zero()


def test_bracket_examples():
    n = 2
    e1, e2 = VectorField.frame(n, 1), VectorField.frame(n, 2)
    one, x1 = SuperElement.one(n), SuperElement.even(var(n, 1))
    assert tilde_u_bracket(tensor(one, IOTA, e1), tensor(one, LIE, e2)).is_zero()
    assert tilde_u_bracket(tensor(one, LIE, e1), tensor(x1, IOTA, e2)) == tensor(one, IOTA, e2)


@given(seeds)
def test_restriction_to_constant_tensors_is_the_cone_bracket(seed):
    rng = random.Random(seed)
    fields = window_fields(Truncation(2, 2))
    t1 = TildeField(2, rng.choice((IOTA, LIE)), rng.choice(fields))
    t2 = TildeField(2, rng.choice((IOTA, LIE)), rng.choice(fields))
    one = SuperElement.one(2)
    u1, u2 = TildeUSection.tensor_term(one, t1), TildeUSection.tensor_term(one, t2)
    bracket = tilde_field_bracket(t1, t2)
    expected = TildeUSection.zero(2) if bracket is None else TildeUSection.tensor_term(one, bracket)
    assert tilde_u_bracket(u1, u2) == expected
    assert tilde_u_pairing(u1, u2).is_zero()


def test_anchor_of_tensor_term():
    n = 2
    x2 = var(n, 2)
    u = tensor(SuperElement.odd(n, 1), IOTA, VectorField.frame(n, 2, x2))
    anchors = tilde_u_anchor(u)
    assert set(anchors) == {0}
    assert anchors[0] == interior(VectorField.frame(n, 2, x2)).scale(SuperElement.odd(n, 1))
    assert anchor_apply(u, SuperElement.odd(n, 2)) == SuperElement.odd(n, 1).scale(x2)


def test_anchor_kills_kahler_forms():
    n = 1
    u = TildeUSection.from_kform(KahlerOneForm.generator(n, "t", 1))
    assert anchor_apply(u, SuperElement.odd(n, 1)).is_zero()
    assert tilde_u_partial(SuperElement.even(var(n, 1))) == TildeUSection.from_kform(KahlerOneForm.generator(n, "x", 1))


def test_differential_lifts_interior_to_lie():
    n = 1
    x1 = SuperElement.even(var(n, 1))
    e1 = VectorField.frame(n, 1)
    u = tensor(x1, IOTA, e1)
    expected = tensor(SuperElement.odd(n, 1), IOTA, e1) + tensor(x1, LIE, e1)
    assert tilde_u_differential(u) == expected


@given(seeds)
def test_differential_squares_to_zero(seed):
    rng = random.Random(seed)
    u = random_tilde_section(rng, 2, 2, rng.randint(-1, 1))
    assert tilde_u_differential(tilde_u_differential(u)).is_zero()


@given(seeds)
def test_pairing_with_exact_section(seed):
    rng = random.Random(seed)
    u = random_tilde_section(rng, 2, 2, rng.randint(-1, 1))
    a = SuperElement(2, {(1,): monomial(2, (1, 1))}) + SuperElement.even(var(2, 2))
    assert tilde_u_pairing(u, tilde_u_partial(a)) == anchor_apply(u, a)


def test_linear_identities_pass():
    report = check_tilde_u_identities(1, seed=3, trials=8, maxdeg=2)
    for name in ("anchor-lin", "deriv", "pairing-o", "bracket-o", "differential-square"):
        assert report.check(name).passed, report.check(name).to_dict()


def test_lie_level_action():
    n = 1
    u = tensor(SuperElement.one(n), LIE, VectorField.frame(n, 1))
    assert anchor_apply(u, SuperElement.odd(n, 1)).is_zero()
    assert anchor_apply(u, SuperElement.even(var(n, 1))) == SuperElement.one(n)
    assert gder_apply(interior(VectorField.frame(n, 1)), SuperElement.odd(n, 1)) == SuperElement.one(n)
