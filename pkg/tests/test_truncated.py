import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lib.symcalc import poly_ring, var
from lib.truncated import check_truncated_axioms, from_truncated, sign_search, to_truncated
from constant.signs import SIGN_NAMES
from lib.vertex import SignVector, VertexModel, VertexSection, check_algebroid_identities, star, v_bracket, v_pairing
from utils.sampling import random_field, random_form, random_poly

seeds = st.integers(min_value=0, max_value=10**6)


def test_products_dispatch_on_degree(vertex1):
    S = to_truncated(vertex1)
    x1 = var(1, 1)
    v = VertexSection.frame(1, 1, x1)
    assert S.product(-1, x1, x1) == x1 * x1
    assert S.product(0, v, x1) == x1
    assert S.product(1, v, v) == v_pairing(vertex1, v, v)
    assert S.product(0, v, v) == v_bracket(vertex1, v, v)
    assert S.product(1, x1, v) == poly_ring(1).zero
    with pytest.raises(ValueError, match="degree 2"):
        S.product(-1, v, v)


def test_right_product_adds_the_dictionary_correction(vertex1):
    S = to_truncated(vertex1)
    x1 = var(1, 1)
    v = VertexSection.frame(1, 1, x1)
    assert S.sec_fun(v, x1) == star(vertex1, x1, v) + S.partial(x1)


def test_axioms_hold_for_consistent_signs(vertex1):
    report = check_truncated_axioms(to_truncated(vertex1), seed=11, trials=10, maxdeg=2)
    assert report.passed, [c.to_dict() for c in report.failures]
    assert len(report.checks) == 14


def test_printed_dictionary_sign_breaks_commutativity():
    report = check_truncated_axioms(to_truncated(VertexModel(1, SignVector.printed())), seed=11, trials=1, maxdeg=1)
    assert not report.check("Comm-1").passed


def test_flipping_the_diff_sign_breaks_skew_symmetry(vertex1):
    model = VertexModel(1, vertex1.signs.flipped("diff"))
    report = check_truncated_axioms(to_truncated(model), seed=11, trials=1, maxdeg=1)
    assert not report.check("Comm0").passed


@given(seeds)
def test_dictionary_round_trip(seed):
    rng = random.Random(seed)
    model = VertexModel(2)
    ops = from_truncated(to_truncated(model))
    f = random_poly(rng, 2, 3)
    v = VertexSection.from_field(random_field(rng, 2, 3), random_form(rng, 2, 1, 3))
    w = VertexSection.from_field(random_field(rng, 2, 3), random_form(rng, 2, 1, 3))
    assert ops.star(f, v) == star(model, f, v)
    assert ops.star_right(f, v) == star(model, f, v)
    assert ops.bracket(v, w) == v_bracket(model, v, w)
    assert ops.pairing(v, w) == v_pairing(model, v, w)
    assert ops.anchor(v, f) == v.anchor.apply(f)


def test_sign_search_needs_enough_trials():
    with pytest.raises(ValueError, match="at least"):
        sign_search(1, trials=5)


@pytest.fixture(scope="module")
def survivors() -> dict[int, list[SignVector]]:
    return {seed: sign_search(1, seed=seed, trials=50, maxdeg=2) for seed in (1, 2)}


def test_sign_search_finds_a_single_assignment(survivors):
    assert survivors[1] == [SignVector(1, 1, 1, -1, -1, -1)]


def test_sign_search_does_not_depend_on_the_seed(survivors):
    assert survivors[1] == survivors[2]


def test_default_signs_are_the_first_survivor(survivors):
    assert survivors[1][0] == SignVector()


@pytest.mark.parametrize("name", SIGN_NAMES)
def test_every_single_flip_of_the_survivor_fails(name):
    model = VertexModel(1, SignVector().flipped(name))
    truncated = check_truncated_axioms(to_truncated(model), seed=1, trials=50, maxdeg=2, stop_on_failure=True)
    identities = check_algebroid_identities(model, seed=1, trials=50, maxdeg=2, stop_on_failure=True)
    assert not (truncated.passed and identities.passed)
