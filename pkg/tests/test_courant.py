import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lib.courant import (
    Connection,
    CourantModel,
    CourantSection,
    bfield_violation,
    c_add,
    c_bracket,
    c_pairing,
    c_scale,
    check_courant_axioms,
    curvature,
    flat_connection,
    scale_section,
    sum_section,
)
from lib.symcalc import Form, VectorField, exterior_d, poly_ring, rational, var
from utils.sampling import random_closed_form, random_field, random_form

seeds = st.integers(min_value=0, max_value=10**6)


def frame(n: int, i: int) -> CourantSection:
    return CourantSection.from_field(VectorField.frame(n, i))


def test_twisted_bracket_of_frames(volume3):
    model = CourantModel(3, volume3)
    result = c_bracket(model, frame(3, 1), frame(3, 2))
    assert result == CourantSection.from_form(Form.basis(3, (3,)))
    assert result.render() == "[dx3 | 0]"


def test_model_rejects_non_closed_twist():
    with pytest.raises(ValueError, match="not closed"):
        CourantModel(4, Form.basis(4, (2, 3, 4), var(4, 1)))


def test_model_rejects_wrong_degree():
    with pytest.raises(ValueError, match="3-form"):
        CourantModel(3, Form.basis(3, (1, 2)))


def test_pairing_of_form_and_field():
    q1 = CourantSection(Form.basis(2, (1,), var(2, 2)), VectorField.zero(2))
    assert c_pairing(CourantModel.flat(2), q1, frame(2, 1)) == var(2, 2)


def test_axioms_pass_on_twisted_model():
    rng = random.Random(3)
    model = CourantModel(3, random_closed_form(rng, 3, 3, 2))
    report = check_courant_axioms(model, seed=5, trials=10, maxdeg=2)
    assert report.passed, report.failures
    assert [c.name for c in report.checks][-1] == "anchor-morphism"


def test_jacobi_fails_for_a_non_closed_twist():
    model = CourantModel.unchecked(4, Form.basis(4, (2, 3, 4), var(4, 1)))
    report = check_courant_axioms(model, seed=5, trials=1, maxdeg=1)
    jacobi = report.check("jacobi")
    assert not jacobi.passed
    assert jacobi.witnesses


@given(seeds)
def test_curvature_shift_law(seed):
    rng = random.Random(seed)
    model = CourantModel(3, random_closed_form(rng, 3, 3, 2))
    B = random_form(rng, 3, 2, 2)
    assert curvature(model, Connection(B)) == model.H + exterior_d(B)


def test_flat_connection_has_zero_curvature(volume3):
    model = CourantModel(3, volume3.scale(var(3, 1) * var(3, 2)))
    connection = flat_connection(model)
    assert curvature(model, connection).is_zero()


@given(seeds)
def test_bfield_criterion(seed):
    rng = random.Random(seed)
    model = CourantModel.flat(3)
    closed = random_closed_form(rng, 3, 2, 2)
    assert bfield_violation(model, closed) is None
    x1 = var(3, 1)
    assert bfield_violation(model, Form.basis(3, (2, 3), x1)) is not None


def test_sum_and_scale():
    H = Form.basis(3, (1, 2, 3))
    total = c_add(CourantModel(3, H), CourantModel(3, H.scale(2)))
    assert total.H == H.scale(3)
    assert c_scale(rational(0), total) == CourantModel.flat(3)
    assert c_scale(rational(1, 3), total).H == H


def test_section_normal_forms():
    x1 = var(2, 1)
    a = CourantSection(Form.basis(2, (1,)), VectorField.frame(2, 1, x1))
    b = CourantSection(Form.basis(2, (2,)), VectorField.frame(2, 1, x1))
    assert sum_section(a, b) == CourantSection(Form.basis(2, (1,)) + Form.basis(2, (2,)), a.xi)
    with pytest.raises(ValueError, match="different anchors"):
        sum_section(a, frame(2, 2))
    scaled = scale_section(rational(2), Form.zero(2, 1), b)
    assert scaled.alpha == Form.basis(2, (2,), poly_ring(2).one * 2)


@given(seeds)
def test_anchor_is_a_bracket_morphism(seed):
    rng = random.Random(seed)
    model = CourantModel.flat(2)
    q1 = CourantSection(random_form(rng, 2, 1, 2), random_field(rng, 2, 2))
    q2 = CourantSection(random_form(rng, 2, 1, 2), random_field(rng, 2, 2))
    bracket = c_bracket(model, q1, q2)
    assert bracket.xi == VectorField(2, tuple(q1.xi.apply(b) - q2.xi.apply(a) for a, b in zip(q1.xi.components, q2.xi.components, strict=True)))
