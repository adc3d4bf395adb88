import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lib.symcalc import (
    Form,
    VectorField,
    constant_term,
    contract,
    euler_field,
    exterior_d,
    field_bracket,
    lie_derivative,
    monomial,
    parity_sign,
    poincare_homotopy,
    poly_ring,
    rational,
    render_poly,
    var,
    wedge,
)
from utils.sampling import random_field, random_form, random_poly

seeds = st.integers(min_value=0, max_value=10**6)


def test_poly_ring_is_shared_and_rejects_zero_variables():
    assert poly_ring(2) is poly_ring(2)
    with pytest.raises(ValueError):
        poly_ring(0)


def test_var_out_of_range():
    with pytest.raises(ValueError, match="out of range"):
        var(2, 3)


def test_parity_sign_handles_negative_exponents():
    assert parity_sign(-1) == -1
    assert parity_sign(-2) == 1
    assert isinstance(parity_sign(-3), int)


def test_render_poly_uses_repeated_products():
    x1, x2 = poly_ring(2).gens
    assert render_poly(x1**2 * x2 - 3) == "x1*x1*x2 - 3"
    assert render_poly(poly_ring(2).zero) == "0"
    assert render_poly(-x1 * rational(3, 2)) == "-3/2*x1"


def test_form_basis_sorts_with_sign():
    assert Form.basis(3, (2, 1)) == -Form.basis(3, (1, 2))
    assert Form.basis(3, (1, 1)).is_zero()


def test_form_rejects_unsorted_indices():
    with pytest.raises(ValueError, match="strictly increasing"):
        Form(3, 2, {(2, 1): poly_ring(3).one})


def test_form_render():
    x1 = var(3, 1)
    omega = Form(3, 2, {(1, 3): x1 * rational(3, 2), (2, 3): -poly_ring(3).one})
    assert omega.render() == "3/2*x1*dx1^dx3 - dx2^dx3"


def test_exterior_d_of_function():
    x1, x2 = poly_ring(2).gens
    assert exterior_d(Form.function(x1 * x2)).render() == "x2*dx1 + x1*dx2"


def test_contract_and_lie_on_functions():
    x1, x2 = poly_ring(2).gens
    xi = VectorField(2, (x2, x1))
    assert contract(xi, Form.function(x1)).p == -1
    assert lie_derivative(xi, Form.function(x1 * x1)).as_function() == 2 * x1 * x2


def test_homotopy_rejects_constants():
    with pytest.raises(ValueError, match="zero constant term"):
        poincare_homotopy(Form.function(poly_ring(2).one))


def test_homotopy_is_in_radial_gauge(volume3):
    x1 = var(3, 1)
    kappa = poincare_homotopy(volume3.scale(x1))
    assert contract(euler_field(3), kappa).is_zero()


@given(seeds, st.integers(min_value=1, max_value=3), st.integers(min_value=0, max_value=3))
def test_d_squares_to_zero(seed, n, p):
    omega = random_form(random.Random(seed), n, p, 3)
    assert exterior_d(exterior_d(omega)).is_zero()


@given(seeds, st.integers(min_value=1, max_value=3))
def test_homotopy_formula(seed, n):
    rng = random.Random(seed)
    p = rng.randint(1, n)
    omega = random_form(rng, n, p, 3)
    assert exterior_d(poincare_homotopy(omega)) + poincare_homotopy(exterior_d(omega)) == omega


@given(seeds)
def test_homotopy_formula_on_functions(seed):
    f = random_poly(random.Random(seed), 2, 3, zero_constant=True)
    assert constant_term(f) == 0
    assert poincare_homotopy(exterior_d(Form.function(f))) == Form.function(f)


@given(seeds)
def test_d_is_a_graded_derivation(seed):
    rng = random.Random(seed)
    p, q = rng.randint(0, 2), rng.randint(0, 2)
    a, b = random_form(rng, 3, p, 2), random_form(rng, 3, q, 2)
    expected = wedge(exterior_d(a), b) + wedge(a, exterior_d(b)).scale(parity_sign(p))
    assert exterior_d(wedge(a, b)) == expected


@given(seeds)
def test_wedge_is_graded_commutative(seed):
    rng = random.Random(seed)
    p, q = rng.randint(0, 3), rng.randint(0, 3)
    a, b = random_form(rng, 3, p, 2), random_form(rng, 3, q, 2)
    assert wedge(a, b) == wedge(b, a).scale(parity_sign(p * q))


@given(seeds)
def test_lie_commutator_with_contraction(seed):
    rng = random.Random(seed)
    xi, eta = random_field(rng, 3, 2), random_field(rng, 3, 2)
    omega = random_form(rng, 3, rng.randint(1, 3), 2)
    lhs = lie_derivative(xi, contract(eta, omega)) - contract(eta, lie_derivative(xi, omega))
    assert lhs == contract(field_bracket(xi, eta), omega)


@given(seeds)
def test_field_bracket_jacobi(seed):
    rng = random.Random(seed)
    a, b, c = (random_field(rng, 2, 2) for _ in range(3))
    total = field_bracket(a, field_bracket(b, c)) + field_bracket(b, field_bracket(c, a)) + field_bracket(c, field_bracket(a, b))
    assert total.is_zero()


def test_vector_field_apply():
    xi = VectorField.frame(2, 1, var(2, 2))
    assert xi.apply(monomial(2, (2, 0))) == 2 * var(2, 1) * var(2, 2)
    assert xi.render() == "x2*e1"
