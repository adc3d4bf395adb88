import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cli.commands import EXIT_INPUT, EXIT_OK, run
from lib.courant import CourantModel
from lib.report import WindowOverflowError
from lib.splitting import (
    GradedCourantModel,
    GradedSection,
    check_flat_splitting,
    lift_interior,
    q_bracket,
    q_differential,
    q_pairing,
    splitting,
    unique_flat_connection_dg,
)
from lib.supercalc import GradedDerivation, KahlerOneForm, SuperElement, interior, lie
from lib.symcalc import Form, VectorField, field_bracket, poincare_homotopy, poly_ring, var
from lib.window import Truncation
from utils.sampling import random_field

seeds = st.integers(min_value=0, max_value=10**6)


def run_json(capsys, argv: list[str]) -> tuple[int, dict]:
    code = run(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out else {}


@pytest.fixture(scope="module")
def volume_model() -> GradedCourantModel:
    return GradedCourantModel.radial(CourantModel(3, Form.basis(3, (1, 2, 3))))


def test_flat_splitting_of_the_volume_twist():
    n = 3
    H = SuperElement(n, {(1, 2, 3): poly_ring(n).one})
    report = unique_flat_connection_dg(H, Truncation(n, 2))
    assert report.passed, [c.to_dict() for c in report.failures]
    assert report.connection == -poincare_homotopy(Form.basis(n, (1, 2, 3)))
    assert "lifts" in report.extra
    assert report.check("perturbation-detected").trials > n
    assert report.check("gauge-unique").passed


def test_flat_splitting_of_zero_twist():
    report = unique_flat_connection_dg(SuperElement.zero(2), Truncation(2, 1))
    assert report.passed
    assert report.connection.is_zero()


def test_flat_splitting_rejects_bad_twists():
    n = 3
    x1 = var(n, 1)
    with pytest.raises(ValueError, match="homogeneous of degree 3"):
        unique_flat_connection_dg(SuperElement.odd(n, 1), Truncation(n, 2))
    with pytest.raises(ValueError, match="not closed"):
        unique_flat_connection_dg(SuperElement(4, {(1, 2, 3): var(4, 4)}), Truncation(4, 2))
    with pytest.raises(WindowOverflowError):
        unique_flat_connection_dg(SuperElement(n, {(1, 2, 3): x1 * x1 * x1}), Truncation(n, 2))


def test_non_radial_differential_is_read_back():
    n = 3
    H = SuperElement(n, {(1, 2, 3): poly_ring(n).one})
    B = -poincare_homotopy(Form.basis(n, (1, 2, 3))) + Form.basis(n, (1, 2))
    report = unique_flat_connection_dg(H, Truncation(n, 1), B)
    assert report.passed, [c.to_dict() for c in report.failures]
    assert report.connection == B
    assert "radial-gauge" not in [c.name for c in report.checks]


def test_differential_must_bound_the_twist():
    with pytest.raises(ValueError, match="primitive"):
        unique_flat_connection_dg(SuperElement.zero(3), Truncation(3, 1), Form.basis(3, (1, 2), var(3, 3)))


def test_wrong_differential_breaks_the_bracket():
    model = GradedCourantModel.unchecked(CourantModel(3, Form.basis(3, (1, 2, 3))), Form.zero(3, 2))
    checks, connection = check_flat_splitting(model, Truncation(3, 1))
    failed = {c.name for c in checks if not c.passed}
    assert {"bracket-compatibility", "primitive", "curvature"} <= failed
    assert "lift-minus-one-anchor" not in failed
    assert connection.is_zero()


def test_degree_minus_one_lift_is_the_interior_product():
    xi = VectorField.frame(2, 2, var(2, 1))
    assert lift_interior(xi, Truncation(2, 1)) == GradedSection(KahlerOneForm.zero(2), interior(xi))


def test_section_degrees_are_checked(volume_model):
    with pytest.raises(ValueError, match="not of degree"):
        GradedSection(KahlerOneForm.generator(3, "x", 1), GradedDerivation.zero(3, -1))
    with pytest.raises(ValueError, match="degree -1"):
        q_differential(volume_model, splitting(volume_model, lie(VectorField.frame(3, 1))))


@given(seeds)
def test_splitting_is_a_bracket_morphism(volume_model, seed):
    rng = random.Random(seed)
    xi, eta = random_field(rng, 3, 2), random_field(rng, 3, 2)
    bracket = field_bracket(xi, eta)
    left = splitting(volume_model, lie(xi))
    assert q_bracket(volume_model, left, splitting(volume_model, lie(eta))) == splitting(volume_model, lie(bracket))
    assert q_bracket(volume_model, left, splitting(volume_model, interior(eta))) == splitting(volume_model, interior(bracket))
    assert q_pairing(left, splitting(volume_model, lie(eta))).is_zero()


def test_flat_command_takes_a_differential(capsys):
    B = Form.basis(2, (1, 2))
    code, payload = run_json(capsys, ["chiral", "flat", "--n", "2", "--truncate", "1", "--beta", B.render()])
    assert code == EXIT_OK
    assert payload["connection"] == B.render()
    code, _ = run_json(capsys, ["chiral", "flat", "--n", "3", "--truncate", "1", "--beta", "x3*dx1^dx2"])
    assert code == EXIT_INPUT
