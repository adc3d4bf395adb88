import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st
from sympy.polys.domains import QQ

from cli.commands import EXIT_FAILED, EXIT_INPUT, EXIT_OK, run
from cli.parser import (
    ParseError,
    parse_courant_section,
    parse_field,
    parse_form,
    parse_poly,
    parse_super,
    parse_tilde,
    parse_vertex_section,
)
from lib.chiral import TildeUSection, random_tilde_section
from lib.courant import CourantSection
from lib.supercalc import IOTA, LIE, KahlerOneForm, SuperElement, TildeField
from lib.symcalc import Form, VectorField, poly_ring, render_poly, var
from lib.vertex import SignVector, VertexModel, VertexSection, check_algebroid_identities, star, v_pairing
from utils.sampling import random_field, random_form, random_poly, random_super

seeds = st.integers(min_value=0, max_value=10**6)
dimensions = st.integers(min_value=1, max_value=3)


def run_json(capsys, argv: list[str]) -> tuple[int, dict]:
    code = run(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out else {}


def test_parse_section():
    assert parse_courant_section("[dx2 | e1]", 2) == CourantSection(Form.basis(2, (2,)), VectorField.frame(2, 1))
    assert parse_courant_section("[0 | x1*e2]", 2) == CourantSection(Form.zero(2, 1), VectorField.frame(2, 2, var(2, 1)))


def test_parse_form_with_rational_coefficient():
    assert parse_form("3/2*x1*dx1^dx3", 3) == Form.basis(3, (1, 3), var(3, 1) * QQ(3, 2))
    assert parse_form("dx2^dx1", 2) == -Form.basis(2, (1, 2))


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError) as info:
        parse_form("x1^2", 1)
    assert (info.value.line, info.value.col) == (1, 3)
    with pytest.raises(ParseError) as info:
        parse_form("x1 +", 1)
    assert info.value.col == 5
    with pytest.raises(ParseError, match="expected a 3-form"):
        parse_form("dx1", 3, 3)
    with pytest.raises(ParseError, match="out of range|index"):
        parse_form("x4", 3)


def test_parse_tilde_sections():
    x1 = var(1, 1)
    u = parse_tilde("i1[x1] - x1*i1 + t1*L1 + Dx1", 1)
    expected = (
        TildeUSection.tensor_term(SuperElement.one(1), TildeField(1, IOTA, VectorField.frame(1, 1, x1)))
        - TildeUSection.tensor_term(SuperElement.even(x1), TildeField(1, IOTA, VectorField.frame(1, 1)))
        + TildeUSection.tensor_term(SuperElement.odd(1, 1), TildeField(1, LIE, VectorField.frame(1, 1)))
        + TildeUSection.from_kform(KahlerOneForm.generator(1, "x", 1))
    )
    assert u == expected


def test_rendered_values_parse_back():
    omega = Form.basis(3, (1, 3), var(3, 1) * QQ(3, 2)) - Form.basis(3, (2, 3))
    assert parse_form(omega.render(), 3) == omega
    xi = VectorField.frame(2, 1, var(2, 2)) + VectorField.frame(2, 2)
    assert parse_field(xi.render(), 2) == xi
    u = parse_tilde("-Dx1 + x1*t1*i1", 1)
    assert parse_tilde(u.render(), 1) == u


@given(seeds, dimensions)
def test_random_values_parse_back(seed, n):
    rng = random.Random(seed)
    f = random_poly(rng, n, 3) * QQ(rng.randint(1, 3), rng.randint(1, 3))
    assert parse_poly(render_poly(f), n) == f
    p = rng.randint(0, n)
    omega = random_form(rng, n, p, 2).scale(poly_ring(n).ground_new(QQ(-1, rng.randint(1, 3))))
    assert parse_form(omega.render(), n, p) == omega
    xi = random_field(rng, n, 2)
    assert parse_field(xi.render(), n) == xi
    a = random_super(rng, n, 2)
    assert parse_super(a.render(), n) == a
    u = random_tilde_section(rng, n, 2, rng.randint(-1, n))
    assert parse_tilde(u.render(), n) == u
    q = CourantSection(random_form(rng, n, 1, 2), random_field(rng, n, 2))
    assert parse_courant_section(q.render(), n) == q
    v = VertexSection.from_field(random_field(rng, n, 2), random_form(rng, n, 1, 2))
    assert parse_vertex_section(v.render(), n) == v


def test_courant_bracket_command(capsys):
    code, payload = run_json(capsys, ["courant", "bracket", "--n", "3", "--twist", "dx1^dx2^dx3", "--left", "[0|e1]", "--right", "[0|e2]"])
    assert code == EXIT_OK
    assert payload["result"] == "[dx3 | 0]"
    assert payload["command"] == "courant bracket"


def test_calc_d_command(capsys):
    code, payload = run_json(capsys, ["calc", "d", "--n", "2", "--left", "x1*x2"])
    assert code == EXIT_OK
    assert payload["result"] == "x2*dx1 + x1*dx2"


def test_chiral_member_command(capsys):
    code, payload = run_json(capsys, ["chiral", "member", "--n", "1", "--truncate", "2", "--left", "i1[x1] - x1*i1"])
    assert code == EXIT_OK
    assert payload["member"] is True


def test_input_errors_exit_with_code_two(capsys):
    code, payload = run_json(capsys, ["calc", "d", "--n", "2", "--left", "x1^2"])
    assert code == EXIT_INPUT
    assert payload == {}
    code, _ = run_json(capsys, ["calc", "d", "--n", "2"])
    assert code == EXIT_INPUT
    with pytest.raises(SystemExit) as info:
        run(["nope"])
    assert info.value.code == 2


def test_config_file_and_out_file(capsys, tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text("# window\nn = 2\nseed = 5\n", encoding="utf-8")
    out = tmp_path / "report.json"
    code, payload = run_json(capsys, ["calc", "d", "--config", str(config), "--left", "x1*x2", "--out", str(out)])
    assert code == EXIT_OK
    assert payload["config"]["n"] == 2
    assert payload["config"]["seed"] == 5
    assert json.loads(out.read_text(encoding="utf-8")) == payload


def test_runs_are_reproducible(capsys):
    argv = ["courant", "check", "--n", "3", "--twist", "x1*dx1^dx2^dx3", "--trials", "3", "--maxdeg", "1", "--seed", "4"]
    run(argv)
    first = capsys.readouterr().out
    run(argv)
    assert capsys.readouterr().out == first


def test_vertex_check_reports_the_axiom_count(capsys):
    code, payload = run_json(capsys, ["vertex", "check", "--n", "1", "--trials", "5", "--maxdeg", "2"])
    assert code == EXIT_OK
    assert payload["axioms"] == 23
    assert payload["truncated-axioms"] == 14
    assert payload["identities"]["status"] == "pass"


def test_printed_signs_fail_the_vertex_check(capsys):
    code, payload = run_json(capsys, ["vertex", "check", "--n", "1", "--trials", "1", "--maxdeg", "1", "--sign-assoc", "-1", "--sign-dictionary", "-1"])
    assert code == EXIT_FAILED
    assert "Comm-1" in payload["failures"]


def test_identity_failures_reach_the_vertex_check_status(capsys):
    code, payload = run_json(capsys, ["vertex", "check", "--n", "1", "--trials", "2", "--maxdeg", "2", "--sign-assoc3", "1"])
    assert code == EXIT_FAILED
    assert payload["status"] == "fail"
    assert "pairing" in payload["failures"]
    assert payload["identities"]["status"] == "fail"


def test_reported_witness_replays_the_failure():
    model = VertexModel(1, SignVector().flipped("assoc3"))
    check = check_algebroid_identities(model, seed=3, trials=2, maxdeg=2).check("pairing")
    assert not check.passed
    inputs = check.witnesses[0].inputs
    f = parse_poly(inputs["f"], 1)
    v1, v2 = parse_vertex_section(inputs["v1"], 1), parse_vertex_section(inputs["v2"], 1)
    lhs = v_pairing(model, star(model, f, v1), v2)
    rhs = f * v_pairing(model, v1, v2) + model.signs.assoc3 * v1.anchor.apply(v2.anchor.apply(f))
    assert lhs != rhs
    assert (render_poly(lhs), render_poly(rhs)) == (check.witnesses[0].expected, check.witnesses[0].got)
