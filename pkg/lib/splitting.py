"""
The flat splitting of an exact Courant algebroid over the graded ring.

Sections are pairs (omega, D) of a Kahler 1-form and a graded derivation. The
model is twisted by H in degree 0, and its differential on degree -1 sections
is fixed by a 2-form B with dB = -H:

    d(0, i_xi) = (i_xi B, L_xi)

The splitting is built the way it is forced. The lift of i[xi] is read off
the quotient U = U~/I, whose degree -1 part the anchor maps isomorphically
onto derivations. The lift of L[xi] is the differential of that lift. The
submodule generated by both lifts is then compared with the derivations
block by block.
"""

from collections.abc import Iterator
from dataclasses import dataclass
from itertools import combinations
from logging import INFO
from typing import Any

from sympy.polys.domains import QQ

from lib.chiral import TildeUSection, tilde_u_anchor
from lib.courant import Connection, CourantModel, CourantSection, c_bracket, curvature
from lib.report import CheckResult, Report, WindowOverflowError, run_cases
from lib.supercalc import (
    IOTA,
    GradedDerivation,
    KahlerOneForm,
    SuperElement,
    TildeField,
    de_rham,
    de_rham_derivation,
    gder_bracket,
    interior,
    kahler_contract,
    lie,
)
from lib.symcalc import (
    Form,
    VectorField,
    _check_same,
    contract,
    euler_field,
    exterior_d,
    field_bracket,
    monomial,
    poincare_homotopy,
)
from lib.window import (
    Truncation,
    _anchor_row,
    _rank,
    derivation_row,
    exponent_vectors,
    ideal_basis,
    ideal_membership,
    k_generators,
    monomial_element,
    section_from_coordinates,
    super_monomials,
    tangent_dimension,
    u_normal_form,
    window_fields,
)
from utils.logger import get_logger


@dataclass(frozen=True)
class GradedSection:
    kform: KahlerOneForm
    field: GradedDerivation

    def __post_init__(self) -> None:
        _check_same(self.kform.n, self.field.n)
        stray = set(self.kform.pieces()) - {self.field.degree}
        if stray:
            raise ValueError(f"Kahler part {self.kform.render()} is not of degree {self.field.degree}")

    @property
    def n(self) -> int:
        return self.field.n

    @property
    def degree(self) -> int:
        return self.field.degree

    def __add__(self, other: "GradedSection") -> "GradedSection":
        return GradedSection(self.kform + other.kform, self.field + other.field)

    def __sub__(self, other: "GradedSection") -> "GradedSection":
        return GradedSection(self.kform - other.kform, self.field - other.field)

    def scale(self, a: SuperElement) -> "GradedSection":
        """The section a*(omega, D) for a homogeneous element a."""
        return GradedSection(self.kform.left_mul(a), self.field.scale(a))

    def render(self) -> str:
        return f"[{self.kform.render()} | {self.field.render()}]"


def kahler_form(alpha: Form) -> KahlerOneForm:
    """An ordinary 1-form as a Kahler form in the Dx_i."""
    n = alpha.n
    zero = SuperElement.zero(n)
    even = tuple(SuperElement.even(alpha.terms[(j,)]) if (j,) in alpha.terms else zero for j in range(1, n + 1))
    return KahlerOneForm(n, even, tuple(zero for _ in range(n)))


@dataclass(frozen=True)
class GradedCourantModel:
    base: CourantModel
    B: Form

    def __post_init__(self) -> None:
        if self.B.p != 2:
            raise ValueError(f"the differential is given by a 2-form, got degree {self.B.p}")
        _check_same(self.base.n, self.B.n)
        if exterior_d(self.B) != -self.base.H:
            raise ValueError(f"{self.B.render()} is not a primitive of -({self.base.H.render()})")

    @classmethod
    def radial(cls, base: CourantModel) -> "GradedCourantModel":
        return cls(base, -poincare_homotopy(base.H))

    @classmethod
    def unchecked(cls, base: CourantModel, B: Form) -> "GradedCourantModel":
        """Build a model whose B need not bound -H; only for exhibiting failures."""
        model = object.__new__(cls)
        object.__setattr__(model, "base", base)
        object.__setattr__(model, "B", B)
        return model

    @property
    def n(self) -> int:
        return self.base.n

    def render(self) -> str:
        return f"Q#[n={self.n}, H={self.base.H.render()}, B={self.B.render()}]"


def _body(q: GradedSection) -> CourantSection:
    """The base section under a degree 0 section with polynomial coefficients."""
    n = q.n
    if q.degree != 0 or not all(c.is_homogeneous(0) for c in q.kform.even):
        raise ValueError(f"{q.render()} is not a degree 0 section pulled back from the base")
    alpha = Form(n, 1, {(j,): c.body() for j, c in enumerate(q.kform.even, start=1)})
    return CourantSection(alpha, VectorField(n, tuple(img.body() for img in q.field.x_images)))


def q_differential(model: GradedCourantModel, q: GradedSection) -> GradedSection:
    if q.degree != -1:
        raise ValueError(f"the differential is fixed on degree -1 sections, got degree {q.degree}")
    n = model.n
    xi = VectorField(n, tuple(img.body() for img in q.field.t_images))
    return GradedSection(kahler_form(contract(xi, model.B)), gder_bracket(de_rham_derivation(n), q.field))


def q_bracket(model: GradedCourantModel, q1: GradedSection, q2: GradedSection) -> GradedSection:
    """Dorfman bracket of sections of degree -1 and 0; only degree 0 pairs carry a form part."""
    _check_same(q1.n, q2.n)
    field = gder_bracket(q1.field, q2.field)
    degrees = {q1.degree, q2.degree}
    if not degrees <= {-1, 0}:
        raise ValueError(f"brackets are computed in degrees -1 and 0, got {sorted(degrees)}")
    if degrees != {0}:
        return GradedSection(KahlerOneForm.zero(q1.n), field)
    return GradedSection(kahler_form(c_bracket(model.base, _body(q1), _body(q2)).alpha), field)


def q_pairing(q1: GradedSection, q2: GradedSection) -> SuperElement:
    return kahler_contract(q1.field, q2.kform) + kahler_contract(q2.field, q1.kform)


def splitting(model: GradedCourantModel, D: GradedDerivation) -> GradedSection:
    """sigma(D) = sum_i D(x_i)*(i_{e_i} B, .), with D itself as the anchor part."""
    n = model.n
    kform = KahlerOneForm.zero(n)
    for i, image in enumerate(D.x_images, start=1):
        if not image.is_zero():
            kform = kform + kahler_form(contract(VectorField.frame(n, i), model.B)).left_mul(image)
    return GradedSection(kform, D)


# --------------------------------------------------
# Lifts through the window
# --------------------------------------------------


def _to_q(u: TildeUSection) -> GradedSection:
    """Degree -1 class of U as a section: the anchor is an isomorphism there."""
    if not u.kform.is_zero():
        raise ValueError(f"{u.render()} has a Kahler part, which degree -1 excludes")
    return GradedSection(KahlerOneForm.zero(u.n), tilde_u_anchor(u).get(IOTA, GradedDerivation.zero(u.n, IOTA)))


def _interior_term(xi: VectorField) -> TildeUSection:
    return TildeUSection.tensor_term(SuperElement.one(xi.n), TildeField(xi.n, IOTA, xi))


def lift_interior(xi: VectorField, truncation: Truncation) -> GradedSection:
    return _to_q(u_normal_form(_interior_term(xi), truncation))


@dataclass(frozen=True)
class _Lifts:
    fields: list[VectorField]
    iota: list[GradedSection]
    lie: list[GradedSection]

    def frame(self, i: int) -> tuple[GradedSection, GradedSection]:
        # constant frames come first in window_fields
        return self.iota[i - 1], self.lie[i - 1]

    @property
    def low(self) -> int:
        """Count of the leading fields with coefficients of degree at most 1."""
        n = self.fields[0].n
        return n + n * n


def _lifts(model: GradedCourantModel, truncation: Truncation) -> _Lifts:
    fields = window_fields(truncation)
    iota = [lift_interior(xi, truncation) for xi in fields]
    return _Lifts(fields, iota, [q_differential(model, q) for q in iota])


def _quotient_cases(truncation: Truncation) -> Iterator[tuple[dict, Any, Any]]:
    """The anchor is injective on each degree -1 block of U."""
    n = truncation.n
    for (weight, degree), block in ideal_basis(truncation).blocks.items():
        if degree != -1:
            continue
        free = [col for j, col in enumerate(block.columns) if j not in set(block.pivots)]
        yield {"weight": weight}, len(free), _rank([_anchor_row(n, col) for col in free])


def _module_cases(truncation: Truncation, lifts: _Lifts) -> tuple[list, list, list]:
    """Per block: anchor ranks of the span of the degree -1 lifts and of the span of all lifts."""
    n = truncation.n
    sub_cases, free_cases, iso_cases = [], [], []
    for weight in truncation.weights:
        for degree in range(-1, n + 1):
            sub, top = [], []
            for i in range(1, n + 1):
                iota, lie_lift = lifts.frame(i)
                sub += [iota.scale(monomial_element(n, m)) for m in super_monomials(n, weight + 1, degree + 1)]
                top += [lie_lift.scale(monomial_element(n, m)) for m in super_monomials(n, weight + 1, degree)]
            if not sub and not top:
                continue
            inputs = {"weight": weight, "degree": degree}
            rank = _rank([derivation_row(q.field) for q in sub + top])
            sub_cases.append((inputs, len(sub), _rank([derivation_row(q.field) for q in sub])))
            free_cases.append((inputs, len(sub) + len(top), rank))
            iso_cases.append((inputs, tangent_dimension(n, weight, degree), rank))
    return sub_cases, free_cases, iso_cases


def _linearity_cases(lifts: _Lifts) -> Iterator[tuple[dict, Any, Any]]:
    """L[f*e_i] lifts to f times the lift of L[e_i] plus d(f) times that of i[e_i]."""
    for xi, lie_lift in zip(lifts.fields, lifts.lie, strict=True):
        i = next(k for k, c in enumerate(xi.components, start=1) if c)
        f = SuperElement.even(xi.components[i - 1])
        iota_i, lie_i = lifts.frame(i)
        expected = lie_i.scale(f)
        df = de_rham(f)
        if not df.is_zero():
            expected = expected + iota_i.scale(df)
        yield {"f": xi.components[i - 1], "i": i}, expected, lie_lift


def _perturbations(truncation: Truncation) -> Iterator[TildeUSection]:
    """Basis elements of the degree -1 window of U~, then the weight 0 K generators."""
    for (_, degree), block in ideal_basis(truncation).blocks.items():
        if degree == -1:
            for col in block.columns:
                yield section_from_coordinates(truncation.n, {col: QQ.one})
    for _, k, _ in k_generators(truncation.n, 0):
        yield k


def _breaks_flatness(model: GradedCourantModel, truncation: Truncation, lifts: _Lifts, eps: TildeUSection) -> bool:
    """Lift i[e_1] to the class of 1 (x) i[e_1] + eps and test the forced splitting on e_1."""
    n = model.n
    e1 = VectorField.frame(n, 1)
    iota = _to_q(u_normal_form(_interior_term(e1) + eps, truncation))
    lie_lift = q_differential(model, iota)
    if iota.field != interior(e1) or lie_lift.field != lie(e1):
        return True
    low = lifts.low
    for eta, eta_iota, eta_lie in zip(lifts.fields[:low], lifts.iota[:low], lifts.lie[:low], strict=True):
        bracket = field_bracket(e1, eta)
        if q_bracket(model, lie_lift, eta_lie) != splitting(model, lie(bracket)):
            return True
        if q_bracket(model, lie_lift, eta_iota) != splitting(model, interior(bracket)):
            return True
    return False


def check_flat_splitting(model: GradedCourantModel, truncation: Truncation, log_level: int = INFO) -> tuple[list[CheckResult], Form]:
    """Run the construction on ``model`` and return its checks and the 2-form read off the lifts."""
    logger = get_logger("Chiral.Splitting", level=log_level)
    n = model.n
    if truncation.n != n:
        raise ValueError(f"model has n={n}, window has n={truncation.n}")
    lifts = _lifts(model, truncation)
    # xi of coefficient degree at most 1 keeps [xi, eta] inside the window
    pairs = [(k, l) for k in range(lifts.low) for l in range(len(lifts.fields))]
    sub_cases, free_cases, iso_cases = _module_cases(truncation, lifts)

    terms = {}
    for i, j in combinations(range(1, n + 1), 2):
        terms[(i, j)] = lifts.frame(i)[1].kform.even[j - 1].body()
    connection = Form(n, 2, terms)

    def bracket_cases(level: int) -> Iterator[tuple[dict, Any, Any]]:
        for k, l in pairs:
            xi, eta = lifts.fields[k], lifts.fields[l]
            other = lifts.iota[l] if level == IOTA else lifts.lie[l]
            image = field_bracket(xi, eta)
            expected = splitting(model, interior(image) if level == IOTA else lie(image))
            yield {"xi": xi, "eta": eta}, expected, q_bracket(model, lifts.lie[k], other)

    zero = SuperElement.zero(n)
    checks = [
        run_cases("lift-minus-one-forced", _quotient_cases(truncation), logger),
        run_cases("lift-minus-one-anchor", (({"xi": xi}, splitting(model, interior(xi)), q) for xi, q in zip(lifts.fields, lifts.iota, strict=True)), logger),
        run_cases("degree-zero-anchor", (({"xi": xi}, lie(xi), q.field) for xi, q in zip(lifts.fields, lifts.lie, strict=True)), logger),
        run_cases("q-sub-injective", sub_cases, logger),
        run_cases("q-fac-linear", _linearity_cases(lifts), logger),
        run_cases("q-prime-free", free_cases, logger),
        run_cases("q-prime-iso", iso_cases, logger),
        run_cases("extension-agrees", (({"xi": xi}, splitting(model, lie(xi)), q) for xi, q in zip(lifts.fields, lifts.lie, strict=True)), logger),
        run_cases("bracket-compatibility", bracket_cases(0), logger),
        run_cases("mixed-bracket", bracket_cases(IOTA), logger),
        run_cases("isotropy", (({"xi": lifts.fields[k], "eta": lifts.fields[l]}, zero, q_pairing(lifts.lie[k], lifts.lie[l])) for k, l in pairs), logger),
        run_cases("primitive", [({"H": model.base.H}, -model.base.H, exterior_d(connection))], logger),
        run_cases("curvature", [({"H": model.base.H}, Form.zero(n, 3), curvature(model.base, Connection(connection)))], logger),
        run_cases(
            "perturbation-detected",
            (({"perturbation": eps}, not ideal_membership(eps, truncation), _breaks_flatness(model, truncation, lifts, eps)) for eps in _perturbations(truncation)),
            logger,
        ),
    ]
    return checks, connection


# --------------------------------------------------
# Entry point
# --------------------------------------------------


@dataclass
class SplittingReport(Report):
    connection: Form | None = None


def _gauge_rank(n: int, D: int) -> tuple[int, int]:
    """Rank and width of B -> (dB, i_E B) on 2-forms with coefficients of degree at most D."""
    euler = euler_field(n)
    rows = []
    for idx in combinations(range(1, n + 1), 2):
        for size in range(D + 1):
            for exps in exponent_vectors(n, size):
                beta = Form(n, 2, {idx: monomial(n, exps)})
                row: dict[tuple, Any] = {}
                for tag, image in (("d", exterior_d(beta)), ("e", contract(euler, beta))):
                    for target, coeff in image.terms.items():
                        for m, value in coeff.items():
                            row[(tag, target, tuple(m))] = value
                rows.append(row)
    return _rank(rows), len(rows)


def unique_flat_connection_dg(
    H: SuperElement,
    truncation: Truncation,
    differential: Form | None = None,
    log_level: int = INFO,
) -> SplittingReport:
    """
    Build the flat splitting of the model twisted by a closed degree-3 element H.

    ``differential`` is the 2-form B fixing d(0, i_xi) = (i_xi B, L_xi); it
    must satisfy dB = -H and defaults to the radial primitive -kappa(H), in
    which case the radial gauge and its uniqueness are checked as well.
    """
    logger = get_logger("Chiral.Splitting", level=log_level)
    n = truncation.n
    _check_same(H.n, n)
    if not H.is_homogeneous(3):
        raise ValueError(f"twist {H.render()} must be homogeneous of degree 3")
    if not de_rham(H).is_zero():
        raise ValueError(f"twist {H.render()} is not closed")
    if any(sum(exps) > truncation.D for poly in H.terms.values() for exps in poly.keys()):
        raise WindowOverflowError(f"twist {H.render()} does not fit the window bound {truncation.D}")

    base = CourantModel(n, H.to_form(3))
    model = GradedCourantModel.radial(base) if differential is None else GradedCourantModel(base, differential)
    logger.info("Splitting %s in the window n=%s D=%s", model.render(), n, truncation.D)

    checks, connection = check_flat_splitting(model, truncation, log_level)
    if differential is None:
        gauge_rank, gauge_width = _gauge_rank(n, truncation.D)
        checks.append(run_cases("radial-gauge", [({"B": connection}, Form.zero(n, 1), contract(euler_field(n), connection))], logger))
        checks.append(run_cases("gauge-unique", [({"n": n, "D": truncation.D}, gauge_width, gauge_rank)], logger))

    lifts = {}
    for i in range(1, n + 1):
        e = VectorField.frame(n, i)
        iota = lift_interior(e, truncation)
        lifts[f"i[{e.render()}]"] = iota.render()
        lifts[f"L[{e.render()}]"] = q_differential(model, iota).render()
    report = SplittingReport(
        "chiral-splitting",
        checks,
        None,
        {"n": n, "truncate": truncation.D, "twist": H.render(), "differential": model.B.render()},
        {"connection": connection.render(), "lifts": lifts},
        connection=connection,
    )
    logger.info("Splitting: %s of %s checks passed", len(checks) - len(report.failures), len(checks))
    return report
