"""
Exact Courant algebroids on affine space in the split model.

Sections are pairs (alpha, xi) of a 1-form and a vector field. A model is
fixed by a closed 3-form H; its Dorfman bracket is

    [(a1, x1), (a2, x2)] = ([x1, x2], L_x1 a2 - i_x2 d a1 + i_x2 i_x1 H)

and its pairing is <(a1, x1), (a2, x2)> = i_x1 a2 + i_x2 a1.
"""

import random
from dataclasses import dataclass
from itertools import combinations
from logging import INFO

from constant.defaults import DEFAULT_MAXDEG, DEFAULT_SEED, DEFAULT_TRIALS
from lib.report import CheckResult, Report, run_check, smaller
from lib.symcalc import (
    Form,
    Polynomial,
    Rational,
    VectorField,
    _check_same,
    contract,
    exterior_d,
    field_bracket,
    lie_derivative,
    poincare_homotopy,
    poly_ring,
)
from utils.logger import get_logger
from utils.sampling import random_field, random_form, random_poly


@dataclass(frozen=True)
class CourantSection:
    alpha: Form
    xi: VectorField

    def __post_init__(self) -> None:
        if self.alpha.p != 1:
            raise ValueError(f"the form part of a section must be a 1-form, got degree {self.alpha.p}")
        _check_same(self.alpha.n, self.xi.n)

    @property
    def n(self) -> int:
        return self.xi.n

    @classmethod
    def zero(cls, n: int) -> "CourantSection":
        return cls(Form.zero(n, 1), VectorField.zero(n))

    @classmethod
    def from_form(cls, alpha: Form) -> "CourantSection":
        return cls(alpha, VectorField.zero(alpha.n))

    @classmethod
    def from_field(cls, xi: VectorField) -> "CourantSection":
        return cls(Form.zero(xi.n, 1), xi)

    def __add__(self, other: "CourantSection") -> "CourantSection":
        return CourantSection(self.alpha + other.alpha, self.xi + other.xi)

    def __sub__(self, other: "CourantSection") -> "CourantSection":
        return CourantSection(self.alpha - other.alpha, self.xi - other.xi)

    def __neg__(self) -> "CourantSection":
        return CourantSection(-self.alpha, -self.xi)

    def scale(self, f) -> "CourantSection":
        return CourantSection(self.alpha.scale(f), self.xi.scale(f))

    def shrink_candidates(self):
        for alpha in smaller(self.alpha):
            yield CourantSection(alpha, self.xi)
        for xi in smaller(self.xi):
            yield CourantSection(self.alpha, xi)

    def render(self) -> str:
        return f"[{self.alpha.render()} | {self.xi.render()}]"


@dataclass(frozen=True)
class CourantModel:
    n: int
    H: Form

    def __post_init__(self) -> None:
        if self.H.p != 3:
            raise ValueError(f"the twist must be a 3-form, got degree {self.H.p}")
        _check_same(self.n, self.H.n)
        if not exterior_d(self.H).is_zero():
            raise ValueError(f"twist {self.H.render()} is not closed")

    @classmethod
    def flat(cls, n: int) -> "CourantModel":
        return cls(n, Form.zero(n, 3))

    @classmethod
    def unchecked(cls, n: int, H: Form) -> "CourantModel":
        """Build a model without the closedness check; only for exhibiting failures."""
        model = object.__new__(cls)
        object.__setattr__(model, "n", n)
        object.__setattr__(model, "H", H)
        return model

    def render(self) -> str:
        return f"Q[n={self.n}, H={self.H.render()}]"


@dataclass(frozen=True)
class Connection:
    B: Form

    def __post_init__(self) -> None:
        if self.B.p != 2:
            raise ValueError(f"a connection is given by a 2-form, got degree {self.B.p}")

    def apply(self, xi: VectorField) -> CourantSection:
        return CourantSection(contract(xi, self.B), xi)

    def shift(self, beta: Form) -> "Connection":
        return Connection(self.B + beta)


def _check_model(model: CourantModel, *sections: CourantSection) -> None:
    for q in sections:
        _check_same(model.n, q.n)


def c_partial(model: CourantModel, f: Polynomial) -> CourantSection:
    return CourantSection.from_form(exterior_d(Form.function(f)))


def c_anchor(q: CourantSection) -> VectorField:
    return q.xi


def c_pairing(model: CourantModel, q1: CourantSection, q2: CourantSection) -> Polynomial:
    _check_model(model, q1, q2)
    return contract(q1.xi, q2.alpha).as_function() + contract(q2.xi, q1.alpha).as_function()


def c_bracket(model: CourantModel, q1: CourantSection, q2: CourantSection) -> CourantSection:
    _check_model(model, q1, q2)
    alpha = lie_derivative(q1.xi, q2.alpha) - contract(q2.xi, exterior_d(q1.alpha)) + contract(q2.xi, contract(q1.xi, model.H))
    return CourantSection(alpha, field_bracket(q1.xi, q2.xi))


# --------------------------------------------------
# Axiom suite
# --------------------------------------------------


def _frame(n: int, i: int) -> CourantSection:
    return CourantSection.from_field(VectorField.frame(n, i))


def check_courant_axioms(
    model: CourantModel,
    seed: int = DEFAULT_SEED,
    trials: int = DEFAULT_TRIALS,
    maxdeg: int = DEFAULT_MAXDEG,
    log_level: int = INFO,
    progress: bool = False,
) -> Report:
    logger = get_logger("Courant.Axioms", level=log_level)
    if trials < 1:
        logger.error("Invalid trial count: %s", trials)
        raise ValueError(f"trials must be at least 1, got {trials}")
    n = model.n
    logger.info("Checking Courant axioms for %s (%s trials, maxdeg %s)", model.render(), trials, maxdeg)

    def section(rng: random.Random) -> CourantSection:
        return CourantSection(random_form(rng, n, 1, maxdeg), random_field(rng, n, maxdeg))

    def sample(rng: random.Random) -> dict:
        return {"q": section(rng), "q1": section(rng), "q2": section(rng), "f": random_poly(rng, n, maxdeg)}

    def br(a: CourantSection, b: CourantSection) -> CourantSection:
        return c_bracket(model, a, b)

    def ip(a: CourantSection, b: CourantSection) -> Polynomial:
        return c_pairing(model, a, b)

    identities = {
        "leibniz-rule": lambda v: (br(v["q1"], v["q2"]).scale(v["f"]) + v["q2"].scale(v["q1"].xi.apply(v["f"])), br(v["q1"], v["q2"].scale(v["f"]))),
        "invariance": lambda v: (v["q"].xi.apply(ip(v["q1"], v["q2"])), ip(br(v["q"], v["q1"]), v["q2"]) + ip(v["q1"], br(v["q"], v["q2"]))),
        "bracket-exact": lambda v: (c_partial(model, v["q"].xi.apply(v["f"])), br(v["q"], c_partial(model, v["f"]))),
        "pairing-exact": lambda v: (v["q"].xi.apply(v["f"]), ip(v["q"], c_partial(model, v["f"]))),
        "symmetrization": lambda v: (c_partial(model, ip(v["q1"], v["q2"])), br(v["q1"], v["q2"]) + br(v["q2"], v["q1"])),
        "jacobi": lambda v: (br(br(v["q"], v["q1"]), v["q2"]) + br(v["q1"], br(v["q"], v["q2"])), br(v["q"], br(v["q1"], v["q2"]))),
        "anchor-morphism": lambda v: (field_bracket(v["q1"].xi, v["q2"].xi), br(v["q1"], v["q2"]).xi),
    }

    zero = poly_ring(n).zero
    frames = [_frame(n, i) for i in range(1, n + 1)]
    corners = [{"q": a, "q1": b, "q2": c, "f": zero} for a in frames for b in frames for c in frames]

    checks: list[CheckResult] = []
    for name, identity in identities.items():
        checks.append(run_check(name, sample, identity, trials, seed, corner_cases=corners, logger=logger, progress=progress))

    report = Report("courant-axioms", checks, seed, {"n": n, "twist": model.H.render(), "trials": trials, "maxdeg": maxdeg})
    logger.info("Courant axioms: %s of %s checks passed", len(checks) - len(report.failures), len(checks))
    return report


# --------------------------------------------------
# Connections and automorphisms
# --------------------------------------------------


def curvature(model: CourantModel, connection: Connection) -> Form:
    """
    Assemble c(a, b, c) = i_a([D b, D c] - D[b, c]) on frame fields, where
    D is the connection, into a 3-form. The result equals H + dB.
    """
    n = model.n
    terms = {}
    for a, b, c in combinations(range(1, n + 1), 3):
        fa, fb, fc = (VectorField.frame(n, i) for i in (a, b, c))
        defect = c_bracket(model, connection.apply(fb), connection.apply(fc)) - connection.apply(field_bracket(fb, fc))
        terms[(a, b, c)] = contract(fa, defect.alpha).as_function()
    return Form(n, 3, terms)


def bfield(model: CourantModel, beta: Form, q: CourantSection) -> CourantSection:
    if beta.p != 2:
        raise ValueError(f"a B-field must be a 2-form, got degree {beta.p}")
    _check_model(model, q)
    return CourantSection(q.alpha + contract(q.xi, beta), q.xi)


def bfield_defect(model: CourantModel, beta: Form, q1: CourantSection, q2: CourantSection) -> CourantSection:
    """[e(q1), e(q2)] - e([q1, q2]) for the B-field transform e; equals i_x2 i_x1 d(beta)."""
    return c_bracket(model, bfield(model, beta, q1), bfield(model, beta, q2)) - bfield(model, beta, c_bracket(model, q1, q2))


def bfield_violation(model: CourantModel, beta: Form) -> tuple[CourantSection, CourantSection] | None:
    """A pair of frame sections whose bracket the B-field transform does not preserve."""
    n = model.n
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            q1, q2 = _frame(n, a), _frame(n, b)
            defect = bfield_defect(model, beta, q1, q2)
            if not (defect.alpha.is_zero() and defect.xi.is_zero()):
                return q1, q2
    return None


def flat_connection(model: CourantModel) -> Connection:
    return Connection(-poincare_homotopy(model.H))


# --------------------------------------------------
# Sum and scalar multiple
# --------------------------------------------------


def c_add(m1: CourantModel, m2: CourantModel) -> CourantModel:
    _check_same(m1.n, m2.n)
    return CourantModel(m1.n, m1.H + m2.H)


def sum_section(q1: CourantSection, q2: CourantSection) -> CourantSection:
    """Normal form of the pair (q1, q2) in the sum; both must share the anchor."""
    if q1.xi != q2.xi:
        raise ValueError(f"sections {q1.render()} and {q2.render()} have different anchors")
    return CourantSection(q1.alpha + q2.alpha, q1.xi)


def c_scale(lam: Rational, model: CourantModel) -> CourantModel:
    if lam == 0:
        return CourantModel.flat(model.n)
    return CourantModel(model.n, model.H.scale(lam))


def scale_section(lam: Rational, alpha: Form, q: CourantSection) -> CourantSection:
    """Normal form (alpha + lam*beta, xi) of the class of (alpha, (beta, xi)) in the scalar multiple."""
    return CourantSection(alpha + q.alpha.scale(lam), q.xi)
