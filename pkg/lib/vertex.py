"""
The exact vertex algebroid on the commuting coordinate frame.

A section is a 1-form plus a coefficient list (g_1, ..., g_n) standing for
sum_i g_i (x) d/dx_i. The function action is not associative:

    f * (g (x) d_i) = fg (x) d_i + s (d_i f dg + d_i g df)

and the bracket and pairing on frame sections are the unique extensions
compatible with the algebroid identities. Every sign that the identities
leave to convention is a toggle of the model's ``SignVector``.
"""

import random
from dataclasses import astuple, dataclass, field, replace
from logging import INFO

from constant.defaults import DEFAULT_MAXDEG, DEFAULT_SEED, DEFAULT_TRIALS
from constant.signs import CONSISTENT_SIGNS, PRINTED_SIGNS, SIGN_NAMES
from lib.courant import CourantModel, CourantSection, c_bracket, c_pairing
from lib.report import CheckResult, Report, run_check, smaller
from lib.symcalc import (
    Form,
    Polynomial,
    VectorField,
    _check_same,
    _join_terms,
    contract,
    exterior_d,
    lie_derivative,
    nvars,
    partial,
    poly_ring,
    render_coefficient,
)
from utils.logger import get_logger
from utils.sampling import random_field, random_form, random_poly


@dataclass(frozen=True)
class SignVector:
    assoc: int = CONSISTENT_SIGNS[0]
    dictionary: int = CONSISTENT_SIGNS[1]
    comm: int = CONSISTENT_SIGNS[2]
    pair: int = CONSISTENT_SIGNS[3]
    assoc3: int = CONSISTENT_SIGNS[4]
    diff: int = CONSISTENT_SIGNS[5]

    def __post_init__(self) -> None:
        for name, value in zip(SIGN_NAMES, astuple(self), strict=True):
            if value not in (1, -1):
                raise ValueError(f"sign '{name}' must be +1 or -1, got {value}")

    @classmethod
    def from_tuple(cls, values) -> "SignVector":
        values = tuple(values)
        if len(values) != len(SIGN_NAMES):
            raise ValueError(f"a sign vector has {len(SIGN_NAMES)} entries, got {len(values)}")
        return cls(*values)

    @classmethod
    def printed(cls) -> "SignVector":
        return cls.from_tuple(PRINTED_SIGNS)

    def as_tuple(self) -> tuple[int, ...]:
        return astuple(self)

    def flipped(self, name: str) -> "SignVector":
        if name not in SIGN_NAMES:
            raise ValueError(f"unknown sign '{name}', expected one of {', '.join(SIGN_NAMES)}")
        return replace(self, **{name: -getattr(self, name)})

    def to_dict(self) -> dict[str, int]:
        return dict(zip(SIGN_NAMES, self.as_tuple(), strict=True))

    def render(self) -> str:
        return "(" + ", ".join(f"{v:+d}" for v in self.as_tuple()) + ")"


@dataclass(frozen=True)
class VertexModel:
    n: int
    signs: SignVector = field(default_factory=SignVector)

    def render(self) -> str:
        return f"V[n={self.n}, signs={self.signs.render()}]"


@dataclass(frozen=True)
class VertexModelTwisted:
    """A vertex model whose bracket is shifted by a closed 3-form, as produced by the torsor action."""

    base: VertexModel
    H: Form

    def __post_init__(self) -> None:
        if self.H.p != 3:
            raise ValueError(f"the twist must be a 3-form, got degree {self.H.p}")
        _check_same(self.base.n, self.H.n)
        if not exterior_d(self.H).is_zero():
            raise ValueError(f"twist {self.H.render()} is not closed")

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def signs(self) -> SignVector:
        return self.base.signs

    def render(self) -> str:
        return f"V[n={self.n}, signs={self.signs.render()}, H={self.H.render()}]"


AnyVertexModel = VertexModel | VertexModelTwisted


def _twist(model: AnyVertexModel) -> Form | None:
    return model.H if isinstance(model, VertexModelTwisted) else None


@dataclass(frozen=True)
class VertexSection:
    alpha: Form
    coeffs: tuple[Polynomial, ...]

    def __post_init__(self) -> None:
        if self.alpha.p != 1:
            raise ValueError(f"the form part of a section must be a 1-form, got degree {self.alpha.p}")
        if len(self.coeffs) != self.alpha.n:
            raise ValueError(f"a section needs {self.alpha.n} frame coefficients, got {len(self.coeffs)}")
        for g in self.coeffs:
            _check_same(nvars(g), self.alpha.n)

    @property
    def n(self) -> int:
        return self.alpha.n

    @property
    def anchor(self) -> VectorField:
        return VectorField(self.n, self.coeffs)

    @classmethod
    def zero(cls, n: int) -> "VertexSection":
        return cls(Form.zero(n, 1), tuple(poly_ring(n).zero for _ in range(n)))

    @classmethod
    def from_form(cls, alpha: Form) -> "VertexSection":
        return cls(alpha, tuple(poly_ring(alpha.n).zero for _ in range(alpha.n)))

    @classmethod
    def from_field(cls, xi: VectorField, alpha: Form | None = None) -> "VertexSection":
        return cls(Form.zero(xi.n, 1) if alpha is None else alpha, xi.components)

    @classmethod
    def frame(cls, n: int, i: int, g: Polynomial | None = None) -> "VertexSection":
        return cls.from_field(VectorField.frame(n, i, g))

    def is_zero(self) -> bool:
        return self.alpha.is_zero() and not any(self.coeffs)

    def __add__(self, other: "VertexSection") -> "VertexSection":
        return VertexSection(self.alpha + other.alpha, tuple(a + b for a, b in zip(self.coeffs, other.coeffs, strict=True)))

    def __sub__(self, other: "VertexSection") -> "VertexSection":
        return VertexSection(self.alpha - other.alpha, tuple(a - b for a, b in zip(self.coeffs, other.coeffs, strict=True)))

    def __neg__(self) -> "VertexSection":
        return VertexSection(-self.alpha, tuple(-a for a in self.coeffs))

    def shrink_candidates(self):
        for alpha in smaller(self.alpha):
            yield VertexSection(alpha, self.coeffs)
        for xi in smaller(self.anchor):
            yield VertexSection(self.alpha, xi.components)

    def render(self) -> str:
        frame = _join_terms([render_coefficient(g, f"e{i}") for i, g in enumerate(self.coeffs, start=1) if g])
        return f"[{self.alpha.render()} | {frame}]"


def _d(f: Polynomial) -> Form:
    return exterior_d(Form.function(f))


def _check_model(model: AnyVertexModel, *sections: VertexSection) -> None:
    for v in sections:
        _check_same(model.n, v.n)


def v_partial(model: AnyVertexModel, f: Polynomial) -> VertexSection:
    return VertexSection.from_form(_d(f))


def star(model: AnyVertexModel, f: Polynomial, v: VertexSection) -> VertexSection:
    _check_model(model, v)
    s = model.signs.assoc
    alpha = v.alpha.scale(f)
    df = _d(f)
    for i, g in enumerate(v.coeffs, start=1):
        if not g:
            continue
        alpha = alpha + (_d(g).scale(partial(f, i)) + df.scale(partial(g, i))).scale(s)
    return VertexSection(alpha, tuple(f * g for g in v.coeffs))


def _frame_pairing(g: Polynomial, i: int, h: Polynomial, j: int) -> Polynomial:
    dig = partial(g, i)
    return g * partial(partial(h, i), j) + partial(h, i) * partial(g, j) + h * partial(dig, j)


def v_pairing(model: AnyVertexModel, v: VertexSection, w: VertexSection) -> Polynomial:
    _check_model(model, v, w)
    value = contract(w.anchor, v.alpha).as_function() + contract(v.anchor, w.alpha).as_function()
    frame = poly_ring(model.n).zero
    for i, g in enumerate(v.coeffs, start=1):
        for j, h in enumerate(w.coeffs, start=1):
            if g and h:
                frame += _frame_pairing(g, i, h, j)
    return value + model.signs.pair * frame


def v_bracket(model: AnyVertexModel, v: VertexSection, w: VertexSection) -> VertexSection:
    _check_model(model, v, w)
    n = model.n
    s, c, p = model.signs.assoc, model.signs.comm, model.signs.pair
    xi, eta = v.anchor, w.anchor
    coeffs = [poly_ring(n).zero for _ in range(n)]
    alpha = lie_derivative(xi, w.alpha) - lie_derivative(eta, v.alpha) + exterior_d(contract(eta, v.alpha)).scale(c)

    for i, g in enumerate(v.coeffs, start=1):
        if not g:
            continue
        for j, h in enumerate(w.coeffs, start=1):
            if not h:
                continue
            dih, djg = partial(h, i), partial(g, j)
            dijg = partial(djg, i)
            coeffs[j - 1] += g * dih
            coeffs[i - 1] -= h * djg
            correction = _d(djg).scale(dih) + _d(h).scale(dijg)
            alpha = alpha - correction.scale(s) + _d(dijg).scale(c * p * h)

    twist = _twist(model)
    if twist is not None:
        alpha = alpha + contract(eta, contract(xi, twist))
    return VertexSection(alpha, tuple(coeffs))


# --------------------------------------------------
# Algebroid identities
# --------------------------------------------------


def check_algebroid_identities(
    model: AnyVertexModel,
    seed: int = DEFAULT_SEED,
    trials: int = DEFAULT_TRIALS,
    maxdeg: int = DEFAULT_MAXDEG,
    log_level: int = INFO,
    progress: bool = False,
    stop_on_failure: bool = False,
) -> Report:
    logger = get_logger("Vertex.Identities", level=log_level)
    if trials < 1:
        logger.error("Invalid trial count: %s", trials)
        raise ValueError(f"trials must be at least 1, got {trials}")
    n = model.n
    signs = model.signs

    def section(rng: random.Random) -> VertexSection:
        return VertexSection.from_field(random_field(rng, n, maxdeg), random_form(rng, n, 1, maxdeg))

    def sample(rng: random.Random) -> dict:
        return {
            "f": random_poly(rng, n, maxdeg),
            "g": random_poly(rng, n, maxdeg),
            "v": section(rng),
            "v1": section(rng),
            "v2": section(rng),
        }

    def st(f, v):
        return star(model, f, v)

    def br(a, b):
        return v_bracket(model, a, b)

    def ip(a, b):
        return v_pairing(model, a, b)

    def pi(v, f):
        return v.anchor.apply(f)

    def dd(f):
        return v_partial(model, f)

    identities = {
        "assoc": lambda x: (
            st(x["f"], st(x["g"], x["v"])) - st(x["f"] * x["g"], x["v"]),
            VertexSection.from_form((_d(x["g"]).scale(pi(x["v"], x["f"])) + _d(x["f"]).scale(pi(x["v"], x["g"]))).scale(signs.assoc)),
        ),
        "leib": lambda x: (br(x["v1"], st(x["f"], x["v2"])), st(pi(x["v1"], x["f"]), x["v2"]) + st(x["f"], br(x["v1"], x["v2"]))),
        "symm-bracket": lambda x: (br(x["v1"], x["v2"]) + br(x["v2"], x["v1"]), dd(signs.comm * ip(x["v1"], x["v2"]))),
        "anchor-lin": lambda x: (st(x["f"], x["v"]).anchor, x["v"].anchor.scale(x["f"])),
        "pairing": lambda x: (ip(st(x["f"], x["v1"]), x["v2"]), x["f"] * ip(x["v1"], x["v2"]) + signs.assoc3 * pi(x["v1"], pi(x["v2"], x["f"]))),
        "pairing-inv": lambda x: (pi(x["v"], ip(x["v1"], x["v2"])), ip(br(x["v"], x["v1"]), x["v2"]) + ip(x["v1"], br(x["v"], x["v2"]))),
        "deriv": lambda x: (dd(x["f"] * x["g"]), st(x["f"], dd(x["g"])) + st(x["g"], dd(x["f"]))),
        "bracket-o": lambda x: (br(x["v"], dd(x["f"])), dd(pi(x["v"], x["f"]))),
        "pairing-o": lambda x: (ip(x["v"], dd(x["f"])), pi(x["v"], x["f"])),
    }

    corners = vertex_corner_cases(n)
    checks: list[CheckResult] = []
    for name, identity in identities.items():
        result = run_check(name, sample, identity, trials, seed, corner_cases=corners, logger=logger, progress=progress)
        checks.append(result)
        if stop_on_failure and not result.passed:
            break

    report = Report("vertex-identities", checks, seed, {"n": n, "signs": signs.to_dict(), "trials": trials, "maxdeg": maxdeg})
    logger.debug("Algebroid identities for %s: %s failures", model.render(), len(report.failures))
    return report


def vertex_corner_cases(n: int) -> list[dict]:
    """Fixed inputs (constants, x1, x1*x1, the zero section and x1 (x) d_1) evaluated before any random trial."""
    R = poly_ring(n)
    x1 = R.gens[0]
    functions = [R.zero, R.one, x1, x1 * x1]
    sections = [VertexSection.zero(n), VertexSection.frame(n, 1, x1)]
    cases = []
    for f in functions:
        for g in functions[1:]:
            for v in sections:
                for w in sections:
                    cases.append({"f": f, "g": g, "v": v, "v1": v, "v2": w})
    return cases


# --------------------------------------------------
# Torsor action of Courant algebroids
# --------------------------------------------------


def torsor_add(q: CourantModel, V: AnyVertexModel) -> VertexModelTwisted:
    _check_same(q.n, V.n)
    base = V.base if isinstance(V, VertexModelTwisted) else V
    twist = _twist(V)
    return VertexModelTwisted(base, q.H if twist is None else twist + q.H)


def torsor_pair(q: CourantSection, v: VertexSection) -> VertexSection:
    """Normal form v + alpha_q of the pair (q, v) over a common anchor."""
    if q.xi != v.anchor:
        raise ValueError(f"sections {q.render()} and {v.render()} have different anchors")
    return VertexSection(v.alpha + q.alpha, v.coeffs)


def torsor_diff(V2: AnyVertexModel, V1: AnyVertexModel) -> CourantModel:
    _check_same(V2.n, V1.n)
    if V2.signs != V1.signs:
        raise ValueError(f"cannot subtract models with signs {V2.signs.render()} and {V1.signs.render()}")
    zero = Form.zero(V2.n, 3)
    h2, h1 = _twist(V2) or zero, _twist(V1) or zero
    return CourantModel(V2.n, h2 - h1)


def diff_section(v2: VertexSection, v1: VertexSection) -> CourantSection:
    """Normal form (alpha2 - alpha1, xi) of the pair (v2, v1) over a common anchor."""
    if v2.coeffs != v1.coeffs:
        raise ValueError(f"sections {v2.render()} and {v1.render()} have different anchors")
    return CourantSection(v2.alpha - v1.alpha, v2.anchor)



@dataclass(frozen=True)
class DiffSection:
    """A section of V2 - V1: a section of V2 and one of V1 over the same anchor."""

    v2: VertexSection
    v1: VertexSection

    def __post_init__(self) -> None:
        _check_same(self.v2.n, self.v1.n)
        if self.v2.coeffs != self.v1.coeffs:
            raise ValueError(f"sections {self.v2.render()} and {self.v1.render()} have different anchors")

    @classmethod
    def from_field(cls, xi: VectorField, alpha2: Form, alpha1: Form) -> "DiffSection":
        return cls(VertexSection.from_field(xi, alpha2), VertexSection.from_field(xi, alpha1))

    @property
    def anchor(self) -> VectorField:
        return self.v2.anchor

    def normal_form(self) -> CourantSection:
        return diff_section(self.v2, self.v1)

    def render(self) -> str:
        return f"({self.v2.render()}, {self.v1.render()})"


@dataclass(frozen=True)
class SumSection:
    """A section of Q + V: a Courant section and a vertex section over the same anchor."""

    q: CourantSection
    v: VertexSection

    def __post_init__(self) -> None:
        if self.q.xi != self.v.anchor:
            raise ValueError(f"sections {self.q.render()} and {self.v.render()} have different anchors")

    @property
    def anchor(self) -> VectorField:
        return self.v.anchor

    def normal_form(self) -> VertexSection:
        return torsor_pair(self.q, self.v)

    def render(self) -> str:
        return f"({self.q.render()}, {self.v.render()})"


def diff_star(V2: AnyVertexModel, V1: AnyVertexModel, f: Polynomial, p: DiffSection) -> DiffSection:
    return DiffSection(star(V2, f, p.v2), star(V1, f, p.v1))


def diff_bracket(V2: AnyVertexModel, V1: AnyVertexModel, p: DiffSection, r: DiffSection) -> DiffSection:
    return DiffSection(v_bracket(V2, p.v2, r.v2), v_bracket(V1, p.v1, r.v1))


def diff_pairing(V2: AnyVertexModel, V1: AnyVertexModel, p: DiffSection, r: DiffSection, printed: bool = False) -> Polynomial:
    """<p2, r2> - <p1, r1>; ``printed`` gives the sum instead, which is not O-bilinear."""
    sign = 1 if printed else -1
    return v_pairing(V2, p.v2, r.v2) + sign * v_pairing(V1, p.v1, r.v1)


def sum_star(V: AnyVertexModel, f: Polynomial, p: SumSection) -> SumSection:
    return SumSection(p.q.scale(f), star(V, f, p.v))


def sum_bracket(q: CourantModel, V: AnyVertexModel, p: SumSection, r: SumSection) -> SumSection:
    return SumSection(c_bracket(q, p.q, r.q), v_bracket(V, p.v, r.v))


def sum_pairing(q: CourantModel, V: AnyVertexModel, p: SumSection, r: SumSection) -> Polynomial:
    return c_pairing(q, p.q, r.q) + v_pairing(V, p.v, r.v)


def check_torsor_laws(
    V2: AnyVertexModel,
    V1: AnyVertexModel,
    q: CourantModel,
    seed: int = DEFAULT_SEED,
    trials: int = DEFAULT_TRIALS,
    maxdeg: int = DEFAULT_MAXDEG,
    printed_pairing: bool = False,
    log_level: int = INFO,
    progress: bool = False,
) -> Report:
    """
    Compare the componentwise operations on pairs with the models they build.

    Pairs (v2, v1) are sent to sections of ``torsor_diff(V2, V1)`` and pairs
    (q, v) to sections of ``torsor_add(q, V1)``; bracket, pairing and the
    function action must commute with these maps.
    """
    logger = get_logger("Vertex.Torsor", level=log_level)
    if trials < 1:
        logger.error("Invalid trial count: %s", trials)
        raise ValueError(f"trials must be at least 1, got {trials}")
    difference = torsor_diff(V2, V1)
    total = torsor_add(q, V1)
    n = difference.n

    def sample(rng: random.Random) -> dict:
        return {
            "f": random_poly(rng, n, maxdeg),
            "xi": random_field(rng, n, maxdeg),
            "eta": random_field(rng, n, maxdeg),
            "a2": random_form(rng, n, 1, maxdeg),
            "a1": random_form(rng, n, 1, maxdeg),
            "b2": random_form(rng, n, 1, maxdeg),
            "b1": random_form(rng, n, 1, maxdeg),
        }

    def pairs(x: dict) -> tuple[DiffSection, DiffSection]:
        return DiffSection.from_field(x["xi"], x["a2"], x["a1"]), DiffSection.from_field(x["eta"], x["b2"], x["b1"])

    def sums(x: dict) -> tuple[SumSection, SumSection]:
        return (
            SumSection(CourantSection(x["a2"], x["xi"]), VertexSection.from_field(x["xi"], x["a1"])),
            SumSection(CourantSection(x["b2"], x["eta"]), VertexSection.from_field(x["eta"], x["b1"])),
        )

    def dpair(p: DiffSection, r: DiffSection) -> Polynomial:
        return diff_pairing(V2, V1, p, r, printed=printed_pairing)

    def difference_bracket(x):
        p, r = pairs(x)
        return c_bracket(difference, p.normal_form(), r.normal_form()), diff_bracket(V2, V1, p, r).normal_form()

    def difference_pairing(x):
        p, r = pairs(x)
        return c_pairing(difference, p.normal_form(), r.normal_form()), dpair(p, r)

    def difference_action(x):
        p, _ = pairs(x)
        return p.normal_form().scale(x["f"]), diff_star(V2, V1, x["f"], p).normal_form()

    def difference_bilinear(x):
        p, r = pairs(x)
        return x["f"] * dpair(p, r), dpair(diff_star(V2, V1, x["f"], p), r)

    def difference_recovers(x):
        p, _ = pairs(x)
        return p.v2, torsor_pair(p.normal_form(), p.v1)

    def sum_bracket_law(x):
        p, r = sums(x)
        return v_bracket(total, p.normal_form(), r.normal_form()), sum_bracket(q, V1, p, r).normal_form()

    def sum_pairing_law(x):
        p, r = sums(x)
        return v_pairing(total, p.normal_form(), r.normal_form()), sum_pairing(q, V1, p, r)

    def sum_action(x):
        p, _ = sums(x)
        return star(total, x["f"], p.normal_form()), sum_star(V1, x["f"], p).normal_form()

    laws = {
        "difference-bracket": difference_bracket,
        "difference-pairing": difference_pairing,
        "difference-action": difference_action,
        "difference-bilinear": difference_bilinear,
        "difference-recovers": difference_recovers,
        "sum-bracket": sum_bracket_law,
        "sum-pairing": sum_pairing_law,
        "sum-action": sum_action,
    }

    corners = torsor_corner_cases(n)
    checks = [run_check(name, sample, law, trials, seed, corner_cases=corners, logger=logger, progress=progress) for name, law in laws.items()]
    config = {"n": n, "signs": V1.signs.to_dict(), "trials": trials, "maxdeg": maxdeg, "printed-pairing": printed_pairing}
    report = Report("torsor-laws", checks, seed, config, {"difference": difference.render(), "sum": total.render()})
    logger.debug("Torsor laws: %s failures", len(report.failures))
    return report


def torsor_corner_cases(n: int) -> list[dict]:
    """The frame x1 (x) d_1 on both sides with f = x1*x1, where a summed pairing picks up 2*xi(eta(f))."""
    R = poly_ring(n)
    x1 = R.gens[0]
    frame = VectorField.frame(n, 1, x1)
    zero = Form.zero(n, 1)
    return [{"f": x1 * x1, "xi": frame, "eta": frame, "a2": zero, "a1": zero, "b2": zero, "b1": zero}]
