"""
The extended chiral model on the dg manifold of differential forms.

A section of U~ is a Kahler 1-form on the graded ring plus a sum of tensors
beta (x) t, where beta is a graded function and t lies in the cone of vector
fields: i[xi] in degree -1 and L[xi] in degree 0. Tensors are stored on the
monomial basis t = i[x^a*e_i] or L[x^a*e_i].

Each graded formula here is the ungraded one with every term multiplied by
the Koszul sign of the reordering of its symbols.
"""

import random
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cache
from logging import INFO
from typing import NamedTuple

from constant.defaults import DEFAULT_MAXDEG, DEFAULT_SEED, DEFAULT_TRIALS
from lib.report import CheckResult, Report, run_check, smaller
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
    kahler_d,
    kahler_lie,
    render_super_coefficient,
    tau,
    tilde_field_bracket,
)
from lib.symcalc import (
    Indices,
    VectorField,
    _check_index,
    _check_same,
    _join_terms,
    monomial,
    parity_sign,
    poly_ring,
    render_poly,
)
from utils.logger import get_logger
from utils.sampling import random_coefficient, random_exponents

TensorKey = tuple[Indices, int, int]


def key_field(n: int, key: TensorKey) -> TildeField:
    exps, i, level = key
    return TildeField(n, level, VectorField.frame(n, i, monomial(n, exps)))


def field_keys(t: TildeField) -> Iterator[tuple[TensorKey, object]]:
    """Monomial basis keys of t with their rational coefficients."""
    for i, component in enumerate(t.field.components, start=1):
        for exps, c in component.items():
            yield (tuple(exps), i, t.level), c


@cache
def _key_action(n: int, key: TensorKey) -> tuple[TildeField, GradedDerivation]:
    t = key_field(n, key)
    return t, tau(t)


def koszul_sign(degrees: Mapping[str, int], reference: Sequence[str], order: Sequence[str]) -> int:
    """Sign of moving graded symbols from ``reference`` order into ``order``."""
    position = {s: k for k, s in enumerate(reference)}
    sign = 1
    for a, u in enumerate(order):
        for v in order[a + 1 :]:
            if position[u] > position[v] and degrees[u] % 2 and degrees[v] % 2:
                sign = -sign
    return sign


@dataclass(frozen=True)
class TildeUSection:
    n: int
    kform: KahlerOneForm
    tensor: Mapping[TensorKey, SuperElement] = field(default_factory=dict)

    def __post_init__(self) -> None:
        _check_same(self.n, self.kform.n)
        clean: dict[TensorKey, SuperElement] = {}
        for (exps, i, level), c in self.tensor.items():
            exps = tuple(exps)
            if len(exps) != self.n or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent vector {exps} for n={self.n}")
            _check_index(self.n, i)
            if level not in (IOTA, LIE):
                raise ValueError(f"cone level must be -1 or 0, got {level}")
            _check_same(c.n, self.n)
            if not c.is_zero():
                clean[(exps, i, level)] = c
        object.__setattr__(self, "tensor", dict(sorted(clean.items(), key=lambda kv: (kv[0][2], kv[0][1], kv[0][0]))))

    @classmethod
    def zero(cls, n: int) -> "TildeUSection":
        return cls(n, KahlerOneForm.zero(n))

    @classmethod
    def from_kform(cls, omega: KahlerOneForm) -> "TildeUSection":
        return cls(omega.n, omega)

    @classmethod
    def tensor_term(cls, beta: SuperElement, t: TildeField) -> "TildeUSection":
        _check_same(beta.n, t.n)
        terms: dict[TensorKey, SuperElement] = {}
        for key, c in field_keys(t):
            terms[key] = terms.get(key, SuperElement.zero(t.n)) + beta.scale(c)
        return cls(t.n, KahlerOneForm.zero(t.n), terms)

    def is_zero(self) -> bool:
        return self.kform.is_zero() and not self.tensor

    def _combine(self, other: "TildeUSection", sign: int) -> "TildeUSection":
        _check_same(self.n, other.n)
        terms = dict(self.tensor)
        for key, c in other.tensor.items():
            terms[key] = terms.get(key, SuperElement.zero(self.n)) + c.scale(sign)
        kform = self.kform + other.kform if sign == 1 else self.kform - other.kform
        return TildeUSection(self.n, kform, terms)

    def __add__(self, other: "TildeUSection") -> "TildeUSection":
        return self._combine(other, 1)

    def __sub__(self, other: "TildeUSection") -> "TildeUSection":
        return self._combine(other, -1)

    def __neg__(self) -> "TildeUSection":
        return self.scale(-1)

    def scale(self, c) -> "TildeUSection":
        return TildeUSection(self.n, self.kform.scale(c), {key: v.scale(c) for key, v in self.tensor.items()})

    def shrink_candidates(self) -> Iterator["TildeUSection"]:
        for key in self.tensor:
            yield TildeUSection(self.n, self.kform, {k: v for k, v in self.tensor.items() if k != key})
        if not self.kform.is_zero():
            yield TildeUSection(self.n, KahlerOneForm.zero(self.n), self.tensor)
            for omega in smaller(self.kform):
                yield TildeUSection(self.n, omega, self.tensor)

    def render(self) -> str:
        texts = [self.kform.render()] if not self.kform.is_zero() else []
        for (exps, i, level), c in self.tensor.items():
            symbol = f"{'i' if level == IOTA else 'L'}{i}"
            if any(exps):
                symbol += f"[{render_poly(monomial(self.n, exps))}]"
            texts.append(render_super_coefficient(c, symbol))
        return _join_terms(texts)


class _Term(NamedTuple):
    beta: SuperElement
    degree: int
    key: TensorKey
    field: TildeField
    action: GradedDerivation


def _tensor_terms(u: TildeUSection) -> Iterator[_Term]:
    for key, c in u.tensor.items():
        t, action = _key_action(u.n, key)
        for deg, piece in c.pieces().items():
            yield _Term(piece, deg, key, t, action)


def _kform_terms(u: TildeUSection) -> Iterator[tuple[SuperElement, int, SuperElement, int, str, int]]:
    """Homogeneous pieces c*Dy as (c, |c|, y, |y|, kind, i)."""
    n = u.n
    for i, c in enumerate(u.kform.even, start=1):
        for deg, piece in c.pieces().items():
            yield piece, deg, SuperElement.even(poly_ring(n).gens[i - 1]), 0, "x", i
    for i, c in enumerate(u.kform.odd, start=1):
        for deg, piece in c.pieces().items():
            yield piece, deg, SuperElement.odd(n, i), 1, "t", i


def section_pieces(u: TildeUSection) -> dict[int, TildeUSection]:
    """Homogeneous components of u keyed by internal degree."""
    out: dict[int, TildeUSection] = {}
    zero = TildeUSection.zero(u.n)
    for deg, omega in u.kform.pieces().items():
        out[deg] = out.get(deg, zero) + TildeUSection.from_kform(omega)
    for term in _tensor_terms(u):
        deg = term.degree + term.key[2]
        out[deg] = out.get(deg, zero) + TildeUSection(u.n, KahlerOneForm.zero(u.n), {term.key: term.beta})
    return out


def section_degree(u: TildeUSection) -> int:
    degrees = set(section_pieces(u))
    if len(degrees) > 1:
        raise ValueError(f"section of mixed degrees {sorted(degrees)} has no single degree")
    return degrees.pop() if degrees else 0


# --------------------------------------------------
# Structure maps
# --------------------------------------------------


def tilde_u_anchor(u: TildeUSection) -> dict[int, GradedDerivation]:
    """The anchor beta (x) t -> beta*tau(t), split by degree."""
    out: dict[int, GradedDerivation] = {}
    for term in _tensor_terms(u):
        D = term.action.scale(term.beta)
        out[D.degree] = out[D.degree] + D if D.degree in out else D
    return out


def anchor_apply(u: TildeUSection, a: SuperElement) -> SuperElement:
    _check_same(u.n, a.n)
    total = SuperElement.zero(u.n)
    for D in tilde_u_anchor(u).values():
        total = total + gder_apply(D, a)
    return total


def tilde_u_partial(a: SuperElement) -> TildeUSection:
    return TildeUSection.from_kform(kahler_d(a))


def tilde_u_star(a: SuperElement, u: TildeUSection) -> TildeUSection:
    """a*(beta (x) t) = a*beta (x) t + s1 t(a) D(beta) + s2 t(beta) D(a); left product on Kahler forms."""
    _check_same(a.n, u.n)
    n = u.n
    kform = u.kform.left_mul(a)
    tensor: dict[TensorKey, SuperElement] = {}
    for da, ap in a.pieces().items():
        for term in _tensor_terms(u):
            tensor[term.key] = tensor.get(term.key, SuperElement.zero(n)) + ap * term.beta
            s1 = parity_sign(term.key[2] * (da + term.degree))
            s2 = s1 * parity_sign(da * term.degree)
            kform = kform + kahler_d(term.beta).left_mul(gder_apply(term.action, ap).scale(s1))
            kform = kform + kahler_d(ap).left_mul(gder_apply(term.action, term.beta).scale(s2))
    return TildeUSection(n, kform, tensor)


def _kform_tensor_pairing(c: SuperElement, dc: int, y: SuperElement, dy: int, term: _Term, kform_first: bool) -> SuperElement:
    value = c * term.beta * gder_apply(term.action, y)
    if kform_first:
        return value.scale(parity_sign(dy * (term.degree + term.key[2])))
    return value.scale(parity_sign(dc * (term.degree + term.key[2])))


def tilde_u_pairing(u1: TildeUSection, u2: TildeUSection) -> SuperElement:
    _check_same(u1.n, u2.n)
    n = u1.n
    total = SuperElement.zero(n)
    reference = ("b1", "t1", "b2", "t2")
    for p in _tensor_terms(u1):
        for q in _tensor_terms(u2):
            degrees = {"b1": p.degree, "t1": p.key[2], "b2": q.degree, "t2": q.key[2]}
            first = p.beta * gder_apply(q.action, gder_apply(p.action, q.beta))
            second = q.beta * gder_apply(p.action, gder_apply(q.action, p.beta))
            third = gder_apply(p.action, q.beta) * gder_apply(q.action, p.beta)
            total = total - first.scale(koszul_sign(degrees, reference, ("b1", "t2", "t1", "b2")))
            total = total - second.scale(koszul_sign(degrees, reference, ("b2", "t1", "t2", "b1")))
            total = total - third.scale(koszul_sign(degrees, reference, ("t1", "b2", "t2", "b1")))
    for c, dc, y, dy, _, _ in _kform_terms(u1):
        for q in _tensor_terms(u2):
            total = total + _kform_tensor_pairing(c, dc, y, dy, q, kform_first=True)
    for c, dc, y, dy, _, _ in _kform_terms(u2):
        for p in _tensor_terms(u1):
            total = total + _kform_tensor_pairing(c, dc, y, dy, p, kform_first=False)
    return total


def _tensor_bracket(n: int, p: _Term, q: _Term) -> TildeUSection:
    g, t1, h, t2 = p.beta, p.action, q.beta, q.action
    degrees = {"g": p.degree, "t1": p.key[2], "h": q.degree, "t2": q.key[2]}
    reference = ("g", "t1", "h", "t2")

    def sign(*order: str) -> int:
        return koszul_sign(degrees, reference, order)

    result = TildeUSection.tensor_term(g * gder_apply(t1, h), q.field)
    result = result - TildeUSection.tensor_term((h * gder_apply(t2, g)).scale(sign("h", "t2", "g", "t1")), p.field)

    commutator = tilde_field_bracket(q.field, p.field)
    omega = KahlerOneForm.zero(n)
    omega = omega - kahler_d(gder_apply(t2, g)).left_mul(gder_apply(t1, h).scale(sign("t1", "h", "t2", "g")))
    omega = omega - kahler_d(h).left_mul(gder_apply(t1, gder_apply(t2, g)).scale(sign("t1", "t2", "g", "h")))
    omega = omega - kahler_d(gder_apply(t1, gder_apply(t2, g))).left_mul(h.scale(sign("h", "t1", "t2", "g")))
    if commutator is not None:
        result = result - TildeUSection.tensor_term((h * g).scale(sign("h", "g", "t2", "t1")), commutator)
        action = tau(commutator)
        omega = omega - kahler_d(g).left_mul(gder_apply(action, h).scale(sign("t2", "t1", "h", "g")))
        omega = omega - kahler_d(h).left_mul(gder_apply(action, g).scale(sign("t2", "t1", "g", "h")))
    return result + TildeUSection.from_kform(omega)


def tilde_u_bracket(u1: TildeUSection, u2: TildeUSection) -> TildeUSection:
    _check_same(u1.n, u2.n)
    n = u1.n
    result = TildeUSection.zero(n)
    for p in _tensor_terms(u1):
        for q in _tensor_terms(u2):
            result = result + _tensor_bracket(n, p, q)
        result = result + TildeUSection.from_kform(kahler_lie(p.action.scale(p.beta), u2.kform))
    tensors2 = TildeUSection(n, KahlerOneForm.zero(n), u2.tensor)
    for d1, omega in u1.kform.pieces().items():
        left = TildeUSection.from_kform(omega)
        for d2, piece in section_pieces(tensors2).items():
            symmetric = tilde_u_partial(tilde_u_pairing(left, piece))
            result = result + symmetric - tilde_u_bracket(piece, left).scale(parity_sign(d1 * d2))
    return result


def tilde_u_differential(u: TildeUSection) -> TildeUSection:
    """d(beta (x) t) = d(beta) (x) t + (-1)^|beta| beta (x) dt; Lie derivative along d on Kahler forms."""
    n = u.n
    result = TildeUSection.from_kform(kahler_lie(de_rham_derivation(n), u.kform))
    for term in _tensor_terms(u):
        result = result + TildeUSection.tensor_term(de_rham(term.beta), term.field)
        lifted = cone_differential(term.field)
        if lifted is not None:
            result = result + TildeUSection.tensor_term(term.beta.scale(parity_sign(term.degree)), lifted)
    return result


# --------------------------------------------------
# Graded identity suite
# --------------------------------------------------


def random_super_monomials(rng: random.Random, n: int, maxdeg: int, degree: int) -> SuperElement:
    """Random homogeneous element with one or two terms."""
    terms = {}
    for _ in range(rng.randint(1, 2)):
        idx = tuple(sorted(rng.sample(range(1, n + 1), degree)))
        exps = random_exponents(rng, n, rng.randint(0, maxdeg))
        terms[idx] = terms.get(idx, poly_ring(n).zero) + monomial(n, exps, random_coefficient(rng))
    return SuperElement(n, terms)


def random_tilde_section(rng: random.Random, n: int, maxdeg: int, degree: int) -> TildeUSection:
    """Random homogeneous section of the given internal degree."""
    u = TildeUSection.zero(n)
    for _ in range(rng.randint(1, 2)):
        level = rng.choice((IOTA, LIE))
        beta_degree = degree - level
        if not 0 <= beta_degree <= n:
            continue
        key = (random_exponents(rng, n, rng.randint(0, maxdeg)), rng.randint(1, n), level)
        u = u + TildeUSection(n, KahlerOneForm.zero(n), {key: random_super_monomials(rng, n, maxdeg, beta_degree)})
    if rng.random() < 0.5:
        kind = rng.choice(("x", "t"))
        c_degree = degree if kind == "x" else degree - 1
        if 0 <= c_degree <= n:
            c = random_super_monomials(rng, n, maxdeg, c_degree)
            u = u + TildeUSection.from_kform(KahlerOneForm.generator(n, kind, rng.randint(1, n), c))
    return u


def check_tilde_u_identities(
    n: int,
    seed: int = DEFAULT_SEED,
    trials: int = DEFAULT_TRIALS,
    maxdeg: int = DEFAULT_MAXDEG,
    log_level: int = INFO,
    progress: bool = False,
) -> Report:
    """Graded vertex algebroid identities of U~ on random homogeneous inputs."""
    logger = get_logger("Chiral.Identities", level=log_level)
    if trials < 1:
        logger.error("Invalid trial count: %s", trials)
        raise ValueError(f"trials must be at least 1, got {trials}")
    logger.info("Checking graded identities of U~ for n=%s (%s trials, maxdeg %s)", n, trials, maxdeg)

    def sample(rng: random.Random) -> dict:
        values = {}
        for name in ("a", "b"):
            values[name] = random_super_monomials(rng, n, maxdeg, rng.randint(0, n))
        for name in ("u", "u1", "u2"):
            values[name] = random_tilde_section(rng, n, maxdeg, rng.randint(-1, 1))
        return values

    def deg(x) -> int:
        return x.degree if isinstance(x, SuperElement) else section_degree(x)

    def sg(k: int) -> int:
        return parity_sign(k)

    star, br, ip = tilde_u_star, tilde_u_bracket, tilde_u_pairing

    def assoc(v: dict) -> tuple:
        a, b, u = v["a"], v["b"], v["u"]
        s = sg(deg(u) * (deg(a) + deg(b)))
        expected = star(anchor_apply(u, a), tilde_u_partial(b)) + star(anchor_apply(u, b), tilde_u_partial(a)).scale(sg(deg(a) * deg(b)))
        return expected.scale(s), star(a, star(b, u)) - star(a * b, u)

    identities = {
        "assoc": assoc,
        "leib": lambda v: (
            star(anchor_apply(v["u1"], v["a"]), v["u2"]) + star(v["a"], br(v["u1"], v["u2"])).scale(sg(deg(v["u1"]) * deg(v["a"]))),
            br(v["u1"], star(v["a"], v["u2"])),
        ),
        "symm-bracket": lambda v: (
            tilde_u_partial(ip(v["u1"], v["u2"])),
            br(v["u1"], v["u2"]) + br(v["u2"], v["u1"]).scale(sg(deg(v["u1"]) * deg(v["u2"]))),
        ),
        "anchor-lin": lambda v: (
            v["a"] * anchor_apply(v["u"], v["b"]),
            anchor_apply(star(v["a"], v["u"]), v["b"]),
        ),
        "pairing": lambda v: (
            v["a"] * ip(v["u1"], v["u2"]) - anchor_apply(v["u1"], anchor_apply(v["u2"], v["a"])).scale(sg(deg(v["a"]) * (deg(v["u1"]) + deg(v["u2"])))),
            ip(star(v["a"], v["u1"]), v["u2"]),
        ),
        "pairing-inv": lambda v: (
            ip(br(v["u"], v["u1"]), v["u2"]) + ip(v["u1"], br(v["u"], v["u2"])).scale(sg(deg(v["u"]) * deg(v["u1"]))),
            anchor_apply(v["u"], ip(v["u1"], v["u2"])),
        ),
        "deriv": lambda v: (
            star(v["a"], tilde_u_partial(v["b"])) + star(v["b"], tilde_u_partial(v["a"])).scale(sg(deg(v["a"]) * deg(v["b"]))),
            tilde_u_partial(v["a"] * v["b"]),
        ),
        "bracket-o": lambda v: (tilde_u_partial(anchor_apply(v["u"], v["a"])), br(v["u"], tilde_u_partial(v["a"]))),
        "pairing-o": lambda v: (anchor_apply(v["u"], v["a"]), ip(v["u"], tilde_u_partial(v["a"]))),
        "jacobi": lambda v: (
            br(br(v["u"], v["u1"]), v["u2"]) + br(v["u1"], br(v["u"], v["u2"])).scale(sg(deg(v["u"]) * deg(v["u1"]))),
            br(v["u"], br(v["u1"], v["u2"])),
        ),
        "differential-square": lambda v: (TildeUSection.zero(n), tilde_u_differential(tilde_u_differential(v["u"]))),
    }

    checks: list[CheckResult] = []
    for name, identity in identities.items():
        checks.append(run_check(name, sample, identity, trials, seed, logger=logger, progress=progress))
    report = Report("chiral-identities", checks, seed, {"n": n, "trials": trials, "maxdeg": maxdeg})
    logger.info("U~ identities: %s of %s checks passed", len(checks) - len(report.failures), len(checks))
    return report
