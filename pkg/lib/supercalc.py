"""
Graded-commutative calculus on the de Rham complex viewed as a graded ring.

A ``SuperElement`` is a polynomial combination of products of odd generators
t1..tn (the classes of dx1..dxn); its degree is the number of odd factors.
Derivations are stored by their images on the 2n generators.
"""

from collections.abc import Mapping
from dataclasses import dataclass, field

from lib.symcalc import (
    Form,
    Indices,
    Polynomial,
    VectorField,
    _check_index,
    _check_same,
    _join_terms,
    field_bracket,
    merge_indices,
    nvars,
    parity_sign,
    partial,
    poly_ring,
    render_coefficient,
    render_poly,
)


@dataclass(frozen=True)
class SuperElement:
    n: int
    terms: Mapping[Indices, Polynomial] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean: dict[Indices, Polynomial] = {}
        for idx, coeff in self.terms.items():
            idx = tuple(idx)
            if any(b <= a for a, b in zip(idx, idx[1:], strict=False)):
                raise ValueError(f"odd index {idx} is not strictly increasing")
            for i in idx:
                _check_index(self.n, i)
            _check_same(nvars(coeff), self.n)
            if coeff:
                clean[idx] = coeff
        object.__setattr__(self, "terms", dict(sorted(clean.items(), key=lambda kv: (len(kv[0]), kv[0]))))

    @classmethod
    def zero(cls, n: int) -> "SuperElement":
        return cls(n, {})

    @classmethod
    def one(cls, n: int) -> "SuperElement":
        return cls(n, {(): poly_ring(n).one})

    @classmethod
    def even(cls, f: Polynomial) -> "SuperElement":
        return cls(nvars(f), {(): f})

    @classmethod
    def odd(cls, n: int, i: int) -> "SuperElement":
        _check_index(n, i)
        return cls(n, {(i,): poly_ring(n).one})

    @classmethod
    def from_form(cls, omega: Form) -> "SuperElement":
        return cls(omega.n, dict(omega.terms))

    def to_form(self, p: int) -> Form:
        return Form(self.n, p, {idx: c for idx, c in self.terms.items() if len(idx) == p})

    def is_zero(self) -> bool:
        return not self.terms

    def pieces(self) -> dict[int, "SuperElement"]:
        """Homogeneous components keyed by degree."""
        out: dict[int, dict[Indices, Polynomial]] = {}
        for idx, c in self.terms.items():
            out.setdefault(len(idx), {})[idx] = c
        return {deg: SuperElement(self.n, terms) for deg, terms in out.items()}

    @property
    def degree(self) -> int:
        degrees = {len(idx) for idx in self.terms}
        if len(degrees) > 1:
            raise ValueError(f"element of mixed degrees {sorted(degrees)} has no single degree")
        return degrees.pop() if degrees else 0

    def is_homogeneous(self, degree: int) -> bool:
        return all(len(idx) == degree for idx in self.terms)

    def body(self) -> Polynomial:
        return self.terms.get((), poly_ring(self.n).zero)

    def _combine(self, other: "SuperElement", sign: int) -> "SuperElement":
        _check_same(self.n, other.n)
        terms = dict(self.terms)
        zero = poly_ring(self.n).zero
        for idx, c in other.terms.items():
            terms[idx] = terms.get(idx, zero) + sign * c
        return SuperElement(self.n, terms)

    def __add__(self, other: "SuperElement") -> "SuperElement":
        return self._combine(other, 1)

    def __sub__(self, other: "SuperElement") -> "SuperElement":
        return self._combine(other, -1)

    def __neg__(self) -> "SuperElement":
        return SuperElement(self.n, {idx: -c for idx, c in self.terms.items()})

    def __mul__(self, other: "SuperElement") -> "SuperElement":
        return super_mul(self, other)

    def scale(self, f) -> "SuperElement":
        return SuperElement(self.n, {idx: f * c for idx, c in self.terms.items()})

    def render(self) -> str:
        texts = []
        for idx, c in self.terms.items():
            if not idx:
                texts.append(render_poly(c))
            else:
                texts.append(render_coefficient(c, "*".join(f"t{i}" for i in idx)))
        return _join_terms(texts)


def render_super_coefficient(c: SuperElement, symbol: str) -> str:
    if len(c.terms) == 1 and len(next(iter(c.terms.values()))) == 1:
        text = c.render()
        if text == "1":
            return symbol
        if text == "-1":
            return "-" + symbol
        return f"{text}*{symbol}"
    return f"({c.render()})*{symbol}"


def super_sum(n: int, items) -> SuperElement:
    total = SuperElement.zero(n)
    for item in items:
        total = total + item
    return total


def super_mul(a: SuperElement, b: SuperElement) -> SuperElement:
    _check_same(a.n, b.n)
    zero = poly_ring(a.n).zero
    terms: dict[Indices, Polynomial] = {}
    for i1, c1 in a.terms.items():
        for i2, c2 in b.terms.items():
            merged = merge_indices(i1, i2)
            if merged is None:
                continue
            sign, idx = merged
            terms[idx] = terms.get(idx, zero) + sign * c1 * c2
    return SuperElement(a.n, terms)


# --------------------------------------------------
# Graded derivations
# --------------------------------------------------


@dataclass(frozen=True)
class GradedDerivation:
    n: int
    degree: int
    x_images: tuple[SuperElement, ...]
    t_images: tuple[SuperElement, ...]

    def __post_init__(self) -> None:
        if len(self.x_images) != self.n or len(self.t_images) != self.n:
            raise ValueError(f"a derivation needs {self.n} images per generator family")
        for img in self.x_images:
            _check_same(img.n, self.n)
            if not img.is_homogeneous(self.degree):
                raise ValueError(f"image {img.render()} of an even generator must have degree {self.degree}")
        for img in self.t_images:
            _check_same(img.n, self.n)
            if not img.is_homogeneous(self.degree + 1):
                raise ValueError(f"image {img.render()} of an odd generator must have degree {self.degree + 1}")

    @classmethod
    def zero(cls, n: int, degree: int) -> "GradedDerivation":
        z = tuple(SuperElement.zero(n) for _ in range(n))
        return cls(n, degree, z, z)

    def is_zero(self) -> bool:
        return all(img.is_zero() for img in self.x_images + self.t_images)

    def __add__(self, other: "GradedDerivation") -> "GradedDerivation":
        _check_same(self.n, other.n)
        if self.degree != other.degree:
            raise ValueError(f"cannot add derivations of degrees {self.degree} and {other.degree}")
        return GradedDerivation(
            self.n,
            self.degree,
            tuple(a + b for a, b in zip(self.x_images, other.x_images, strict=True)),
            tuple(a + b for a, b in zip(self.t_images, other.t_images, strict=True)),
        )

    def __neg__(self) -> "GradedDerivation":
        return GradedDerivation(self.n, self.degree, tuple(-a for a in self.x_images), tuple(-a for a in self.t_images))

    def __sub__(self, other: "GradedDerivation") -> "GradedDerivation":
        return self + (-other)

    def scale(self, a: SuperElement) -> "GradedDerivation":
        """The derivation a*D for a homogeneous element a."""
        _check_same(self.n, a.n)
        deg = a.degree
        return GradedDerivation(
            self.n,
            self.degree + deg,
            tuple(a * img for img in self.x_images),
            tuple(a * img for img in self.t_images),
        )

    def render(self) -> str:
        parts = [f"x{i}->{img.render()}" for i, img in enumerate(self.x_images, start=1) if not img.is_zero()]
        parts += [f"t{i}->{img.render()}" for i, img in enumerate(self.t_images, start=1) if not img.is_zero()]
        return "{" + ", ".join(parts) + "}"


def gder_apply(D: GradedDerivation, a: SuperElement) -> SuperElement:
    _check_same(D.n, a.n)
    n = a.n
    result = SuperElement.zero(n)
    for idx, f in a.terms.items():
        theta = SuperElement(n, {idx: poly_ring(n).one})
        for j in range(1, n + 1):
            df = partial(f, j)
            if df and not D.x_images[j - 1].is_zero():
                result = result + SuperElement.even(df) * D.x_images[j - 1] * theta
        body = SuperElement.even(f)
        for k, i in enumerate(idx):
            image = D.t_images[i - 1]
            if image.is_zero():
                continue
            before = SuperElement(n, {idx[:k]: poly_ring(n).one})
            after = SuperElement(n, {idx[k + 1 :]: poly_ring(n).one})
            sign = parity_sign(D.degree * k)
            result = result + (body * before * image * after).scale(sign)
    return result


def gder_bracket(D1: GradedDerivation, D2: GradedDerivation) -> GradedDerivation:
    _check_same(D1.n, D2.n)
    n = D1.n
    sign = parity_sign(D1.degree * D2.degree)

    def image(g: SuperElement) -> SuperElement:
        return gder_apply(D1, gder_apply(D2, g)) - gder_apply(D2, gder_apply(D1, g)).scale(sign)

    xs = tuple(image(SuperElement.even(poly_ring(n).gens[i])) for i in range(n))
    ts = tuple(image(SuperElement.odd(n, i)) for i in range(1, n + 1))
    return GradedDerivation(n, D1.degree + D2.degree, xs, ts)


def de_rham_derivation(n: int) -> GradedDerivation:
    xs = tuple(SuperElement.odd(n, i) for i in range(1, n + 1))
    ts = tuple(SuperElement.zero(n) for _ in range(n))
    return GradedDerivation(n, 1, xs, ts)


def de_rham(a: SuperElement) -> SuperElement:
    return gder_apply(de_rham_derivation(a.n), a)


def interior(xi: VectorField) -> GradedDerivation:
    xs = tuple(SuperElement.zero(xi.n) for _ in range(xi.n))
    ts = tuple(SuperElement.even(c) for c in xi.components)
    return GradedDerivation(xi.n, -1, xs, ts)


def lie(xi: VectorField) -> GradedDerivation:
    xs = tuple(SuperElement.even(c) for c in xi.components)
    ts = tuple(de_rham(SuperElement.even(c)) for c in xi.components)
    return GradedDerivation(xi.n, 0, xs, ts)


# --------------------------------------------------
# The cone of vector fields and its action
# --------------------------------------------------

IOTA = -1
LIE = 0


@dataclass(frozen=True)
class TildeField:
    n: int
    level: int
    field: VectorField

    def __post_init__(self) -> None:
        if self.level not in (IOTA, LIE):
            raise ValueError(f"cone level must be -1 or 0, got {self.level}")
        _check_same(self.n, self.field.n)

    @property
    def degree(self) -> int:
        return self.level

    def render(self) -> str:
        symbol = "i" if self.level == IOTA else "L"
        return f"{symbol}[{self.field.render()}]"


def tau(t: TildeField) -> GradedDerivation:
    return interior(t.field) if t.level == IOTA else lie(t.field)


def cone_differential(t: TildeField) -> TildeField | None:
    if t.level == IOTA:
        return TildeField(t.n, LIE, t.field)
    return None


def tilde_field_bracket(t1: TildeField, t2: TildeField) -> TildeField | None:
    _check_same(t1.n, t2.n)
    if t1.level == IOTA and t2.level == IOTA:
        return None
    level = IOTA if IOTA in (t1.level, t2.level) else LIE
    bracket = field_bracket(t1.field, t2.field)
    if bracket.is_zero():
        return None
    return TildeField(t1.n, level, bracket)


# --------------------------------------------------
# Kähler 1-forms
# --------------------------------------------------


@dataclass(frozen=True)
class KahlerOneForm:
    """Sum of c_i*Dx_i + e_i*Dt_i with coefficients written on the left; Dx_i is even and Dt_i odd."""

    n: int
    even: tuple[SuperElement, ...]
    odd: tuple[SuperElement, ...]

    def __post_init__(self) -> None:
        if len(self.even) != self.n or len(self.odd) != self.n:
            raise ValueError(f"a Kahler form needs {self.n} coefficients per generator family")
        for c in self.even + self.odd:
            _check_same(c.n, self.n)

    @classmethod
    def zero(cls, n: int) -> "KahlerOneForm":
        z = tuple(SuperElement.zero(n) for _ in range(n))
        return cls(n, z, z)

    @classmethod
    def generator(cls, n: int, kind: str, i: int, coeff: SuperElement | None = None) -> "KahlerOneForm":
        _check_index(n, i)
        value = SuperElement.one(n) if coeff is None else coeff
        column = tuple(value if k == i else SuperElement.zero(n) for k in range(1, n + 1))
        zeros = tuple(SuperElement.zero(n) for _ in range(n))
        if kind == "x":
            return cls(n, column, zeros)
        if kind == "t":
            return cls(n, zeros, column)
        raise ValueError(f"unknown Kahler generator kind '{kind}'")

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.even + self.odd)

    def __add__(self, other: "KahlerOneForm") -> "KahlerOneForm":
        _check_same(self.n, other.n)
        return KahlerOneForm(
            self.n,
            tuple(a + b for a, b in zip(self.even, other.even, strict=True)),
            tuple(a + b for a, b in zip(self.odd, other.odd, strict=True)),
        )

    def __neg__(self) -> "KahlerOneForm":
        return KahlerOneForm(self.n, tuple(-a for a in self.even), tuple(-a for a in self.odd))

    def __sub__(self, other: "KahlerOneForm") -> "KahlerOneForm":
        return self + (-other)

    def scale(self, f) -> "KahlerOneForm":
        return KahlerOneForm(self.n, tuple(c.scale(f) for c in self.even), tuple(c.scale(f) for c in self.odd))

    def left_mul(self, a: SuperElement) -> "KahlerOneForm":
        return KahlerOneForm(self.n, tuple(a * c for c in self.even), tuple(a * c for c in self.odd))

    def right_mul(self, a: SuperElement) -> "KahlerOneForm":
        """omega*a, moving a to the left of each generator with its Koszul sign."""
        total = KahlerOneForm.zero(self.n)
        for deg, piece in a.pieces().items():
            odd_sign = (-1) ** deg
            total = total + KahlerOneForm(self.n, tuple(c * piece for c in self.even), tuple((c * piece).scale(odd_sign) for c in self.odd))
        return total

    def pieces(self) -> dict[int, "KahlerOneForm"]:
        """Homogeneous components keyed by total degree (Dt_i counts one)."""
        out: dict[int, KahlerOneForm] = {}
        zero = KahlerOneForm.zero(self.n)
        for i, c in enumerate(self.even, start=1):
            for deg, piece in c.pieces().items():
                out[deg] = out.get(deg, zero) + KahlerOneForm.generator(self.n, "x", i, piece)
        for i, c in enumerate(self.odd, start=1):
            for deg, piece in c.pieces().items():
                out[deg + 1] = out.get(deg + 1, zero) + KahlerOneForm.generator(self.n, "t", i, piece)
        return out

    def render(self) -> str:
        texts = []
        for kind, coeffs in (("Dx", self.even), ("Dt", self.odd)):
            texts += [render_super_coefficient(c, f"{kind}{i}") for i, c in enumerate(coeffs, start=1) if not c.is_zero()]
        return _join_terms(texts)


def kahler_d(a: SuperElement) -> KahlerOneForm:
    n = a.n
    one = poly_ring(n).one
    total = KahlerOneForm.zero(n)
    for idx, f in a.terms.items():
        theta = SuperElement(n, {idx: one})
        for j in range(1, n + 1):
            df = partial(f, j)
            if df:
                total = total + KahlerOneForm.generator(n, "x", j, SuperElement.even(df) * theta)
        p = len(idx)
        for k, i in enumerate(idx):
            rest = SuperElement(n, {idx[:k] + idx[k + 1 :]: f})
            total = total + KahlerOneForm.generator(n, "t", i, rest.scale((-1) ** (p - 1 - k)))
    return total


def kahler_lie(D: GradedDerivation, omega: KahlerOneForm) -> KahlerOneForm:
    """Action of a graded derivation on Kahler forms, commuting with Kahler d up to sign."""
    _check_same(D.n, omega.n)
    n = D.n
    total = KahlerOneForm.zero(n)
    generators = [(SuperElement.even(poly_ring(n).gens[i - 1]), c, "x", i) for i, c in enumerate(omega.even, start=1)]
    generators += [(SuperElement.odd(n, i), c, "t", i) for i, c in enumerate(omega.odd, start=1)]
    for y, c, kind, i in generators:
        if c.is_zero():
            continue
        total = total + KahlerOneForm.generator(n, kind, i, gder_apply(D, c))
        image = kahler_d(gder_apply(D, y))
        for deg, piece in c.pieces().items():
            total = total + image.left_mul(piece.scale(parity_sign(D.degree * deg)))
    return total


def kahler_contract(D: GradedDerivation, omega: KahlerOneForm) -> SuperElement:
    """Evaluate omega on D: (c*Dy)(D) = (-1)^(|D||c|) c*D(y)."""
    _check_same(D.n, omega.n)
    n = D.n
    total = SuperElement.zero(n)
    for i, c in enumerate(omega.even, start=1):
        for deg, piece in c.pieces().items():
            total = total + (piece * D.x_images[i - 1]).scale(parity_sign(D.degree * deg))
    for i, c in enumerate(omega.odd, start=1):
        for deg, piece in c.pieces().items():
            total = total + (piece * D.t_images[i - 1]).scale(parity_sign(D.degree * deg))
    return total
