"""
Exact exterior calculus on affine n-space.

Polynomials are sympy ``PolyElement`` values of a ``QQ`` ring in the
variables x1..xn with graded-lexicographic order, so canonical form,
arithmetic and formal differentiation come from sympy. Differential forms
and vector fields are thin immutable containers of such polynomials.

Index conventions:
    - variables and frame fields are numbered 1..n
    - a p-form is a map from strictly increasing index tuples of size p
      to nonzero polynomial coefficients
"""

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from functools import cache

from sympy.polys.domains import QQ
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, PolyRing, ring

Polynomial = PolyElement
Rational = type(QQ.one)
Indices = tuple[int, ...]


@cache
def poly_ring(n: int) -> PolyRing:
    if n < 1:
        raise ValueError(f"variable count must be positive, got {n}")
    names = ",".join(f"x{i}" for i in range(1, n + 1))
    return ring(names, QQ, grlex)[0]


def nvars(f: Polynomial) -> int:
    return f.ring.ngens


def rational(numerator: int, denominator: int = 1) -> Rational:
    return QQ(numerator, denominator)


def const(n: int, value) -> Polynomial:
    return poly_ring(n).ground_new(QQ.convert(value))


def var(n: int, i: int) -> Polynomial:
    _check_index(n, i)
    return poly_ring(n).gens[i - 1]


def monomial(n: int, exponents: Iterable[int], coeff=1) -> Polynomial:
    R = poly_ring(n)
    exps = tuple(exponents)
    if len(exps) != n:
        raise ValueError(f"exponent sequence {exps} has length {len(exps)}, expected {n}")
    return R.from_dict({exps: QQ.convert(coeff)}) if coeff else R.zero


def _check_index(n: int, i: int) -> None:
    if not 1 <= i <= n:
        raise ValueError(f"index {i} out of range 1..{n}")


def _check_same(a: int, b: int) -> None:
    if a != b:
        raise ValueError(f"mismatched variable count: {a} != {b}")


def poly_arith(a: Polynomial, b: Polynomial, op: str) -> Polynomial:
    _check_same(nvars(a), nvars(b))
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown polynomial operation '{op}'")


def partial(f: Polynomial, i: int) -> Polynomial:
    n = nvars(f)
    _check_index(n, i)
    return f.diff(f.ring.gens[i - 1])


def constant_term(f: Polynomial) -> Rational:
    return f.get(f.ring.zero_monom, QQ.zero)


def parity_sign(k: int) -> int:
    """(-1)**k as an int, also for negative k."""
    return -1 if k % 2 else 1


def total_degree(exponents: Indices) -> int:
    return sum(exponents)


def euler_rescale(f: Polynomial, shift: int) -> Polynomial:
    """Divide each monomial of total degree e by (e + shift)."""
    R = f.ring
    return R.from_dict({m: c / QQ(sum(m) + shift) for m, c in f.items()})


def insert_index(indices: Indices, j: int) -> tuple[int, Indices] | None:
    """Wedge dx_j in front of dx_indices; returns (sign, sorted indices) or None when it vanishes."""
    if j in indices:
        return None
    position = sum(1 for i in indices if i < j)
    merged = indices[:position] + (j,) + indices[position:]
    return (-1) ** position, merged


def merge_indices(left: Indices, right: Indices) -> tuple[int, Indices] | None:
    if set(left) & set(right):
        return None
    inversions = sum(1 for a in left for b in right if a > b)
    return (-1) ** inversions, tuple(sorted(left + right))


# --------------------------------------------------
# Rendering
# --------------------------------------------------


def render_rational(c: Rational) -> str:
    num, den = QQ.numer(c), QQ.denom(c)
    return f"{num}" if den == 1 else f"{num}/{den}"


def render_poly(f: Polynomial) -> str:
    if not f:
        return "0"
    n = nvars(f)
    parts: list[str] = []
    for exps, coeff in f.terms():
        factors = [f"x{i + 1}" for i in range(n) for _ in range(exps[i])]
        magnitude = abs(coeff)
        if not factors:
            body = render_rational(magnitude)
        elif magnitude == 1:
            body = "*".join(factors)
        else:
            body = "*".join([render_rational(magnitude), *factors])
        parts.append(("-" if coeff < 0 else "+") + body)
    return _join_signed(parts)


def _join_signed(parts: list[str]) -> str:
    text = parts[0][1:] if parts[0][0] == "+" else "-" + parts[0][1:]
    for part in parts[1:]:
        text += f" {part[0]} {part[1:]}"
    return text


def render_coefficient(f: Polynomial, symbol: str) -> str:
    """Render f*symbol with the sign pulled out for single-term coefficients."""
    if f == 1:
        return symbol
    if f == -1:
        return "-" + symbol
    text = render_poly(f)
    if len(f) > 1:
        return f"({text})*{symbol}"
    return f"{text}*{symbol}"


def _join_terms(texts: list[str]) -> str:
    if not texts:
        return "0"
    signed = [t if t.startswith("-") else "+" + t for t in texts]
    return _join_signed(signed)


# --------------------------------------------------
# Vector fields
# --------------------------------------------------


@dataclass(frozen=True)
class VectorField:
    n: int
    components: tuple[Polynomial, ...]

    def __post_init__(self) -> None:
        if len(self.components) != self.n:
            raise ValueError(f"vector field needs {self.n} components, got {len(self.components)}")
        for c in self.components:
            _check_same(nvars(c), self.n)

    @classmethod
    def zero(cls, n: int) -> "VectorField":
        R = poly_ring(n)
        return cls(n, tuple(R.zero for _ in range(n)))

    @classmethod
    def frame(cls, n: int, i: int, coeff: Polynomial | None = None) -> "VectorField":
        _check_index(n, i)
        R = poly_ring(n)
        value = R.one if coeff is None else coeff
        return cls(n, tuple(value if k == i else R.zero for k in range(1, n + 1)))

    def apply(self, f: Polynomial) -> Polynomial:
        _check_same(self.n, nvars(f))
        result = f.ring.zero
        for i, c in enumerate(self.components, start=1):
            if c:
                result += c * partial(f, i)
        return result

    def __add__(self, other: "VectorField") -> "VectorField":
        _check_same(self.n, other.n)
        return VectorField(self.n, tuple(a + b for a, b in zip(self.components, other.components, strict=True)))

    def __sub__(self, other: "VectorField") -> "VectorField":
        _check_same(self.n, other.n)
        return VectorField(self.n, tuple(a - b for a, b in zip(self.components, other.components, strict=True)))

    def __neg__(self) -> "VectorField":
        return VectorField(self.n, tuple(-a for a in self.components))

    def scale(self, f) -> "VectorField":
        return VectorField(self.n, tuple(f * a for a in self.components))

    def is_zero(self) -> bool:
        return not any(self.components)

    def render(self) -> str:
        return _join_terms([render_coefficient(c, f"e{i}") for i, c in enumerate(self.components, start=1) if c])


def field_bracket(xi: VectorField, eta: VectorField) -> VectorField:
    _check_same(xi.n, eta.n)
    return VectorField(xi.n, tuple(xi.apply(b) - eta.apply(a) for a, b in zip(xi.components, eta.components, strict=True)))


# --------------------------------------------------
# Differential forms
# --------------------------------------------------


@dataclass(frozen=True)
class Form:
    n: int
    p: int
    terms: Mapping[Indices, Polynomial] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.p < -1:
            raise ValueError(f"form degree must be at least -1, got {self.p}")
        clean: dict[Indices, Polynomial] = {}
        for idx, coeff in self.terms.items():
            idx = tuple(idx)
            if len(idx) != self.p or any(b <= a for a, b in zip(idx, idx[1:], strict=False)):
                raise ValueError(f"form index {idx} is not a strictly increasing {self.p}-subset")
            for i in idx:
                _check_index(self.n, i)
            _check_same(nvars(coeff), self.n)
            if coeff:
                clean[idx] = coeff
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    @classmethod
    def zero(cls, n: int, p: int) -> "Form":
        return cls(n, p, {})

    @classmethod
    def function(cls, f: Polynomial) -> "Form":
        return cls(nvars(f), 0, {(): f})

    @classmethod
    def basis(cls, n: int, indices: Indices, coeff: Polynomial | None = None) -> "Form":
        value = poly_ring(n).one if coeff is None else coeff
        ordered = tuple(sorted(indices))
        if len(set(ordered)) != len(ordered):
            return cls.zero(n, len(indices))
        sign = 1
        for k, i in enumerate(indices):
            sign *= (-1) ** sum(1 for j in indices[k + 1 :] if j < i)
        return cls(n, len(indices), {ordered: value * sign})

    def coefficient(self, indices: Indices) -> Polynomial:
        return self.terms.get(tuple(indices), poly_ring(self.n).zero)

    def as_function(self) -> Polynomial:
        if self.p != 0:
            raise ValueError(f"a {self.p}-form is not a function")
        return self.coefficient(())

    def is_zero(self) -> bool:
        return not self.terms

    def _combine(self, other: "Form", sign: int) -> "Form":
        _check_same(self.n, other.n)
        if self.p != other.p:
            raise ValueError(f"cannot add a {self.p}-form and a {other.p}-form")
        terms = dict(self.terms)
        for idx, coeff in other.terms.items():
            terms[idx] = terms.get(idx, poly_ring(self.n).zero) + sign * coeff
        return Form(self.n, self.p, terms)

    def __add__(self, other: "Form") -> "Form":
        return self._combine(other, 1)

    def __sub__(self, other: "Form") -> "Form":
        return self._combine(other, -1)

    def __neg__(self) -> "Form":
        return Form(self.n, self.p, {idx: -c for idx, c in self.terms.items()})

    def scale(self, f) -> "Form":
        return Form(self.n, self.p, {idx: f * c for idx, c in self.terms.items()})

    def render(self) -> str:
        if self.p == 0:
            return render_poly(self.as_function())
        texts = [render_coefficient(c, "^".join(f"dx{i}" for i in idx)) for idx, c in self.terms.items()]
        return _join_terms(texts)


def exterior_d(omega: Form) -> Form:
    terms: dict[Indices, Polynomial] = {}
    R = poly_ring(omega.n)
    for idx, coeff in omega.terms.items():
        for j in range(1, omega.n + 1):
            dc = partial(coeff, j)
            placed = insert_index(idx, j) if dc else None
            if placed is None:
                continue
            sign, merged = placed
            terms[merged] = terms.get(merged, R.zero) + sign * dc
    return Form(omega.n, omega.p + 1, terms)


def wedge(alpha: Form, beta: Form) -> Form:
    _check_same(alpha.n, beta.n)
    terms: dict[Indices, Polynomial] = {}
    R = poly_ring(alpha.n)
    for i1, c1 in alpha.terms.items():
        for i2, c2 in beta.terms.items():
            merged = merge_indices(i1, i2)
            if merged is None:
                continue
            sign, idx = merged
            terms[idx] = terms.get(idx, R.zero) + sign * c1 * c2
    return Form(alpha.n, alpha.p + beta.p, terms)


def contract(xi: VectorField, omega: Form) -> Form:
    _check_same(xi.n, omega.n)
    if omega.p <= 0:
        return Form.zero(omega.n, max(omega.p - 1, -1))
    terms: dict[Indices, Polynomial] = {}
    R = poly_ring(omega.n)
    for idx, coeff in omega.terms.items():
        for k, i in enumerate(idx):
            component = xi.components[i - 1]
            if not component:
                continue
            rest = idx[:k] + idx[k + 1 :]
            terms[rest] = terms.get(rest, R.zero) + (-1) ** k * component * coeff
    return Form(omega.n, omega.p - 1, terms)


def lie_derivative(xi: VectorField, omega: Form) -> Form:
    if omega.p == 0:
        return Form.function(xi.apply(omega.as_function()))
    return contract(xi, exterior_d(omega)) + exterior_d(contract(xi, omega))


def poincare_homotopy(omega: Form) -> Form:
    """
    Radial homotopy operator kappa with d(kappa w) + kappa(d w) = w.

    kappa(f dx_I) = sum_k (-1)^k x_{i_k} m(f) dx_{I - i_k}, where m divides a
    monomial of total degree e by (e + p). On functions it is zero and only
    defined when the constant term vanishes.
    """
    if omega.p == 0:
        if constant_term(omega.as_function()):
            raise ValueError("the homotopy is only defined on functions with zero constant term")
        return Form.zero(omega.n, -1)
    if omega.p < 0:
        return Form.zero(omega.n, -1)
    R = poly_ring(omega.n)
    terms: dict[Indices, Polynomial] = {}
    for idx, coeff in omega.terms.items():
        scaled = euler_rescale(coeff, omega.p)
        for k, i in enumerate(idx):
            rest = idx[:k] + idx[k + 1 :]
            terms[rest] = terms.get(rest, R.zero) + (-1) ** k * R.gens[i - 1] * scaled
    return Form(omega.n, omega.p - 1, terms)


def euler_field(n: int) -> VectorField:
    R = poly_ring(n)
    return VectorField(n, tuple(R.gens))
