"""
Finite windows of U~ and the quotient by the linearity ideal.

x_i, t_i, Dx_i and Dt_i have weight one and i[x^a*e_i], L[x^a*e_i] have
weight |a|-1, so every (weight, degree) block of U~ is finite. A truncation
keeps the blocks of weight at most D. Inside each block the ideal generated
by K and dK is row reduced once over QQ; membership and normal forms are
read off the reduced rows.
"""

import random
from collections.abc import Iterator
from dataclasses import dataclass, field
from functools import cache
from itertools import combinations, combinations_with_replacement
from logging import INFO
from typing import Any

from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from constant.defaults import DEFAULT_SEED, DEFAULT_TRIALS
from lib.chiral import (
    TildeUSection,
    key_field,
    tilde_u_bracket,
    tilde_u_differential,
    tilde_u_pairing,
    tilde_u_star,
)
from lib.report import Report, WindowOverflowError, run_cases, run_check
from lib.supercalc import (
    IOTA,
    LIE,
    GradedDerivation,
    KahlerOneForm,
    SuperElement,
    TildeField,
    de_rham,
    kahler_d,
    tau,
)
from lib.symcalc import Indices, VectorField, monomial, partial
from utils.logger import get_logger
from utils.sampling import random_coefficient

SuperMonomial = tuple[Indices, Indices]
Column = tuple


@dataclass(frozen=True)
class Truncation:
    n: int
    D: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"variable count must be positive, got {self.n}")
        if self.D < 1:
            raise ValueError(f"window bound must be at least 1, got {self.D}")

    @property
    def weights(self) -> range:
        return range(-1, self.D + 1)

    @property
    def degrees(self) -> range:
        return range(-1, self.n + 2)


# --------------------------------------------------
# Monomial bases
# --------------------------------------------------


@cache
def exponent_vectors(n: int, total: int) -> tuple[Indices, ...]:
    if total < 0:
        return ()
    vectors = []
    for combo in combinations_with_replacement(range(n), total):
        exps = [0] * n
        for k in combo:
            exps[k] += 1
        vectors.append(tuple(exps))
    return tuple(sorted(vectors))


@cache
def super_monomials(n: int, weight: int, degree: int) -> tuple[SuperMonomial, ...]:
    """Monomials x^m*t_J of the given weight |m|+|J| and degree |J|."""
    if degree < 0 or degree > n or weight < degree:
        return ()
    return tuple((exps, odd) for odd in combinations(range(1, n + 1), degree) for exps in exponent_vectors(n, weight - degree))


def monomial_element(n: int, m: SuperMonomial, coeff=1) -> SuperElement:
    exps, odd = m
    return SuperElement(n, {odd: monomial(n, exps, coeff)})


@cache
def block_columns(n: int, weight: int, degree: int) -> tuple[Column, ...]:
    """Basis of the (weight, degree) block: tensor columns first, Kahler columns last."""
    columns: list[Column] = []
    for level in (IOTA, LIE):
        for size in range(weight + 2):
            for exps in exponent_vectors(n, size):
                for i in range(1, n + 1):
                    for m in super_monomials(n, weight + 1 - size, degree - level):
                        columns.append(("tensor", (exps, i, level), m))
    for kind, shift in (("x", 0), ("t", 1)):
        for i in range(1, n + 1):
            for m in super_monomials(n, weight - 1, degree - shift):
                columns.append(("kform", kind, i, m))
    return tuple(columns)


def section_coordinates(u: TildeUSection) -> dict[tuple[int, int], dict[Column, Any]]:
    """Coordinates of u on the monomial basis, grouped by (weight, degree) block."""
    out: dict[tuple[int, int], dict[Column, Any]] = {}

    def put(weight: int, degree: int, column: Column, value) -> None:
        block = out.setdefault((weight, degree), {})
        block[column] = block.get(column, QQ.zero) + value

    for key, c in u.tensor.items():
        exps_a, _, level = key
        for odd, poly in c.terms.items():
            for exps, value in poly.items():
                put(sum(exps) + len(odd) + sum(exps_a) - 1, len(odd) + level, ("tensor", key, (tuple(exps), odd)), value)
    for kind, shift, coeffs in (("x", 0, u.kform.even), ("t", 1, u.kform.odd)):
        for i, c in enumerate(coeffs, start=1):
            for odd, poly in c.terms.items():
                for exps, value in poly.items():
                    put(sum(exps) + len(odd) + 1, len(odd) + shift, ("kform", kind, i, (tuple(exps), odd)), value)
    return {block: {col: v for col, v in coords.items() if v} for block, coords in out.items()}


def section_from_coordinates(n: int, coords: dict[Column, Any]) -> TildeUSection:
    result = TildeUSection.zero(n)
    for column, value in coords.items():
        if column[0] == "tensor":
            _, key, m = column
            result = result + TildeUSection(n, KahlerOneForm.zero(n), {key: monomial_element(n, m, value)})
        else:
            _, kind, i, m = column
            result = result + TildeUSection.from_kform(KahlerOneForm.generator(n, kind, i, monomial_element(n, m, value)))
    return result


def section_weights(u: TildeUSection) -> set[int]:
    return {weight for weight, _ in section_coordinates(u)}


# --------------------------------------------------
# The linearity ideal
# --------------------------------------------------


def k_generator(n: int, a: Indices, b: Indices, i: int) -> TildeUSection:
    """x^a (x) i[x^b*e_i] - x^(a+b) (x) i[e_i]."""
    if not any(b):
        raise ValueError("the field exponent of a K generator must be nonzero")
    zero = tuple(0 for _ in range(n))
    ab = tuple(p + q for p, q in zip(a, b, strict=True))
    return TildeUSection(
        n,
        KahlerOneForm.zero(n),
        {(tuple(b), i, IOTA): monomial_element(n, (tuple(a), ())), (zero, i, IOTA): monomial_element(n, (ab, ()), -1)},
    )


@cache
def k_generators(n: int, max_weight: int) -> tuple[tuple[int, TildeUSection, TildeUSection], ...]:
    """Pairs (k, dk) with their weight |a|+|b|-1, up to ``max_weight``."""
    out = []
    for total in range(1, max_weight + 2):
        for size_b in range(1, total + 1):
            for b in exponent_vectors(n, size_b):
                for a in exponent_vectors(n, total - size_b):
                    for i in range(1, n + 1):
                        k = k_generator(n, a, b, i)
                        out.append((total - 1, k, tilde_u_differential(k)))
    return tuple(out)


def block_generators(n: int, weight: int, degree: int) -> Iterator[TildeUSection]:
    """alpha*k and alpha*dk spanning the ideal inside one block."""
    for wk, k, dk in k_generators(n, weight):
        for m in super_monomials(n, weight - wk, degree + 1):
            yield tilde_u_star(monomial_element(n, m), k)
        for m in super_monomials(n, weight - wk, degree):
            yield tilde_u_star(monomial_element(n, m), dk)


@dataclass(frozen=True)
class WindowBlock:
    weight: int
    degree: int
    columns: tuple[Column, ...]
    rows: tuple[dict[int, Any], ...]
    pivots: tuple[int, ...]
    index: dict[Column, int] = field(compare=False, repr=False, default_factory=dict)

    @property
    def dimension(self) -> int:
        return len(self.columns)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, coords: dict[Column, Any]) -> dict[Column, Any]:
        vector = {self.index[col]: v for col, v in coords.items() if v}
        for pivot, row in zip(self.pivots, self.rows, strict=True):
            c = vector.get(pivot)
            if not c:
                continue
            for j, v in row.items():
                vector[j] = vector.get(j, QQ.zero) - c * v
        return {self.columns[j]: v for j, v in sorted(vector.items()) if v}


def _row_reduce(rows: list[dict[int, Any]], width: int) -> tuple[tuple[dict[int, Any], ...], tuple[int, ...]]:
    rows = [row for row in rows if row]
    if not rows:
        return (), ()
    matrix = DomainMatrix(dict(enumerate(rows)), (len(rows), width), QQ)
    reduced, pivots = matrix.rref()
    dod = reduced.to_dod()
    return tuple(dict(dod[k]) for k in range(len(pivots))), tuple(pivots)


def _build_block(n: int, weight: int, degree: int) -> WindowBlock:
    columns = block_columns(n, weight, degree)
    index = {col: j for j, col in enumerate(columns)}
    rows = []
    for generator in block_generators(n, weight, degree):
        coords = section_coordinates(generator).get((weight, degree), {})
        rows.append({index[col]: v for col, v in coords.items()})
    reduced, pivots = _row_reduce(rows, len(columns))
    return WindowBlock(weight, degree, columns, reduced, pivots, index)


@dataclass(frozen=True)
class IdealBasis:
    truncation: Truncation
    blocks: dict[tuple[int, int], WindowBlock]

    def block(self, weight: int, degree: int) -> WindowBlock:
        return self.blocks[(weight, degree)]


@cache
def ideal_basis(truncation: Truncation) -> IdealBasis:
    logger = get_logger("Chiral.Window")
    n = truncation.n
    blocks = {}
    for weight in truncation.weights:
        for degree in truncation.degrees:
            if block_columns(n, weight, degree):
                blocks[(weight, degree)] = _build_block(n, weight, degree)
    logger.info("Built window n=%s D=%s: %s blocks", n, truncation.D, len(blocks))
    return IdealBasis(truncation, blocks)


def _window_blocks(u: TildeUSection, truncation: Truncation) -> dict[tuple[int, int], dict[Column, Any]]:
    if u.n != truncation.n:
        raise ValueError(f"section has n={u.n}, window has n={truncation.n}")
    coords = section_coordinates(u)
    over = sorted(w for w, _ in coords if w > truncation.D)
    if over:
        raise WindowOverflowError(f"{u.render()} has weight {over[-1]} beyond the window bound {truncation.D}")
    return coords


def ideal_membership(u: TildeUSection, truncation: Truncation) -> bool:
    basis = ideal_basis(truncation)
    return all(not basis.block(*block).reduce(coords) for block, coords in _window_blocks(u, truncation).items())


def u_normal_form(u: TildeUSection, truncation: Truncation) -> TildeUSection:
    basis = ideal_basis(truncation)
    result = TildeUSection.zero(u.n)
    for block, coords in _window_blocks(u, truncation).items():
        result = result + section_from_coordinates(u.n, basis.block(*block).reduce(coords))
    return result


# --------------------------------------------------
# Random window elements
# --------------------------------------------------


def random_window_function(rng: random.Random, n: int, weight: int) -> SuperElement:
    choices = [m for degree in range(n + 1) for m in super_monomials(n, weight, degree)]
    total = SuperElement.zero(n)
    for _ in range(rng.randint(1, 2)):
        total = total + monomial_element(n, rng.choice(choices), random_coefficient(rng))
    return total


def random_window_section(rng: random.Random, n: int, weight: int) -> TildeUSection:
    choices = [col for degree in range(-1, n + 2) for col in block_columns(n, weight, degree)]
    coords: dict[Column, Any] = {}
    for _ in range(rng.randint(1, 3)):
        col = rng.choice(choices)
        coords[col] = coords.get(col, QQ.zero) + QQ(random_coefficient(rng))
    return section_from_coordinates(n, {col: v for col, v in coords.items() if v})


def random_ideal_element(rng: random.Random, n: int, weight: int) -> TildeUSection:
    generators = list(k_generators(n, weight))
    total = TildeUSection.zero(n)
    for _ in range(rng.randint(1, 2)):
        wk, k, dk = rng.choice(generators)
        alpha = random_window_function(rng, n, weight - wk)
        total = total + tilde_u_star(alpha, rng.choice((k, dk)))
    return total


def check_ideal_invariance(
    truncation: Truncation,
    seed: int = DEFAULT_SEED,
    trials: int = DEFAULT_TRIALS,
    log_level: int = INFO,
    progress: bool = False,
) -> Report:
    """Closure of the linearity ideal under products, brackets and d, and its isotropy, inside the window."""
    logger = get_logger("Chiral.Ideal", level=log_level)
    if trials < 1:
        logger.error("Invalid trial count: %s", trials)
        raise ValueError(f"trials must be at least 1, got {trials}")
    n, D = truncation.n, truncation.D
    logger.info("Checking ideal invariance in the window n=%s D=%s (%s trials)", n, D, trials)

    def sample(rng: random.Random) -> dict:
        w_i = rng.randint(0, D)
        return {
            "a": random_window_function(rng, n, rng.randint(0, D - w_i)),
            "u": random_window_section(rng, n, rng.randint(-1, D - w_i)),
            "i": random_ideal_element(rng, n, w_i),
        }

    def member(u: TildeUSection) -> bool:
        return ideal_membership(u, truncation)

    identities = {
        "star-closure": lambda v: (True, member(tilde_u_star(v["a"], v["i"]))),
        "bracket-closure": lambda v: (True, member(tilde_u_bracket(v["u"], v["i"]))),
        "bracket-closure-right": lambda v: (True, member(tilde_u_bracket(v["i"], v["u"]))),
        "pairing-vanishes": lambda v: (SuperElement.zero(n), tilde_u_pairing(v["u"], v["i"])),
        "differential-closure": lambda v: (True, member(tilde_u_differential(v["i"]))),
    }
    checks = [run_check(name, sample, identity, trials, seed, logger=logger, progress=progress) for name, identity in identities.items()]
    report = Report("ideal-invariance", checks, seed, {"n": n, "truncate": D, "trials": trials})
    logger.info("Ideal invariance: %s of %s checks passed", len(checks) - len(report.failures), len(checks))
    return report


# --------------------------------------------------
# Exactness of the quotient
# --------------------------------------------------


def kahler_dimension(n: int, weight: int, degree: int) -> int:
    return n * (len(super_monomials(n, weight - 1, degree)) + len(super_monomials(n, weight - 1, degree - 1)))


def tangent_dimension(n: int, weight: int, degree: int) -> int:
    return n * (len(super_monomials(n, weight + 1, degree)) + len(super_monomials(n, weight + 1, degree + 1)))


def derivation_row(D: GradedDerivation) -> dict[tuple, Any]:
    """Coordinates of D in the monomial basis of its generator images."""
    row: dict[tuple, Any] = {}
    for kind, images in (("x", D.x_images), ("t", D.t_images)):
        for i, image in enumerate(images, start=1):
            for odd, poly in image.terms.items():
                for exps, value in poly.items():
                    row[(kind, i, tuple(exps), odd)] = value
    return row


def _anchor_row(n: int, column: Column) -> dict[tuple, Any]:
    if column[0] != "tensor":
        return {}
    _, key, m = column
    return derivation_row(tau(key_field(n, key)).scale(monomial_element(n, m)))


def _rank(rows: list[dict[Any, Any]]) -> int:
    labels = sorted({label for row in rows for label in row})
    position = {label: j for j, label in enumerate(labels)}
    indexed = [{position[label]: v for label, v in row.items() if v} for row in rows]
    return len(_row_reduce(indexed, max(len(labels), 1))[1])


def _block_dimensions(n: int, block: WindowBlock) -> dict[str, Any]:
    anchor_rows = [_anchor_row(n, col) for col in block.columns]
    ideal_anchor = []
    for row in block.rows:
        image: dict[tuple, Any] = {}
        for j, v in row.items():
            for label, w in anchor_rows[j].items():
                image[label] = image.get(label, QQ.zero) + v * w
        ideal_anchor.append({label: w for label, w in image.items() if w})
    return {
        "weight": block.weight,
        "degree": block.degree,
        "tilde": block.dimension,
        "ideal": block.rank,
        "quotient": block.dimension - block.rank,
        "kahler": kahler_dimension(n, block.weight, block.degree),
        "tangent": tangent_dimension(n, block.weight, block.degree),
        "anchor-rank": _rank(anchor_rows),
        "ideal-anchor-zero": not any(ideal_anchor),
        "kahler-pivots": sum(1 for p in block.pivots if block.columns[p][0] == "kform"),
    }


def u_exactness_check(truncation: Truncation, log_level: int = INFO) -> Report:
    """Block by block: U = U~/I sits in 0 -> Kahler forms -> U -> derivations -> 0."""
    logger = get_logger("Chiral.Exactness", level=log_level)
    n = truncation.n
    basis = ideal_basis(truncation)
    table = [_block_dimensions(n, block) for block in basis.blocks.values()]

    def cases(test) -> Iterator[tuple[dict, Any, Any]]:
        for row in table:
            yield {"weight": row["weight"], "degree": row["degree"]}, *test(row)

    checks = [
        run_cases("quotient-dimension", cases(lambda r: (r["kahler"] + r["tangent"], r["quotient"])), logger),
        run_cases("anchor-surjective", cases(lambda r: (r["tangent"], r["anchor-rank"])), logger),
        run_cases("anchor-kills-ideal", cases(lambda r: (True, r["ideal-anchor-zero"])), logger),
        run_cases("kahler-injective", cases(lambda r: (0, r["kahler-pivots"])), logger),
        run_cases("interior-linearity", _interior_linearity_cases(truncation), logger),
        run_cases("lie-linearity", _lie_linearity_cases(truncation), logger),
    ]
    report = Report("chiral-exactness", checks, None, {"n": n, "truncate": truncation.D}, {"dimensions": table})
    logger.info("Exactness: %s of %s checks passed over %s blocks", len(checks) - len(report.failures), len(checks), len(table))
    return report


def _linearity_inputs(truncation: Truncation) -> Iterator[tuple[Indices, Indices, int]]:
    n = truncation.n
    for size_b in range(1, truncation.D + 1):
        for size_a in range(truncation.D - size_b + 2):
            for a in exponent_vectors(n, size_a):
                for b in exponent_vectors(n, size_b):
                    for i in range(1, n + 1):
                        yield a, b, i


def _interior_linearity_cases(truncation: Truncation) -> Iterator[tuple[dict, Any, Any]]:
    """f (x) i[g*e_i] and f*g (x) i[e_i] agree in the quotient."""
    n = truncation.n
    for a, b, i in _linearity_inputs(truncation):
        f, g = monomial(n, a), monomial(n, b)
        left = TildeUSection.tensor_term(SuperElement.even(f), TildeField(n, IOTA, VectorField.frame(n, i, g)))
        right = TildeUSection.tensor_term(SuperElement.even(f * g), TildeField(n, IOTA, VectorField.frame(n, i)))
        yield {"f": f, "g": g, "i": i}, u_normal_form(right, truncation), u_normal_form(left, truncation)


def _lie_linearity_cases(truncation: Truncation) -> Iterator[tuple[dict, Any, Any]]:
    """
    f (x) L[g*e_i] agrees with f*g (x) L[e_i] + f*d(g) (x) i[e_i] + d_i(f)*Dg in
    the quotient; the Kahler term is the anomaly of the degree 0 lift.
    """
    n = truncation.n
    for a, b, i in _linearity_inputs(truncation):
        f, g = monomial(n, a), monomial(n, b)
        left = TildeUSection.tensor_term(SuperElement.even(f), TildeField(n, LIE, VectorField.frame(n, i, g)))
        right = TildeUSection.tensor_term(SuperElement.even(f * g), TildeField(n, LIE, VectorField.frame(n, i)))
        right = right + TildeUSection.tensor_term(SuperElement.even(f) * de_rham(SuperElement.even(g)), TildeField(n, IOTA, VectorField.frame(n, i)))
        right = right + TildeUSection.from_kform(kahler_d(SuperElement.even(g)).left_mul(SuperElement.even(partial(f, i))))
        yield {"f": f, "g": g, "i": i}, u_normal_form(right, truncation), u_normal_form(left, truncation)


# --------------------------------------------------
# Window vector fields
# --------------------------------------------------


def window_fields(truncation: Truncation) -> list[VectorField]:
    n = truncation.n
    return [VectorField.frame(n, i, monomial(n, a)) for size in range(truncation.D + 1) for a in exponent_vectors(n, size) for i in range(1, n + 1)]
