"""
1-truncated vertex algebras attached to vertex models.

The degree 0 part is the polynomial ring and the degree 1 part is the space
of vertex sections. The seven products are

    a(-1)b = ab          a(-1)x = a*x         x(-1)a = a*x + e_dict d(pi(x)a)
    x(0)a = pi(x)a       a(0)x = e_diff pi(x)a
    x(0)y = [x, y]       x(1)y = <x, y>
"""

import random
from collections.abc import Callable
from dataclasses import dataclass
from itertools import product
from logging import ERROR, INFO

from tqdm import tqdm

from constant.defaults import DEFAULT_MAXDEG, DEFAULT_SEED, DEFAULT_TRIALS, MIN_SEARCH_TRIALS
from lib.report import CheckResult, Report, run_check
from lib.symcalc import Polynomial, poly_ring
from lib.vertex import (
    AnyVertexModel,
    SignVector,
    VertexModel,
    VertexSection,
    check_algebroid_identities,
    star,
    v_bracket,
    v_pairing,
    v_partial,
)
from utils.logger import get_logger
from utils.sampling import random_field, random_form, random_poly

Element = Polynomial | VertexSection


@dataclass(frozen=True)
class TruncatedStructure:
    model: AnyVertexModel

    @property
    def n(self) -> int:
        return self.model.n

    @property
    def vacuum(self) -> Polynomial:
        return poly_ring(self.n).one

    def partial(self, a: Polynomial) -> VertexSection:
        return v_partial(self.model, a)

    def fun_fun(self, a: Polynomial, b: Polynomial) -> Polynomial:
        return a * b

    def fun_sec(self, a: Polynomial, x: VertexSection) -> VertexSection:
        return star(self.model, a, x)

    def sec_fun(self, x: VertexSection, a: Polynomial) -> VertexSection:
        correction = self.partial(x.anchor.apply(a))
        if self.model.signs.dictionary == -1:
            correction = -correction
        return star(self.model, a, x) + correction

    def fun0_sec(self, a: Polynomial, x: VertexSection) -> Polynomial:
        return self.model.signs.diff * x.anchor.apply(a)

    def sec0_fun(self, x: VertexSection, a: Polynomial) -> Polynomial:
        return x.anchor.apply(a)

    def sec0_sec(self, x: VertexSection, y: VertexSection) -> VertexSection:
        return v_bracket(self.model, x, y)

    def sec1_sec(self, x: VertexSection, y: VertexSection) -> Polynomial:
        return v_pairing(self.model, x, y)

    def product(self, i: int, left: Element, right: Element) -> Element:
        """The i-th product for i in (-1, 0, 1); products of degree outside 0..1 vanish."""
        left_fun, right_fun = not isinstance(left, VertexSection), not isinstance(right, VertexSection)
        degree = (0 if left_fun else 1) + (0 if right_fun else 1) - i - 1
        if degree < 0:
            return poly_ring(self.n).zero
        if degree > 1:
            raise ValueError(f"the ({i}) product of two sections has degree {degree}")
        table: dict[tuple[int, bool, bool], Callable] = {
            (-1, True, True): self.fun_fun,
            (-1, True, False): self.fun_sec,
            (-1, False, True): self.sec_fun,
            (0, True, False): self.fun0_sec,
            (0, False, True): self.sec0_fun,
            (0, False, False): self.sec0_sec,
            (1, False, False): self.sec1_sec,
        }
        return table[(i, left_fun, right_fun)](left, right)


def to_truncated(model: AnyVertexModel) -> TruncatedStructure:
    return TruncatedStructure(model)


@dataclass(frozen=True)
class VertexOperations:
    """Algebroid operations read back from the products of a truncated structure."""

    star: Callable[[Polynomial, VertexSection], VertexSection]
    star_right: Callable[[Polynomial, VertexSection], VertexSection]
    bracket: Callable[[VertexSection, VertexSection], VertexSection]
    pairing: Callable[[VertexSection, VertexSection], Polynomial]
    anchor: Callable[[VertexSection, Polynomial], Polynomial]
    partial: Callable[[Polynomial], VertexSection]


def from_truncated(structure: TruncatedStructure) -> VertexOperations:
    sign = structure.model.signs.dictionary

    def star_right(f: Polynomial, v: VertexSection) -> VertexSection:
        correction = structure.partial(structure.sec0_fun(v, f))
        return structure.sec_fun(v, f) - (correction if sign == 1 else -correction)

    return VertexOperations(
        star=structure.fun_sec,
        star_right=star_right,
        bracket=structure.sec0_sec,
        pairing=structure.sec1_sec,
        anchor=structure.sec0_fun,
        partial=structure.partial,
    )


# --------------------------------------------------
# Axioms
# --------------------------------------------------


def truncated_corner_cases(n: int) -> list[dict]:
    R = poly_ring(n)
    x1 = R.gens[0]
    functions = [R.one, x1, x1 * x1]
    frame = VertexSection.frame(n, 1, x1)
    sections = [VertexSection.zero(n), frame]
    return [{"a": a, "b": b, "c": x1, "x": x, "y": y, "z": frame} for a in functions for b in functions for x in sections for y in sections]


def check_truncated_axioms(
    structure: TruncatedStructure,
    seed: int = DEFAULT_SEED,
    trials: int = DEFAULT_TRIALS,
    maxdeg: int = DEFAULT_MAXDEG,
    log_level: int = INFO,
    progress: bool = False,
    stop_on_failure: bool = False,
) -> Report:
    logger = get_logger("Vertex.Truncated", level=log_level)
    if trials < 1:
        logger.error("Invalid trial count: %s", trials)
        raise ValueError(f"trials must be at least 1, got {trials}")
    n = structure.n
    S = structure
    zero0 = poly_ring(n).zero
    zero1 = VertexSection.zero(n)

    def section(rng: random.Random) -> VertexSection:
        return VertexSection.from_field(random_field(rng, n, maxdeg), random_form(rng, n, 1, maxdeg))

    def sample(rng: random.Random) -> dict:
        return {
            "a": random_poly(rng, n, maxdeg),
            "b": random_poly(rng, n, maxdeg),
            "c": random_poly(rng, n, maxdeg),
            "x": section(rng),
            "y": section(rng),
            "z": section(rng),
        }

    def vacuum(v):
        return (S.fun_fun(v["a"], S.vacuum), S.sec_fun(v["x"], S.vacuum), S.sec0_fun(v["x"], S.vacuum)), (v["a"], v["x"], zero0)

    def deriv1(v):
        da = S.partial(v["a"])
        return (S.sec0_fun(da, v["b"]), S.sec0_sec(da, v["x"]), S.sec1_sec(da, v["x"])), (zero0, zero1, -S.fun0_sec(v["a"], v["x"]))

    def deriv2(v):
        a, b, x = v["a"], v["b"], v["x"]
        return (
            (S.partial(S.fun_fun(a, b)), S.partial(S.sec0_fun(x, a))),
            (S.sec_fun(S.partial(a), b) + S.fun_sec(a, S.partial(b)), S.sec0_sec(x, S.partial(a))),
        )

    def comm_minus1(v):
        a, b, x = v["a"], v["b"], v["x"]
        return (S.fun_fun(a, b), S.fun_sec(a, x)), (S.fun_fun(b, a), S.sec_fun(x, a) - S.partial(S.sec0_fun(x, a)))

    def comm0(v):
        a, x, y = v["a"], v["x"], v["y"]
        return (S.sec0_fun(x, a), S.sec0_sec(x, y)), (-S.fun0_sec(a, x), -S.sec0_sec(y, x) + S.partial(S.sec1_sec(y, x)))

    def comm1(v):
        return S.sec1_sec(v["x"], v["y"]), S.sec1_sec(v["y"], v["x"])

    def assoc_minus1(v):
        a, b, c = v["a"], v["b"], v["c"]
        return S.fun_fun(S.fun_fun(a, b), c), S.fun_fun(a, S.fun_fun(b, c))

    def assoc0_functions(v):
        a, b, x, y = v["a"], v["b"], v["x"], v["y"]
        return (
            (S.sec0_fun(x, S.fun_fun(a, b)), S.fun0_sec(a, S.sec0_sec(x, y))),
            (
                S.fun_fun(S.sec0_fun(x, a), b) + S.fun_fun(a, S.sec0_fun(x, b)),
                S.fun0_sec(S.fun0_sec(a, x), y) + S.sec0_fun(x, S.fun0_sec(a, y)),
            ),
        )

    def assoc0_module(v):
        a, x, y = v["a"], v["x"], v["y"]
        return (
            (S.sec0_sec(x, S.fun_sec(a, y)), S.sec0_sec(x, S.sec_fun(y, a))),
            (
                S.fun_sec(S.sec0_fun(x, a), y) + S.fun_sec(a, S.sec0_sec(x, y)),
                S.sec_fun(S.sec0_sec(x, y), a) + S.sec_fun(y, S.sec0_fun(x, a)),
            ),
        )

    def assoc0_anchor(v):
        a, x, y = v["a"], v["x"], v["y"]
        return (
            (S.sec0_fun(x, S.fun0_sec(a, y)), S.sec0_fun(x, S.sec0_fun(y, a))),
            (
                S.fun0_sec(S.sec0_fun(x, a), y) + S.fun0_sec(a, S.sec0_sec(x, y)),
                S.sec0_fun(S.sec0_sec(x, y), a) + S.sec0_fun(y, S.sec0_fun(x, a)),
            ),
        )

    def assoc0_bracket(v):
        x, y, z = v["x"], v["y"], v["z"]
        return (
            (S.sec0_sec(x, S.sec0_sec(y, z)), S.sec0_fun(x, S.sec1_sec(y, z))),
            (
                S.sec0_sec(S.sec0_sec(x, y), z) + S.sec0_sec(y, S.sec0_sec(x, z)),
                S.sec1_sec(S.sec0_sec(x, y), z) + S.sec1_sec(y, S.sec0_sec(x, z)),
            ),
        )

    def assoc1(v):
        a, b, x = v["a"], v["b"], v["x"]
        return S.sec0_fun(S.fun_sec(a, x), b), S.fun_fun(a, S.sec0_fun(x, b))

    def assoc2(v):
        a, b, x = v["a"], v["b"], v["x"]
        lhs = S.fun_sec(S.fun_fun(a, b), x)
        rhs = S.fun_sec(a, S.fun_sec(b, x)) + S.sec_fun(S.partial(a), S.fun0_sec(b, x)) + S.sec_fun(S.partial(b), S.fun0_sec(a, x))
        return lhs, rhs

    def assoc3(v):
        a, x, y = v["a"], v["x"], v["y"]
        return S.sec1_sec(S.fun_sec(a, x), y), S.fun_fun(a, S.sec1_sec(x, y)) - S.sec0_fun(x, S.sec0_fun(y, a))

    axioms = {
        "Vacuum": vacuum,
        "Deriv1": deriv1,
        "Deriv2": deriv2,
        "Comm-1": comm_minus1,
        "Comm0": comm0,
        "Comm1": comm1,
        "Assoc-1": assoc_minus1,
        "Assoc0-functions": assoc0_functions,
        "Assoc0-module": assoc0_module,
        "Assoc0-anchor": assoc0_anchor,
        "Assoc0-bracket": assoc0_bracket,
        "Assoc1": assoc1,
        "Assoc2": assoc2,
        "Assoc3": assoc3,
    }

    corners = truncated_corner_cases(n)
    checks: list[CheckResult] = []
    for name, axiom in axioms.items():
        result = run_check(name, sample, axiom, trials, seed, corner_cases=corners, logger=logger, progress=progress)
        checks.append(result)
        if stop_on_failure and not result.passed:
            break

    config = {"n": n, "signs": structure.model.signs.to_dict(), "trials": trials, "maxdeg": maxdeg}
    report = Report("truncated-axioms", checks, seed, config)
    logger.debug("Truncated axioms for %s: %s failures", structure.model.render(), len(report.failures))
    return report


# --------------------------------------------------
# Sign search
# --------------------------------------------------


def sign_search(
    n: int,
    seed: int = DEFAULT_SEED,
    trials: int = DEFAULT_TRIALS,
    maxdeg: int = DEFAULT_MAXDEG,
    log_level: int = INFO,
    progress: bool = False,
) -> list[SignVector]:
    """Every sign assignment under which all truncated axioms and algebroid identities hold."""
    logger = get_logger("Vertex.SignSearch", level=log_level)
    if trials < MIN_SEARCH_TRIALS:
        logger.error("Sign search needs at least %s trials, got %s", MIN_SEARCH_TRIALS, trials)
        raise ValueError(f"sign search needs at least {MIN_SEARCH_TRIALS} trials, got {trials}")

    candidates = [SignVector.from_tuple(values) for values in product((1, -1), repeat=6)]
    logger.info("Searching %s sign assignments (n=%s, trials=%s, maxdeg=%s)", len(candidates), n, trials, maxdeg)

    survivors: list[SignVector] = []
    for signs in tqdm(candidates, desc="Sign search", unit="assignment", disable=not progress):
        model = VertexModel(n, signs)
        truncated = check_truncated_axioms(to_truncated(model), seed, trials, maxdeg, log_level=ERROR, stop_on_failure=True)
        if not truncated.passed:
            logger.debug("%s fails %s", signs.render(), truncated.failures[0].name)
            continue
        identities = check_algebroid_identities(model, seed, trials, maxdeg, log_level=ERROR, stop_on_failure=True)
        if not identities.passed:
            logger.debug("%s fails %s", signs.render(), identities.failures[0].name)
            continue
        survivors.append(signs)

    if survivors:
        logger.info("Surviving assignments: %s", ", ".join(s.render() for s in survivors))
    else:
        logger.warning("No sign assignment survived")
    return survivors
