import random
from itertools import combinations

from constant.defaults import COEFF_MAX, COEFF_MIN, MAX_TERMS
from lib.supercalc import SuperElement
from lib.symcalc import Form, Polynomial, VectorField, exterior_d, monomial, poly_ring


def trial_rng(seed: int, label: str, trial: int) -> random.Random:
    """Independent generator per (seed, check, trial) so any trial replays on its own."""
    return random.Random(f"{seed}:{label}:{trial}")


def random_coefficient(rng: random.Random) -> int:
    value = 0
    while value == 0:
        value = rng.randint(COEFF_MIN, COEFF_MAX)
    return value


def random_exponents(rng: random.Random, n: int, degree: int) -> tuple[int, ...]:
    exps = [0] * n
    for _ in range(degree):
        exps[rng.randrange(n)] += 1
    return tuple(exps)


def random_poly(
    rng: random.Random,
    n: int,
    maxdeg: int,
    max_terms: int = MAX_TERMS,
    zero_constant: bool = False,
) -> Polynomial:
    f = poly_ring(n).zero
    for _ in range(rng.randint(0, max_terms)):
        degree = rng.randint(1 if zero_constant else 0, max(maxdeg, 1 if zero_constant else 0))
        f += monomial(n, random_exponents(rng, n, degree), random_coefficient(rng))
    return f


def random_nonzero_poly(rng: random.Random, n: int, maxdeg: int) -> Polynomial:
    f = random_poly(rng, n, maxdeg)
    while not f:
        f = random_poly(rng, n, maxdeg)
    return f


def random_field(rng: random.Random, n: int, maxdeg: int) -> VectorField:
    return VectorField(n, tuple(random_poly(rng, n, maxdeg, max_terms=2) for _ in range(n)))


def random_form(rng: random.Random, n: int, p: int, maxdeg: int, zero_constant: bool = False) -> Form:
    if p > n:
        return Form.zero(n, p)
    subsets = list(combinations(range(1, n + 1), p))
    chosen = rng.sample(subsets, k=min(len(subsets), rng.randint(1, 2)))
    return Form(n, p, {idx: random_poly(rng, n, maxdeg, max_terms=2, zero_constant=zero_constant) for idx in chosen})


def random_closed_form(rng: random.Random, n: int, p: int, maxdeg: int) -> Form:
    """d of a random (p-1)-form, so closed and exact with coefficient degree below maxdeg."""
    if p == 0:
        return Form.function(poly_ring(n).ground_new(random_coefficient(rng)))
    return exterior_d(random_form(rng, n, p - 1, maxdeg + 1))


def random_super(rng: random.Random, n: int, maxdeg: int, degree: int | None = None) -> SuperElement:
    """Random element of the graded ring, homogeneous when a degree is given."""
    degrees = [degree] if degree is not None else list(range(n + 1))
    terms = {}
    for _ in range(rng.randint(1, 3)):
        p = rng.choice(degrees)
        if p < 0 or p > n:
            continue
        idx = tuple(sorted(rng.sample(range(1, n + 1), p)))
        terms[idx] = terms.get(idx, poly_ring(n).zero) + random_poly(rng, n, maxdeg, max_terms=2)
    return SuperElement(n, terms)
