import random
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from functools import singledispatch
from logging import Logger
from typing import Any

from sympy.polys.rings import PolyElement
from tqdm import tqdm

from constant.defaults import TOOL_VERSION
from lib.supercalc import KahlerOneForm, SuperElement
from lib.symcalc import Form, VectorField, render_poly
from utils.sampling import trial_rng

PASS = "pass"
FAIL = "fail"


class WindowOverflowError(ValueError):
    """Raised when an element does not fit the finite window it is tested in."""


@dataclass(frozen=True)
class Witness:
    inputs: dict[str, str]
    expected: str
    got: str

    def to_dict(self) -> dict[str, Any]:
        return {"inputs": dict(self.inputs), "expected": self.expected, "got": self.got}


@dataclass
class CheckResult:
    name: str
    status: str
    trials: int
    witnesses: list[Witness] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "status": self.status,
            "trials": self.trials,
            "witnesses": [w.to_dict() for w in self.witnesses],
        }


@dataclass
class Report:
    title: str
    checks: list[CheckResult] = field(default_factory=list)
    seed: int | None = None
    config: dict[str, Any] = field(default_factory=dict)
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "tool-version": TOOL_VERSION,
            "title": self.title,
            "status": PASS if self.passed else FAIL,
            "seed": self.seed,
            "config": dict(self.config),
            "axioms": len(self.checks),
            "checks": [c.to_dict() for c in self.checks],
            "failures": [c.name for c in self.failures],
            **self.extra,
        }


# --------------------------------------------------
# Rendering and shrinking of arbitrary values
# --------------------------------------------------


def render_value(value: Any) -> str:
    if isinstance(value, PolyElement):
        return render_poly(value)
    if hasattr(value, "render"):
        return value.render()
    return str(value)


@singledispatch
def smaller(value: Any) -> Iterable[Any]:
    """Values obtained from ``value`` by dropping one term."""
    candidates = getattr(value, "shrink_candidates", None)
    return candidates() if candidates else ()


@smaller.register
def _smaller_poly(value: PolyElement) -> Iterable[Any]:
    R = value.ring
    for monom in list(value.keys()):
        yield R.from_dict({m: c for m, c in value.items() if m != monom})
    for monom, coeff in value.items():
        if abs(coeff) != 1:
            yield R.from_dict({m: (c if m != monom else c / abs(c)) for m, c in value.items()})


@smaller.register
def _smaller_form(value: Form) -> Iterable[Any]:
    for idx in value.terms:
        yield Form(value.n, value.p, {i: c for i, c in value.terms.items() if i != idx})
    for idx, coeff in value.terms.items():
        for reduced in smaller(coeff):
            yield Form(value.n, value.p, {**value.terms, idx: reduced})


@smaller.register
def _smaller_field(value: VectorField) -> Iterable[Any]:
    for k, c in enumerate(value.components):
        for reduced in smaller(c):
            yield VectorField(value.n, value.components[:k] + (reduced,) + value.components[k + 1 :])


@smaller.register
def _smaller_super(value: SuperElement) -> Iterable[Any]:
    for idx in value.terms:
        yield SuperElement(value.n, {i: c for i, c in value.terms.items() if i != idx})
    for idx, coeff in value.terms.items():
        for reduced in smaller(coeff):
            yield SuperElement(value.n, {**value.terms, idx: reduced})


@smaller.register
def _smaller_kahler(value: KahlerOneForm) -> Iterable[Any]:
    for k, c in enumerate(value.even):
        for reduced in smaller(c):
            yield KahlerOneForm(value.n, value.even[:k] + (reduced,) + value.even[k + 1 :], value.odd)
    for k, c in enumerate(value.odd):
        for reduced in smaller(c):
            yield KahlerOneForm(value.n, value.even, value.odd[:k] + (reduced,) + value.odd[k + 1 :])


def shrink(values: dict[str, Any], still_fails: Callable[[dict[str, Any]], bool], max_steps: int = 200) -> dict[str, Any]:
    """Greedily drop single terms from the inputs while the failure persists."""
    current = dict(values)
    for _ in range(max_steps):
        for name, value in current.items():
            candidate = next((c for c in smaller(value) if still_fails({**current, name: c})), None)
            if candidate is not None:
                current[name] = candidate
                break
        else:
            return current
    return current


# --------------------------------------------------
# Randomized identity checks
# --------------------------------------------------

Sampler = Callable[[random.Random], dict[str, Any]]
Evaluator = Callable[[dict[str, Any]], tuple[Any, Any]]


def _fails(evaluate: Evaluator, values: dict[str, Any]) -> bool:
    expected, got = evaluate(values)
    return expected != got


def _still_fails(evaluate: Evaluator, values: dict[str, Any]) -> bool:
    # shrunk inputs may leave the domain of the identity
    try:
        return _fails(evaluate, values)
    except ValueError:
        return False


def run_check(
    name: str,
    sample: Sampler,
    evaluate: Evaluator,
    trials: int,
    seed: int,
    corner_cases: Iterable[dict[str, Any]] = (),
    logger: Logger | None = None,
    progress: bool = False,
) -> CheckResult:
    """
    Evaluate an identity on fixed corner cases and on ``trials`` random inputs.

    ``evaluate`` returns the two sides of the identity; the first mismatch is
    shrunk and recorded as the witness.
    """
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")

    count = 0
    for values in corner_cases:
        count += 1
        if _fails(evaluate, values):
            return _failure(name, values, evaluate, count, logger)

    for trial in tqdm(range(trials), desc=name, unit="trial", disable=not progress, leave=False):
        values = sample(trial_rng(seed, name, trial))
        count += 1
        if _fails(evaluate, values):
            return _failure(name, values, evaluate, count, logger)

    if logger:
        logger.debug("%s passed %s trials", name, count)
    return CheckResult(name, PASS, count)


def run_cases(name: str, cases: Iterable[tuple[dict[str, Any], Any, Any]], logger: Logger | None = None) -> CheckResult:
    """Evaluate an identity on an explicit finite family of (inputs, expected, got) cases."""
    count = 0
    for inputs, expected, got in cases:
        count += 1
        if expected != got:
            witness = Witness({k: render_value(v) for k, v in inputs.items()}, render_value(expected), render_value(got))
            if logger:
                logger.warning("%s failed on %s: expected %s, got %s", name, witness.inputs, witness.expected, witness.got)
            return CheckResult(name, FAIL, count, [witness])
    if logger:
        logger.debug("%s passed %s cases", name, count)
    return CheckResult(name, PASS, count)


def _failure(name: str, values: dict[str, Any], evaluate: Evaluator, count: int, logger: Logger | None) -> CheckResult:
    minimal = shrink(values, lambda v: _still_fails(evaluate, v))
    expected, got = evaluate(minimal)
    witness = Witness({k: render_value(v) for k, v in minimal.items()}, render_value(expected), render_value(got))
    if logger:
        logger.warning("%s failed on %s: expected %s, got %s", name, witness.inputs, witness.expected, witness.got)
    return CheckResult(name, FAIL, count, [witness])
