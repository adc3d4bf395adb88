import pytest

from lib.report import FAIL, PASS, Report, run_cases, run_check
from lib.symcalc import poly_ring, var


def constant_part(values: dict) -> tuple:
    f = values["f"]
    return f.ring.zero, f.ring.from_dict({m: c for m, c in f.items() if not any(m)})


def test_failing_check_records_a_shrunk_witness():
    x1 = var(1, 1)
    result = run_check("no-constant", lambda rng: {"f": 3 * x1 * x1 + x1 + 1}, constant_part, trials=5, seed=1)
    assert result.status == FAIL
    assert result.trials == 1
    assert result.witnesses[0].to_dict() == {"inputs": {"f": "1"}, "expected": "0", "got": "1"}


def test_passing_check_counts_corner_cases():
    x1 = var(1, 1)
    result = run_check("no-constant", lambda rng: {"f": x1 * rng.randint(1, 5)}, constant_part, trials=4, seed=1, corner_cases=[{"f": poly_ring(1).zero}])
    assert result.passed
    assert result.trials == 5
    with pytest.raises(ValueError, match="at least 1"):
        run_check("no-constant", lambda rng: {}, constant_part, trials=0, seed=1)


def test_run_cases_stops_at_the_first_mismatch():
    cases = [({"k": 1}, 1, 1), ({"k": 2}, 4, 5), ({"k": 3}, 9, 9)]
    result = run_cases("squares", cases)
    assert result.trials == 2
    assert result.witnesses[0].to_dict() == {"inputs": {"k": "2"}, "expected": "4", "got": "5"}


def test_report_dict():
    ok = run_cases("a", [({}, 1, 1)])
    bad = run_cases("b", [({}, 1, 2)])
    report = Report("demo", [ok, bad], seed=3, config={"n": 1}, extra={"note": "x"})
    payload = report.to_dict()
    assert payload["status"] == FAIL
    assert payload["axioms"] == 2
    assert payload["failures"] == ["b"]
    assert payload["note"] == "x"
    assert report.check("a").status == PASS
    with pytest.raises(KeyError):
        report.check("c")
