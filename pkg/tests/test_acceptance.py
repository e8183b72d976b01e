"""Acceptance criteria 1-8, each at its stated tolerance.

Every test prints one ``criterion N: PASS/FAIL`` line followed by the measured
values, whether or not it passes.
"""
import pytest

from solitonflow import checks


@pytest.fixture(scope="module")
def results():
    return {}


def _run(results, part):
    if part not in results:
        res = checks.SuiteResult(part.__name__)
        part(res)
        results[part] = res
    return results[part]


def _report(capsys, res, criterion):
    flags = res.flags[criterion]
    ok = res.criterion_passed(criterion)
    mark = "PASS" if ok else "FAIL"
    worst = [f for f in flags if not f.passed] or flags
    with capsys.disabled():
        print(f"\ncriterion {criterion}: {mark} ({len(flags)} checks; "
              f"{worst[0].line()})")
    assert ok, "\n".join(f.line() for f in flags if not f.passed)


def test_criterion_1_example1_reproduction(results, capsys):
    _report(capsys, _run(results, checks.example1_reproduction), 1)


def test_criterion_2_first_integrals(results, capsys):
    _report(capsys, _run(results, checks.first_integrals_and_monotonicity), 2)


def test_criterion_3_monotonicity(results, capsys):
    _report(capsys, _run(results, checks.first_integrals_and_monotonicity), 3)


def test_criterion_4_phase_space_structure(results, capsys):
    _report(capsys, _run(results, checks.phase_space_structure), 4)


def test_criterion_5_oracle_equivalence(results, capsys):
    _report(capsys, _run(results, checks.oracle_equivalence), 5)


def test_criterion_6_ricci_flat_limit(results, capsys):
    _report(capsys, _run(results, checks.ricci_flat_suite), 6)


def test_criterion_7_two_summands(results, capsys):
    _report(capsys, _run(results, checks.two_summands_suite), 7)


def test_criterion_8_convergence_order(results, capsys):
    _report(capsys, _run(results, checks.convergence_order), 8)
