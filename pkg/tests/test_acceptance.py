"""Acceptance gate: every criterion at its stated size, tolerance and time budget.

Each test prints one ``PASS``/``FAIL`` line.  All comparisons are exact
rational arithmetic, so the tolerance is zero everywhere.
"""

import time

import pytest

from valpow.suites import (
    LEMMA_KEYS,
    SANDWICH_KEYS,
    SuiteConfig,
    counterexample,
    decomposition,
    lifting,
    minimax,
    oracle_agreement,
    sandwich_reports,
    structural,
)
from valpow.valuation import Flavor

CFG = SuiteConfig(seed=0)


def report(capsys, number, title, ok, detail, seconds, budget):
    within = seconds < budget
    verdict = "PASS" if ok and within else "FAIL"
    with capsys.disabled():
        print(f"\n[{verdict}] criterion {number}: {title}: {detail}; {seconds:.2f}s (budget {budget}s)")
    return ok and within


def run_suite(capsys, number, title, fn, budget):
    res = fn(CFG)
    detail = f"{res.passed}/{res.total} passed"
    assert report(capsys, number, title, res.ok, detail, res.seconds, budget), res.failures


@pytest.fixture(scope="module")
def sandwich_runs():
    runs = {}
    for flavor in (Flavor.PLAIN, Flavor.SUB):
        t0 = time.perf_counter()
        reps = sandwich_reports(CFG, flavor, count=100)
        runs[flavor] = (reps, time.perf_counter() - t0)
    return runs


def test_1_decomposition(capsys):
    run_suite(capsys, 1, "capacity decomposition", decomposition, 30)


def test_2_minimax(capsys):
    run_suite(capsys, 2, "minimax equality", minimax, 10)


def test_3_sandwich(capsys, sandwich_runs):
    ok = True
    parts = []
    seconds = 0.0
    for flavor, (reps, secs) in sandwich_runs.items():
        good = sum(all(r.checks[k] for k in SANDWICH_KEYS) for r in reps)
        members = sum(r.grid_members for r in reps)
        parts.append(f"{flavor.value} {good}/{len(reps)} ({members} grid members)")
        ok = ok and good == len(reps) == 100
        seconds += secs
    assert report(capsys, 3, "witness sandwich", ok, ", ".join(parts), seconds, 300)


def test_4_lemmas(capsys, sandwich_runs):
    t0 = time.perf_counter()
    failures = [
        (flavor.value, k)
        for flavor, (reps, _) in sandwich_runs.items()
        for r in reps
        for k in LEMMA_KEYS
        if not r.checks[k]
    ]
    bundles = sum(len(reps) for reps, _ in sandwich_runs.values())
    seconds = sum(s for _, s in sandwich_runs.values()) + time.perf_counter() - t0
    detail = f"{bundles} bundles x {len(LEMMA_KEYS)} postconditions, {len(failures)} failures"
    assert report(capsys, 4, "lemma postconditions", not failures, detail, seconds, 300), failures[:5]


def test_5_lifting(capsys):
    run_suite(capsys, 5, "lifting round trips", lifting, 10)


def test_6_counterexample(capsys):
    run_suite(capsys, 6, "weak neighbourhoods escape the Scott open", counterexample, 5)


def test_7_oracles(capsys):
    run_suite(capsys, 7, "oracle agreement", oracle_agreement, 30)


def test_8_structural(capsys):
    run_suite(capsys, 8, "structural suites", structural, 60)
