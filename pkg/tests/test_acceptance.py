"""Acceptance matrix.

Each test runs one criterion through the harness, compares the computed
values with targets worked out here by hand, and prints one PASS/FAIL line
per criterion.
"""
import math
import time

import pytest

from bvlab.harness import CRITERIA, TIME_LIMITS

C1, C2 = 2.0, 4.0


def _report(n, rows, elapsed, limit):
    ok = all(r.passed for r in rows) and elapsed < limit
    worst = max(rows, key=lambda r: not r.passed)
    status = "PASS" if ok else "FAIL"
    return f"{status} criterion {n}: {len(rows)} checks, {elapsed:.1f}s (limit {limit:.0f}s); {worst.line()}"


def _run(n, capsys, limit=None, **kw):
    limit = limit or TIME_LIMITS[n]
    t0 = time.perf_counter()
    rows = CRITERIA[n](**kw)
    elapsed = time.perf_counter() - t0
    with capsys.disabled():
        print("\n" + _report(n, rows, elapsed, limit))
    return {r.claim: r for r in rows}, elapsed, limit


def _linear_value(g, lam):
    # lam * nu({|x - y| < r}) on (0, 1)^2 with r = lam**(-1/g), integrated directly
    r = lam ** (-1 / g)
    return lam * 2 * (r ** g / g - r ** (g + 1) / (g + 1))


@pytest.mark.parametrize("g", [0.5, 1.0, 2.0])
def test_criterion_1_absolutely_continuous_limit(g, capsys):
    rows, elapsed, limit = _run(1, capsys, limit=5.0, gammas=(g,))
    closed = rows[f"ac-closed-form[gamma={g}]"]
    assert closed.target == pytest.approx(_linear_value(g, 1e4), rel=1e-12)
    assert closed.passed
    tail = rows[f"ac-tail[gamma={g}]"]
    assert tail.target == pytest.approx(C1 / g)
    assert abs(tail.computed - C1 / g) <= tail.tolerance
    assert tail.passed
    assert elapsed < limit


def test_criterion_2_jump_limit(capsys):
    rows, elapsed, limit = _run(2, capsys)
    for g in (0.5, 1.0, 2.0):
        r = rows[f"jump-closed-form[gamma={g}]"]
        # lam * 2 r**(g+1) / (g+1) with r**(1+g) = 1/lam
        assert r.target == pytest.approx(2.0 / (g + 1), rel=1e-15)
        assert r.passed
    assert elapsed < limit


def test_criterion_3_mixed_sbv(capsys):
    rows, elapsed, limit = _run(3, capsys)
    r = rows["mixed-tail"]
    assert r.target == pytest.approx(3.0)
    assert abs(r.computed - 3.0) <= r.tolerance
    assert r.passed and elapsed < limit


def test_criterion_4_cantor_bounds(capsys):
    rows, elapsed, limit = _run(4, capsys)
    lower, upper = rows["cantor-lower-bound"], rows["cantor-bounded"]
    # |D^c u| = 1 for the Cantor function on (0, 1); jump constant 2/(1+1)
    assert lower.target == pytest.approx(1.0)
    assert lower.passed
    assert math.isfinite(upper.computed) and upper.computed <= 5.0
    assert elapsed < limit


def test_criterion_5_recovery_family(capsys):
    rows, elapsed, limit = _run(5, capsys)
    assert rows["recovery-certificates"].passed
    gap = rows["recovery-area-gap"]
    assert gap.computed < 1e-2 and gap.passed
    assert elapsed < limit


def test_criterion_6_full_staircase(capsys):
    rows, elapsed, limit = _run(6, capsys)
    limsup = rows["full-staircase-limsup"]
    assert limsup.target == pytest.approx(1.0) and limsup.passed
    below = rows["full-staircase-below-pointwise"]
    assert below.target == pytest.approx(2.0) and below.computed < 2.0
    assert elapsed < limit


def test_criterion_7_disk_slicing(capsys):
    rows, elapsed, limit = _run(7, capsys)
    closed = rows["disk-closed-form"]
    # C2 / (gamma + 1) times the perimeter of the disk of radius 0.3
    assert closed.target == pytest.approx(3.7699, abs=1e-4)
    assert abs(closed.computed - 3.7699111843) <= 0.05 * 3.7699111843
    assert rows["disk-mc"].passed
    assert elapsed < limit


def test_criterion_8_property_suites(capsys):
    rows, elapsed, limit = _run(8, capsys)
    for name in ("kernel-symmetry", "kernel-additivity", "scaling", "lambda-monotone",
                 "staircase-l1", "staircase-variation", "ramp-bound"):
        assert rows[name].passed, rows[name].line()
    assert rows["kernel-symmetry"].computed <= 1e-12
    assert rows["kernel-additivity"].computed <= 1e-12
    assert elapsed < limit
