import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bvlab.bvcalc import OpenSet1D, affine, cantor, constant, poly, step, sum_of
from bvlab.errors import ParameterError
from bvlab.evaluator1d import (CSV_COLUMNS, ToleranceWarning, Verdict, classify_cell, f_eval,
                               f_eval_mc, geometric_grid, lambda_sweep, superlevel_indicator,
                               sweep_csv)
from bvlab.harness import random_catalog_function, random_ramp
from bvlab.kernel import Cell


def linear_oracle(slope, gamma, lam, length=1.0):
    """F for u = slope * x on an interval: E is the band |x - y| < r."""
    r = min((abs(slope) / lam) ** (1 / gamma), length)
    return lam * 2 * (length * r ** gamma / gamma - r ** (gamma + 1) / (gamma + 1))


def jump_oracle(height, gamma, lam):
    """F for one jump, valid while the reach r stays inside the window."""
    r = (abs(height) / lam) ** (1 / (1 + gamma))
    return lam * 2 * r ** (gamma + 1) / (gamma + 1)


def covers(est, target, slack=0.0):
    return abs(est.value - target) <= est.error_bound + slack


# --------------------------------------------------------------- pointwise

def test_superlevel_indicator_examples():
    assert superlevel_indicator(affine(), 1.0, 100.0, 0.5, 0.505)
    assert not superlevel_indicator(affine(), 1.0, 100.0, 0.5, 0.5)
    assert not superlevel_indicator(constant(2.0), 1.0, 1e-6, 0.1, 0.9)


def test_superlevel_indicator_is_strict():
    # |u(x) - u(y)| = lam |x - y|^2 exactly at these dyadic points
    assert not superlevel_indicator(affine(), 1.0, 4.0, 0.25, 0.5)


def test_classify_cell_examples():
    assert classify_cell(constant(1.0), 1.0, 1.0, Cell((0, 0.5), (0.5, 1))) is Verdict.OUTSIDE
    assert (classify_cell(step(0.5), 1.0, 10.0, Cell((0.4, 0.45), (0.55, 0.6)))
            is Verdict.INSIDE)
    # the boundary curve is |x - y| = 0.01 for lam = 100
    assert (classify_cell(affine(), 1.0, 100.0, Cell((0.5, 0.505), (0.51, 0.52)))
            is Verdict.BOUNDARY)


@given(st.floats(0, 0.9), st.floats(0, 0.9), st.floats(0.001, 0.1), st.floats(1, 1e3))
def test_classify_verdicts_are_rigorous(x0, y0, w, lam):
    u = sum_of(poly([0.0, 1.0, -2.0]), step(0.37, 0.5))
    cell = Cell((x0, x0 + w), (y0, y0 + w))
    verdict = classify_cell(u, 1.0, lam, cell)
    xs = np.linspace(x0, x0 + w, 9)[1:-1]
    ys = np.linspace(y0, y0 + w, 9)[1:-1]
    X, Y = np.meshgrid(xs, ys)
    # verdicts hold up to null sets; drop the diagonal
    off = X.ravel() != Y.ravel()
    hits = superlevel_indicator(u, 1.0, lam, X.ravel()[off], Y.ravel()[off])
    if verdict is Verdict.INSIDE:
        assert hits.all()
    elif verdict is Verdict.OUTSIDE:
        assert not hits.any()


# -------------------------------------------------------------- evaluation

def test_f_eval_examples():
    lin = f_eval(affine(), None, 1.0, 100.0)
    assert covers(lin, 1.99)
    assert lin.error_bound <= 1e-4 * 1.99 * 1.001
    jump = f_eval(step(0.5), None, 1.0, 100.0)
    assert covers(jump, 1.0)
    assert f_eval(constant(1.5), None, 1.0, 100.0).value == 0.0


@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("lam", [3.0, 1e2, 1e4])
def test_linear_against_closed_form(gamma, lam):
    est = f_eval(affine(2.0), None, gamma, lam)
    assert covers(est, linear_oracle(2.0, gamma, lam), 1e-12)


@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("height", [0.3, -1.0, 2.5])
def test_jump_against_closed_form(gamma, height):
    lam = 1e3
    est = f_eval(step(0.5, height), None, gamma, lam)
    assert covers(est, jump_oracle(height, gamma, lam), 1e-12)


def test_f_eval_on_a_window():
    # only the part of the line inside (0.2, 0.6) counts
    est = f_eval(affine(), ((0.2, 0.6),), 1.0, 50.0)
    assert covers(est, linear_oracle(1.0, 1.0, 50.0, 0.4), 1e-12)


def test_f_eval_absolute_tolerance():
    est = f_eval(affine(), None, 1.0, 100.0, tol=1e-7)
    assert est.error_bound <= 1e-7
    assert covers(est, 1.99, 1e-12)


def test_f_eval_parameter_errors():
    with pytest.raises(ParameterError):
        f_eval(affine(), None, 0.0, 1.0)
    with pytest.raises(ParameterError):
        f_eval(affine(), None, 1.0, -1.0)
    with pytest.raises(ParameterError):
        f_eval(affine(), None, 1.0, 1.0, tol=0.0)


def test_unreachable_tolerance_warns():
    with pytest.warns(ToleranceWarning):
        est = f_eval(cantor(), None, 1.0, 1e3, tol=1e-12, max_depth=6)
    assert est.warning and est.error_bound > 1e-12


# -------------------------------------------------------------- Monte Carlo

def test_mc_constant_is_zero():
    assert f_eval_mc(constant(1.0), None, 1.0, 10.0, samples=1000) == (0.0, 0.0)


def test_mc_rejects_zero_samples():
    with pytest.raises(ParameterError):
        f_eval_mc(affine(), None, 1.0, 10.0, samples=0)


@pytest.mark.parametrize("method", ["uniform", "importance"])
def test_mc_linear_and_jump(method):
    mean, se = f_eval_mc(affine(), None, 1.0, 100.0, samples=10_000_000, seed=5, method=method)
    assert abs(mean - 1.99) <= 3 * se
    mean, se = f_eval_mc(step(0.5), None, 1.0, 100.0, samples=10_000_000, seed=6, method=method)
    assert abs(mean - 1.0) <= 3 * se


def test_mc_is_reproducible():
    a = f_eval_mc(cantor(), None, 1.0, 30.0, samples=20_000, seed=9)
    assert a == f_eval_mc(cantor(), None, 1.0, 30.0, samples=20_000, seed=9)
    assert a != f_eval_mc(cantor(), None, 1.0, 30.0, samples=20_000, seed=10)


@pytest.mark.parametrize("seed", range(6))
def test_oracle_equivalence_on_random_functions(seed):
    rng = np.random.default_rng(seed)
    u = random_catalog_function(rng)
    lam = float(10 ** rng.uniform(1, 3))
    gamma = float(rng.choice([0.5, 1.0, 2.0]))
    est = f_eval(u, None, gamma, lam, rtol=3e-3, warn=False)
    mean, se = f_eval_mc(u, None, gamma, lam, samples=2_000_000, seed=seed,
                         method="importance")
    assert abs(est.value - mean) <= 3 * se + est.error_bound


# --------------------------------------------------------------- properties

@settings(max_examples=10)
@given(st.floats(0.2, 5.0), st.floats(5.0, 500.0))
def test_scaling_identity(c, lam):
    u = sum_of(affine(0.7), step(0.3, 0.4), cantor(0.5, (0.5, 1.0)))
    left = f_eval(c * u, None, 1.0, lam, rtol=1e-2, warn=False)
    right = f_eval(u, None, 1.0, lam / c, rtol=1e-2, warn=False)
    assert abs(left.value - c * right.value) <= left.error_bound + c * right.error_bound + 1e-12


def test_measure_of_superlevel_set_decreases_in_lambda():
    u = sum_of(poly([0.0, 1.0, -1.0]), step(0.6, 0.3), cantor(0.4, (0.0, 0.5)))
    prev = None
    for lam in np.geomspace(1.0, 1e4, 9):
        est = f_eval(u, None, 1.0, lam, rtol=1e-2, warn=False)
        nu_lo, nu_hi = est.lower / lam, est.upper / lam
        if prev is not None:
            assert nu_lo <= prev + 1e-12
        prev = nu_hi


def test_superadditive_over_disjoint_windows():
    u = sum_of(affine(1.0), step(0.5, 0.8), cantor(0.5, (0.6, 0.9)))
    lam = 40.0
    W1, W2 = ((0.0, 0.45),), ((0.45, 1.0),)
    both = f_eval(u, ((0.0, 0.45), (0.45, 1.0)), 1.0, lam)
    parts = f_eval(u, W1, 1.0, lam), f_eval(u, W2, 1.0, lam)
    slack = both.error_bound + sum(p.error_bound for p in parts)
    assert both.value >= sum(p.value for p in parts) - slack


@pytest.mark.parametrize("seed", range(3))
def test_monotone_transition_bound(seed):
    rng = np.random.default_rng(seed)
    u, (L1, L2) = random_ramp(rng)
    rise = u.right_limit(L2 + 1) - u.right_limit(L1 - 1)
    for gamma, delta in ((0.5, 0.3), (1.0, 0.1), (2.0, 0.2)):
        lam = 1.2 * rise / delta ** (1 + gamma)
        est = f_eval(u, ((L1 - delta, L2 + delta),), gamma, lam, rtol=1e-2, warn=False)
        assert est.upper >= 2 * rise / (gamma + 1)


# ------------------------------------------------------------------- sweeps

def test_geometric_grid():
    g = geometric_grid(1e2, 1e6, 5)
    assert np.allclose(g, [1e2, 1e3, 1e4, 1e5, 1e6])
    with pytest.raises(ParameterError):
        geometric_grid(1.0, 1.0, 3)


def test_sweep_linear_tail():
    res = lambda_sweep(affine(), None, 1.0, geometric_grid(1e2, 1e6, 9))
    assert [r.lam for r in res.rows] == pytest.approx(list(geometric_grid(1e2, 1e6, 9)))
    assert res.tail_min == pytest.approx(2.0, rel=1e-2)
    assert res.tail_max == pytest.approx(2.0, rel=1e-2)


def test_sweep_jump_tail_is_constant():
    res = lambda_sweep(step(0.5), None, 1.0, geometric_grid(1e2, 1e6, 5))
    for r in res.rows:
        assert covers(r.estimate, 1.0, 1e-12)


def test_sweep_rejects_bad_grid():
    with pytest.raises(ParameterError):
        lambda_sweep(affine(), None, 1.0, [10.0])
    with pytest.raises(ParameterError):
        lambda_sweep(affine(), None, 1.0, [10.0, 5.0])


def test_sweep_csv_columns_and_timing_switch():
    res = lambda_sweep(step(0.5), None, 1.0, [10.0, 100.0])
    text = sweep_csv(res.rows, timing=False)
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 3 and all(r[-1] == "0.000" for r in rows[1:])
    assert float(rows[2][1]) == res.rows[1].estimate.value
    again = lambda_sweep(step(0.5), None, 1.0, [10.0, 100.0])
    assert sweep_csv(again.rows, timing=False) == text


def test_sweep_csv_to_file(tmp_path):
    res = lambda_sweep(affine(), None, 1.0, [10.0, 20.0])
    path = tmp_path / "s.csv"
    sweep_csv(res.rows, str(path))
    assert path.read_text().splitlines()[0] == ",".join(CSV_COLUMNS)


def test_open_set_window_validation():
    with pytest.raises(Exception):
        f_eval(affine(), OpenSet1D(((0.5, 1.5),)), 1.0, 10.0)
