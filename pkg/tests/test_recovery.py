import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from bvlab.bvcalc import (affine, area_functional, cantor, poly, sine, spline, step, steps, sum_of,
                          total_variation, variation_decomposition)
from bvlab.errors import ParameterError, UnsupportedFormError
from bvlab.harness import random_catalog_function
from bvlab.recovery import (Cutoff, DegenerateLevelError, RecoveryFamily, StaircaseParams,
                            build_recovery_family, glue, glue_result, level_crossings, mollify,
                            sbv_limit, staircase, staircase_result, superlevel_set, truncate)
from bvlab.slicer import disk_indicator, linear_ridge

GRID = np.linspace(0.0005, 0.9995, 1000)


def l1_grid(v, u, m=11):
    """Midpoint rule on 3**m cells; its error is at most the variation of |v - u| times h."""
    h = 3.0 ** -m
    x = (np.arange(3 ** m) + 0.5) * h
    return float(np.abs(v.eval_unchecked(x) - u.eval_unchecked(x)).sum() * h)


def l1_oracle(v, u, a=0.0, b=1.0):
    pts = sorted(set(v.breakpoints(a, b)) | set(u.breakpoints(a, b)))
    return quad(lambda x: abs(v.eval_unchecked(x)[0] - u.eval_unchecked(x)[0]), a, b,
                points=pts[:100] or None, limit=1000, epsabs=1e-10)[0]


# ----------------------------------------------------------- level sets

def test_level_crossing_examples():
    assert level_crossings(affine(), 0.5) == 1
    assert level_crossings(step(0.5), 0.5) == 1
    assert level_crossings(cantor(), 0.5) == 1
    assert level_crossings(sine(1.0, 20.0), 0.1) == 7


def test_sine_crossings_against_sign_changes():
    u = sine(1.0, 20.0)
    x = np.linspace(0, 1, 200001)
    changes = int(np.count_nonzero(np.diff(np.sign(u.eval_unchecked(x) - 0.1))))
    assert level_crossings(u, 0.1) == changes


def test_superlevel_set_of_line():
    (iv,) = superlevel_set(affine(), 0.25)
    assert iv == pytest.approx((0.25, 1.0))


def test_degenerate_level_is_flagged():
    # u = 0.3 on [0.3, 0.7] at its maximum: {u > 0.3} is empty, {u >= 0.3} is not
    u = spline([0.0, 0.3, 0.7, 1.0], [0.0, 0.3, 0.3, 0.0])
    with pytest.raises(DegenerateLevelError):
        level_crossings(u, 0.3)
    # a plateau crossed monotonically is harmless
    assert level_crossings(spline([0.0, 0.3, 0.7, 1.0], [0.0, 0.3, 0.3, 0.6]), 0.3) == 1


# ------------------------------------------------------------ truncation

def test_truncate_examples():
    u = affine()
    assert truncate(u, 2.0) is u
    v = truncate(affine(2.0), 1.0)
    assert np.allclose(v(GRID), np.clip(2 * GRID, -1, 1), atol=1e-12)
    assert variation_decomposition(v).abs == pytest.approx(1.0, abs=1e-9)
    w = truncate(cantor(3.0), 1.0)
    d = variation_decomposition(w)
    assert d.cantor == pytest.approx(1.0, abs=1e-9)
    assert w(0.25) == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=20)
@given(st.integers(0, 10 ** 6), st.floats(0.2, 1.5))
def test_truncate_clips_values_and_variation(seed, N):
    u = random_catalog_function(np.random.default_rng(seed))
    v = truncate(u, N)
    x = GRID[np.min(np.abs(GRID[:, None] - u.breakpoints(0, 1)[None, :]), axis=1,
                    initial=1.0) > 1e-6]
    assert np.allclose(v.eval_unchecked(x), np.clip(u.eval_unchecked(x), -N, N), atol=1e-8)
    assert total_variation(v) <= total_variation(u) + 1e-9


def test_truncate_rejects_bad_level():
    with pytest.raises(ParameterError):
        truncate(affine(), 0.0)


# ------------------------------------------------------------- staircase

def test_staircase_of_line():
    r = staircase_result(affine(), StaircaseParams(2.0, 16))
    d = variation_decomposition(r.function)
    assert d.abs == 0.0 and d.cantor == 0.0
    assert d.jump <= 1.0 + 1e-12
    assert r.l1_gap <= 0.25
    assert r.l1_gap == pytest.approx(l1_oracle(r.function, affine()), abs=1e-8)


def test_staircase_of_cantor():
    r = staircase_result(cantor(), StaircaseParams(2.0, 64))
    d = variation_decomposition(r.function)
    assert d.abs == 0.0 and d.cantor == 0.0
    assert d.jump <= 1.0 + 1e-12
    assert r.l1_gap <= 1 / 16
    # variation of |v - u| is at most 2, so the grid is within 2h
    assert r.l1_gap == pytest.approx(l1_grid(r.function, cantor()), abs=2 * 3.0 ** -11)


def test_staircase_fixed_point():
    # levels of M = 1, k = 4 are multiples of 0.5; u already sits on them
    u = steps([0.2, 0.45, 0.8], [0.5, 0.5, 1.0], base=-1.0)
    v = staircase(u, StaircaseParams(1.0, 4))
    assert np.allclose(v(GRID), u(GRID))
    assert total_variation(v) == pytest.approx(total_variation(u))


def test_staircase_reports_required_k():
    p = StaircaseParams(2.0, 4)
    with pytest.raises(ParameterError, match=str(p.required_k(0.01, 1.0))):
        staircase(affine(), p, eps=0.01)


def test_staircase_params_validation():
    for bad in ({"M": 0.0, "k": 4}, {"M": 1.0, "k": 0}, {"M": 1.0, "k": 2.5},
                {"M": 1.0, "k": 4, "level_samples": 0}):
        with pytest.raises(ParameterError):
            StaircaseParams(**bad)


@settings(max_examples=8)
@given(st.integers(0, 10 ** 6), st.sampled_from([8, 16]))
def test_staircase_invariants(seed, k):
    u = random_catalog_function(np.random.default_rng(seed))
    x = np.linspace(0, 1, 4001)
    M = 1.01 * float(np.max(np.abs(u.eval_unchecked(x)))) + 0.05
    # the step 2M/k must stay below 1
    k *= math.ceil(M)
    eps = 1.01 * (2 * M / k)
    r = staircase_result(u, StaircaseParams(M, k, 17), eps)
    d = variation_decomposition(r.function)
    assert d.abs == 0.0 and d.cantor == 0.0
    assert r.l1_gap <= 4 * eps
    assert r.variation_after <= r.variation_before + 1e-12


def test_staircase_2d_ridge_is_jump_only():
    v = staircase(linear_ridge(1.0), StaircaseParams(1.0, 8))
    d = variation_decomposition(v.profile, ((0.0, 1.0),))
    assert d.abs == 0.0 and d.jump <= 1.0 + 1e-12
    u = disk_indicator()
    assert staircase(u, StaircaseParams(1.0, 8)) is u


# ------------------------------------------------------------ mollifier

@pytest.mark.parametrize("u", [step(0.5), cantor()])
def test_mollify_monotone_keeps_variation(u):
    v = mollify(u, 0.01)
    assert total_variation(v) == pytest.approx(1.0, abs=1e-6)
    assert v.domain.intervals[0] == pytest.approx((-0.01, 1.01))
    x = np.linspace(-0.01, 1.01, 501)
    assert np.all(np.diff(v(x)) >= -1e-9)


def test_mollify_converges_in_l1():
    u = sum_of(poly([0.0, 1.0, -1.0]), step(0.4, 0.5))
    gaps = [l1_oracle(mollify(u, d).with_domain(u.domain), u) for d in (0.1, 0.03, 0.01)]
    assert gaps[0] > gaps[1] > gaps[2]
    # a jump of height 1/2 smeared over 2 delta costs at most delta / 2
    assert gaps[2] <= 0.5 * 0.01 + 1e-4


def test_mollify_area_approaches_area_of_u():
    u = step(0.5)
    area = area_functional(u)
    got = [area_functional(mollify(u, d).with_domain(u.domain)) for d in (0.1, 0.01)]
    assert abs(got[1] - area) < abs(got[0] - area) + 1e-9
    assert got[1] == pytest.approx(area, abs=0.02)


def test_mollify_parameter_errors():
    with pytest.raises(ParameterError):
        mollify(affine(), 0.0)
    with pytest.raises(ParameterError):
        mollify(affine(), 2.0)


# ---------------------------------------------------------------- gluing

def test_glue_trivial_cutoffs():
    w = steps([0.25, 0.5, 0.75], [0.25, 0.25, 0.25])
    v = affine()
    assert glue(Cutoff.zero(), w, v) is v
    assert glue(Cutoff.one(), w, v) is w


def test_glue_ramp_matches_pointwise_combination():
    w = steps([0.125 * (j + 0.5) for j in range(8)], [0.125] * 8)
    v = affine()
    eta = Cutoff(rise=(0.4, 0.6))
    res = glue_result(eta, w, v)
    x = GRID[np.min(np.abs(GRID[:, None] - w.breakpoints(0, 1)[None, :]), axis=1) > 1e-6]
    e = eta.value(x)
    assert np.allclose(res.function(x), e * w(x) + (1 - e) * v(x), atol=1e-10)
    assert res.within_bounds


def test_cutoff_validation():
    with pytest.raises(ParameterError):
        Cutoff(rise=(0.6, 0.4))
    with pytest.raises(ParameterError):
        Cutoff(rise=(0.2, 0.6), fall=(0.5, 0.9))
    with pytest.raises(ParameterError):
        Cutoff(level=0.5)


def test_cutoff_is_smooth_and_bounded():
    eta = Cutoff(rise=(0.2, 0.4), fall=(0.6, 0.9))
    x = np.linspace(0, 1, 10001)
    v = eta.value(x)
    assert v.min() >= 0 and v.max() <= 1
    num = np.gradient(v, x)
    assert np.allclose(num, eta.deriv(x), atol=1e-3)


def test_glue_rejects_cantor_parts():
    with pytest.raises(UnsupportedFormError):
        glue(Cutoff(rise=(0.4, 0.6)), cantor(), affine())


# ---------------------------------------------------------------- family

@pytest.fixture(scope="module")
def cantor_family():
    return build_recovery_family(cantor(), 1.0, stages=(1, 2, 4, 8))


def test_cantor_family_certificates(cantor_family):
    fam = cantor_family
    assert fam.limit == pytest.approx(1.0)
    for s in fam.stages:
        assert s.verified
        assert s.decomposition.abs == 0.0 and s.decomposition.cantor == 0.0
        assert s.f_limit_certificate <= 1.0 + 1.0 / s.k + s.f_error
        assert s.lam > s.k
    lams = fam.lambdas
    assert all(a < b for a, b in zip(lams, lams[1:]))
    l1 = [s.l1_gap for s in fam.stages]
    assert all(a >= b for a, b in zip(l1, l1[1:]))


def test_cantor_family_area_gap_matches_oracle(cantor_family):
    u = cantor()
    for s in cantor_family.stages:
        # the staircase only redistributes the jump-free rise of 1
        assert s.area_gap == pytest.approx(abs(area_functional(s.function) - 2.0), abs=1e-9)
        assert s.l1_gap == pytest.approx(l1_grid(s.function, u), abs=2 * 3.0 ** -11)


def test_family_lookup(cantor_family):
    fam = cantor_family
    lams = fam.lambdas
    assert fam.lookup(0.5 * lams[0]) is None
    assert fam.lookup(lams[0]) is fam.stages[0]
    assert fam.lookup(0.5 * (lams[1] + lams[2])) is fam.stages[1]
    assert fam.lookup(10 * lams[-1]) is fam.stages[-1]
    assert fam.function_at(lams[2]) is fam.stages[2].function


def test_family_json_round_trip(cantor_family, tmp_path):
    path = tmp_path / "family.json"
    text = cantor_family.to_json(str(path))
    back = RecoveryFamily.from_json(path.read_text())
    assert json.loads(back.to_json()) == json.loads(text)
    x = np.linspace(0.01, 0.99, 51)
    for a, b in zip(back.stages, cantor_family.stages):
        assert np.allclose(a.function(x), b.function(x))


def test_family_of_line_is_constant():
    fam = build_recovery_family(affine(), 1.0, stages=(1, 2, 4))
    assert fam.limit == pytest.approx(2.0)
    for s in fam.stages:
        assert s.function == affine() and s.verified


def test_family_of_line_plus_cantor():
    fam = build_recovery_family(affine() + cantor(), 1.0, stages=(1, 2, 4))
    assert fam.limit == pytest.approx(3.0)
    for s in fam.stages:
        assert s.verified and abs(s.f_value - 3.0) <= s.f_error + 1.0 / s.k + 1e-2 + 1.0 / s.k


def test_full_family_limit_is_below_pointwise_value():
    fam = build_recovery_family(affine(), 1.0, stages=(1, 2, 4, 8), method="full")
    assert fam.limit == pytest.approx(1.0)
    for s in fam.stages:
        assert s.verified and s.f_limit_certificate <= 1.0 + 1.0 / s.k + s.f_error
        assert s.f_limit_certificate < 2.0


def test_sbv_limit_constants():
    d = variation_decomposition(affine() + step(0.5))
    assert sbv_limit(d, 1.0) == pytest.approx(3.0)
    assert sbv_limit(d, 2.0, n=2) == pytest.approx(4 / 2 + 4 / 3)


def test_family_rejects_unknown_method():
    with pytest.raises(ParameterError):
        build_recovery_family(cantor(), 1.0, stages=(1,), method="other")
