import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad as scipy_quad

from bvlab import bvcalc
from bvlab.bvcalc import total_variation, variation_decomposition
from bvlab.errors import ParameterError, UnsupportedFormError
from bvlab.slicer import (CSV_COLUMNS_2D, Constant2D, ConvexPolygon, Disk, Indicator, Radial,
                          Ridge, SliceQuadrature, c_n, c_n_mc, cantor_sheet, disk_indicator,
                          f_eval_2d, f_eval_mc_2d, linear_ridge, sweep_2d, sweep_2d_csv,
                          unit_square, variation_by_slicing, variation_decomposition_2d)


def test_c_n_values():
    assert c_n(1) == 2.0
    assert c_n(2) == pytest.approx(4.0, rel=1e-15)
    assert c_n(3) == pytest.approx(2 * math.pi, rel=1e-15)


def test_c_2_against_angle_integral():
    ref = scipy_quad(lambda t: abs(math.cos(t)), 0, 2 * math.pi, points=[math.pi / 2,
                                                                       3 * math.pi / 2])[0]
    assert c_n(2) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_c_n_against_sphere_monte_carlo(n):
    est, se = c_n_mc(n, 1_000_000, seed=n)
    assert abs(est - c_n(n)) <= 3 * se


@pytest.mark.parametrize("n", [0, -1, 1.5])
def test_c_n_rejects_bad_dimension(n):
    with pytest.raises(ParameterError):
        c_n(n)


# ------------------------------------------------------------------ slices

def test_disk_slice_examples():
    u = disk_indicator(0.3)
    s, W = u.slice((1.0, 0.0), 0.0)
    assert W.intervals[0] == pytest.approx((-1.0, 1.0))
    assert list(s.jump_locations) == pytest.approx([-0.3, 0.3])
    assert list(s.jump_heights) == pytest.approx([1.0, -1.0])
    s, W = u.slice((1.0, 0.0), 0.5)
    assert total_variation(s, W) == 0.0 and s(0.0) == 0.0


def test_cantor_sheet_slice_across_axis_is_constant():
    u = cantor_sheet(1.0, (1.0, 0.0))
    for z in (-0.3, -0.7, -0.95):
        # sigma = (0, 1): the slice runs along x = -z
        s, W = u.slice((0.0, 1.0), z)
        assert total_variation(s, W) == pytest.approx(0.0, abs=1e-14)
    s, W = u.slice((1.0, 0.0), 0.5)
    d = variation_decomposition(s, W)
    assert (d.abs, d.jump, d.cantor) == pytest.approx((0.0, 0.0, 1.0), abs=1e-12)


def _forms():
    sq = unit_square()
    return [
        disk_indicator(0.3, (0.1, -0.2)),
        cantor_sheet(0.8, (1.0, 1.0)),
        Ridge(bvcalc.sum_of(bvcalc.poly([0, 1, -1], domain=((-3, 3),)),
                            bvcalc.step(0.4, 0.5, ((-3, 3),))), (0.6, 0.8), sq),
        Indicator(ConvexPolygon([(0.2, 0.2), (0.8, 0.3), (0.5, 0.9)]), 2.0, sq),
        Radial(bvcalc.steps([0.2, 0.35], [1.0, -0.5], ((0, 5),)), (0.5, 0.5), sq),
        linear_ridge(1.0, (1.0, 0.0)) + disk_indicator(0.2, (0.5, 0.5), domain=sq),
    ]


@pytest.mark.parametrize("u", _forms())
@given(theta=st.floats(0, math.pi), frac=st.floats(0.01, 0.99))
def test_slice_agrees_with_pointwise_values(u, theta, frac):
    lo, hi = u.domain.offset_range(theta)
    z = lo + frac * (hi - lo)
    s, W = u.slice_at(theta, z)
    if W is None:
        return
    sigma = np.array([math.cos(theta), math.sin(theta)])
    perp = np.array([-sigma[1], sigma[0]])
    a, b = W.intervals[0]
    t = np.linspace(a, b, 23)[1:-1]
    t = t[np.min(np.abs(t[:, None] - s.breakpoints(a, b)[None, :]), axis=1, initial=1.0) > 1e-9]
    pts = z * perp + t[:, None] * sigma
    assert np.allclose(s(t), u(pts), atol=1e-12)


def test_slice_of_constant_is_zero_functional():
    u = Constant2D(3.0, unit_square())
    est = f_eval_2d(u, 1.0, 100.0, SliceQuadrature(n_directions=8))
    assert est.value == 0.0


# ---------------------------------------------------------- decompositions

def test_exact_decompositions():
    d = variation_decomposition_2d(disk_indicator(0.3))
    assert d.jump == pytest.approx(2 * math.pi * 0.3, rel=1e-14)
    d = variation_decomposition_2d(cantor_sheet(1.0))
    assert (d.abs, d.jump, d.cantor) == pytest.approx((0.0, 0.0, 1.0), abs=1e-9)
    d = variation_decomposition_2d(linear_ridge(1.0))
    assert (d.abs, d.jump, d.cantor) == pytest.approx((1.0, 0.0, 0.0), abs=1e-9)


@pytest.mark.parametrize("u", [
    disk_indicator(0.3),
    Indicator(ConvexPolygon.rectangle(0.2, 0.7, 0.1, 0.4), 1.5, unit_square()),
    Radial(bvcalc.steps([0.2, 0.35], [1.0, -0.5], ((0, 5),)), (0.5, 0.5), unit_square()),
    linear_ridge(2.0, (3.0, 4.0)),
])
def test_slicing_agrees_with_exact_variation(u):
    exact = u.decomposition()
    sliced = variation_by_slicing(u, SliceQuadrature(n_directions=32, tol=1e-6))
    for part in ("abs", "jump", "cantor"):
        assert getattr(sliced, part) == pytest.approx(getattr(exact, part), rel=2e-3, abs=1e-9)


def test_polygon_perimeter_is_the_jump_mass():
    tri = ConvexPolygon([(0.2, 0.2), (0.8, 0.3), (0.5, 0.9)])
    side = lambda p, q: math.dist(p, q)
    per = side((0.2, 0.2), (0.8, 0.3)) + side((0.8, 0.3), (0.5, 0.9)) + side((0.5, 0.9),
                                                                             (0.2, 0.2))
    d = Indicator(tri, 2.0, unit_square()).decomposition()
    assert d.jump == pytest.approx(2.0 * per, rel=1e-14)


def test_radial_rejects_smooth_profiles():
    with pytest.raises(UnsupportedFormError):
        Radial(bvcalc.affine(domain=((0, 5),)), (0, 0), unit_square())


def test_region_validation():
    with pytest.raises(Exception):
        Disk((0, 0), -1.0)
    with pytest.raises(ParameterError):
        SliceQuadrature(n_directions=2)
    with pytest.raises(ParameterError):
        SliceQuadrature(tol=0.0)


# -------------------------------------------------------------- functional

def test_linear_ridge_near_limit():
    est = f_eval_2d(linear_ridge(1.0), 1.0, 1e4, SliceQuadrature(n_directions=32))
    assert est.value == pytest.approx(4.0, rel=5e-2)
    assert est.value <= 4.0 + est.error_bound


def test_disk_against_direct_monte_carlo():
    u = disk_indicator(0.3)
    est = f_eval_2d(u, 1.0, 100.0, SliceQuadrature(n_directions=16))
    mean, se = f_eval_mc_2d(u, 1.0, 100.0, samples=4_000_000, seed=17)
    assert abs(est.value - mean) <= 3 * se + est.error_bound


def test_rotating_function_and_grid_together():
    u = Ridge(bvcalc.sum_of(bvcalc.affine(1.0, 0.0, ((-3, 3),)), bvcalc.step(0.5, 0.5, ((-3, 3),))),
              (1.0, 0.0), unit_square())
    q = SliceQuadrature(n_directions=8)
    a = f_eval_2d(u, 1.0, 50.0, q)
    b = f_eval_2d(u.rotated(0.7), 1.0, 50.0, SliceQuadrature(n_directions=8, angle_offset=0.7))
    # same directions relative to u; only the adaptive offset nodes differ
    assert abs(b.value - a.value) <= a.error_bound + b.error_bound
    assert abs(b.angular_error - a.angular_error) <= 1e-3


def test_rotation_invariance_within_error_bounds():
    u = disk_indicator(0.25, (0.2, 0.1))
    q = SliceQuadrature(n_directions=16)
    a = f_eval_2d(u, 1.0, 100.0, q)
    b = f_eval_2d(u.rotated(1.1), 1.0, 100.0, q)
    assert abs(a.value - b.value) <= a.error_bound + b.error_bound


def test_mc_2d_parameter_errors():
    with pytest.raises(ParameterError):
        f_eval_mc_2d(disk_indicator(), 1.0, 10.0, samples=0)
    with pytest.raises(ParameterError):
        f_eval_2d(disk_indicator(), 0.0, 10.0)
    assert f_eval_mc_2d(Constant2D(1.0, unit_square()), 1.0, 10.0, samples=10) == (0.0, 0.0)


def test_sweep_2d_csv():
    rows = sweep_2d(disk_indicator(0.3), 1.0, [10.0, 20.0], SliceQuadrature(n_directions=4,
                                                                             tol=1e-2))
    text = sweep_2d_csv(rows, timing=False)
    table = list(csv.reader(io.StringIO(text)))
    assert tuple(table[0]) == CSV_COLUMNS_2D
    assert len(table) == 3 and table[1][3] == "4" and table[1][-1] == "0.000"
