import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import dblquad, quad

from bvlab.errors import ParameterError
from bvlab.kernel import Cell, KernelParams, nu_gamma_band, nu_gamma_cell, second_antiderivative

coord = st.floats(-3, 3, allow_nan=False)
gammas = st.sampled_from([0.3, 0.5, 1.0, 1.7, 2.5])


def _cell(draw_a, draw_b, draw_c, draw_d):
    a, b = sorted((draw_a, draw_b))
    c, d = sorted((draw_c, draw_d))
    return a, b, c, d


def inner_integral(x, c, d, gamma):
    """Integral of |x - y|**(gamma - 1) over y in [c, d], by hand."""
    def prim(s):
        # antiderivative of |s|**(gamma - 1) that is odd in s
        return np.sign(s) * np.abs(s) ** gamma / gamma
    return prim(x - c) - prim(x - d)


def mc_cell(cell, gamma, n, rng):
    """Sample x only; the y integral is exact, so the variance stays finite."""
    a, b, c, d = cell
    x = rng.uniform(a, b, n)
    h = (b - a) * inner_integral(x, c, d, gamma)
    return h.mean(), h.std(ddof=1) / np.sqrt(n)


def test_second_antiderivative_examples():
    assert second_antiderivative(0.0, 0.7) == 0.0
    assert second_antiderivative(1.0, 1.0) == 0.5
    assert second_antiderivative(-2.0, 2.0) == pytest.approx(8 / 6, rel=1e-14)


@pytest.mark.parametrize("gamma", [0.3, 1.0, 2.0, 3.5])
@pytest.mark.parametrize("t", [-2.0, -0.4, 0.7, 1.5])
def test_second_antiderivative_curvature(gamma, t):
    h = 1e-3
    G = lambda s: second_antiderivative(s, gamma)
    d2 = (G(t + h) - 2 * G(t) + G(t - h)) / h ** 2
    assert d2 == pytest.approx(abs(t) ** (gamma - 1), rel=1e-5)


def test_second_antiderivative_rejects_bad_gamma():
    for g in (0.0, -1.0, float("nan")):
        with pytest.raises(ParameterError):
            second_antiderivative(1.0, g)


def test_cell_examples():
    assert nu_gamma_cell(Cell((0.0, 1.0), (0.0, 1.0)), 1.0) == pytest.approx(1.0, abs=1e-15)
    assert nu_gamma_cell(Cell((0.0, 1.0), (0.0, 1.0)), 2.0) == pytest.approx(1 / 3, rel=1e-14)
    assert nu_gamma_cell(Cell((0.0, 0.0), (0.2, 0.9)), 0.5) == 0.0


def test_unit_square_gamma_two_against_monte_carlo():
    rng = np.random.default_rng(11)
    x, y = rng.random((2, 1_000_000))
    f = np.abs(x - y)
    mean, se = f.mean(), f.std() / 1e3
    assert abs(nu_gamma_cell((0.0, 1.0, 0.0, 1.0), 2.0) - mean) <= 3 * se


def test_cell_errors():
    with pytest.raises(ParameterError):
        Cell((1.0, 0.0), (0.0, 1.0))
    with pytest.raises(ParameterError):
        nu_gamma_cell((0, 1, 0, 1), 0.0)
    with pytest.raises(ParameterError):
        nu_gamma_cell((0, 1, 0, 1))
    with pytest.raises(ParameterError):
        KernelParams(-0.5)


@given(coord, coord, coord, coord, gammas)
def test_symmetry(a, b, c, d, gamma):
    a, b, c, d = _cell(a, b, c, d)
    assert nu_gamma_cell((a, b, c, d), gamma) == pytest.approx(
        nu_gamma_cell((c, d, a, b), gamma), rel=1e-12, abs=1e-12)


@given(coord, coord, coord, coord, st.floats(0, 1), st.booleans(), gammas)
def test_additivity(a, b, c, d, frac, along_x, gamma):
    a, b, c, d = _cell(a, b, c, d)
    whole = nu_gamma_cell((a, b, c, d), gamma)
    if along_x:
        m = a + frac * (b - a)
        parts = nu_gamma_cell((a, m, c, d), gamma) + nu_gamma_cell((m, b, c, d), gamma)
    else:
        m = c + frac * (d - c)
        parts = nu_gamma_cell((a, b, c, m), gamma) + nu_gamma_cell((a, b, m, d), gamma)
    assert parts == pytest.approx(whole, rel=1e-12, abs=1e-12)


@given(coord, coord, coord, coord, st.floats(-5, 5), gammas)
def test_translation(a, b, c, d, s, gamma):
    a, b, c, d = _cell(a, b, c, d)
    assert nu_gamma_cell((a + s, b + s, c + s, d + s), gamma) == pytest.approx(
        nu_gamma_cell((a, b, c, d), gamma), rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("gamma", [0.3, 1.0, 2.5])
def test_random_cells_against_monte_carlo(gamma):
    rng = np.random.default_rng(int(gamma * 1000))
    failures = 0
    for _ in range(100):
        a, b, c, d = _cell(*rng.uniform(-1, 1, 4))
        est, se = mc_cell((a, b, c, d), gamma, 20_000, rng)
        exact = nu_gamma_cell((a, b, c, d), gamma)
        failures += abs(est - exact) > 3 * se + 1e-12
    # about 0.3 of 100 cells may land outside 3 standard errors by chance
    assert failures <= 3


@pytest.mark.parametrize("cell,gamma", [
    ((0.0, 0.4, 0.1, 0.9), 0.5),
    ((-1.0, 0.3, 0.5, 0.6), 1.5),
    ((0.2, 0.3, 0.25, 0.26), 0.3),
])
def test_cells_against_scipy(cell, gamma):
    a, b, c, d = cell
    if gamma >= 1:
        ref = dblquad(lambda y, x: abs(x - y) ** (gamma - 1), a, b, c, d, epsabs=1e-12)[0]
    else:
        # singular integrand: integrate y by hand, x with scipy
        ref = quad(lambda x: inner_integral(x, c, d, gamma), a, b, points=[c, d],
                   epsabs=1e-13, limit=200)[0]
    assert nu_gamma_cell(cell, gamma) == pytest.approx(ref, rel=1e-8)


def test_far_cell_guard_avoids_cancellation():
    # tiny cell far from the diagonal: kernel is nearly constant on it
    a, b, c, d = 1e3, 1e3 + 1e-6, 0.0, 1e-6
    for gamma in (0.5, 1.5, 3.0):
        midpoint = 1e-12 * (1e3) ** (gamma - 1)
        assert nu_gamma_cell((a, b, c, d), gamma) == pytest.approx(midpoint, rel=1e-8)


@given(coord, coord, coord, coord, gammas)
def test_band_without_limits_is_the_cell(a, b, c, d, gamma):
    a, b, c, d = _cell(a, b, c, d)
    assert nu_gamma_band(a, b, c, d, gamma) == pytest.approx(
        nu_gamma_cell((a, b, c, d), gamma), rel=1e-10, abs=1e-12)


@given(coord, coord, coord, coord, st.floats(0, 2), st.floats(0, 2), gammas)
def test_band_splits_additively(a, b, c, d, s, w, gamma):
    a, b, c, d = _cell(a, b, c, d)
    whole = nu_gamma_band(a, b, c, d, gamma)
    parts = (nu_gamma_band(a, b, c, d, gamma, 0.0, s)
             + nu_gamma_band(a, b, c, d, gamma, s, s + w)
             + nu_gamma_band(a, b, c, d, gamma, s + w, np.inf))
    assert parts == pytest.approx(whole, rel=1e-10, abs=1e-12)


def test_vectorized_cells():
    cells = np.array([[0, 1, 0, 1], [0, 0.5, 0.5, 1], [2, 3, 0, 1]], float)
    out = nu_gamma_cell(cells, 1.5)
    assert out.shape == (3,)
    assert np.allclose(out, [nu_gamma_cell(tuple(c), 1.5) for c in cells], rtol=1e-14)
