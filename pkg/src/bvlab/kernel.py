"""Integrals of the kernel |x - y|**(gamma - 1) over axis-aligned cells.

``nu_gamma_cell`` is the measure of a rectangle; ``nu_gamma_band`` restricts
it to pairs whose distance lies in a band (s1, s2), which is what the
evaluator accumulates. Both accept numpy arrays and broadcast.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .quadrature import gauss_legendre

# a cell counts as far from the diagonal once its gap exceeds this many sizes
FAR_RATIO = 10.0
_GL_ORDER = 8


@dataclass(frozen=True)
class KernelParams:
    gamma: float
    n: int = 1

    def __post_init__(self):
        check_gamma(self.gamma)
        if self.n not in (1, 2):
            raise ParameterError("only n = 1 and n = 2 are supported")


@dataclass(frozen=True)
class Cell:
    x_range: tuple
    y_range: tuple

    def __post_init__(self):
        (a, b), (c, d) = self.x_range, self.y_range
        if a > b or c > d:
            raise ParameterError("cell ranges must satisfy lo <= hi")

    @property
    def bounds(self):
        return (*self.x_range, *self.y_range)


def check_gamma(gamma):
    if not np.all(np.asarray(gamma) > 0) or not np.all(np.isfinite(gamma)):
        raise ParameterError(f"gamma must be positive and finite, got {gamma!r}")


def second_antiderivative(t, gamma):
    """G(t) = |t|**(gamma + 1) / (gamma (gamma + 1)), so G'' = |t|**(gamma - 1).

    >>> second_antiderivative(1.0, 1.0)
    0.5
    """
    check_gamma(gamma)
    at = np.abs(np.asarray(t, float))
    out = np.where(at > 0, at ** (gamma + 1.0), 0.0) / (gamma * (gamma + 1.0))
    return float(out) if out.ndim == 0 else out


def _power_moment(alpha, beta, lo, hi, gamma):
    """Integral of (alpha + beta t) t**(gamma - 1) over [lo, hi], 0 <= lo <= hi."""
    width = hi - lo
    far = lo > 4.0 * width
    g = gamma
    with np.errstate(divide="ignore", invalid="ignore"):
        closed = (alpha * (hi ** g - lo ** g) / g
                  + beta * (hi ** (g + 1) - lo ** (g + 1)) / (g + 1))
    out = np.where(width > 0, closed, 0.0)
    if np.any(far & (width > 0)):
        sel = far & (width > 0)
        x, w = gauss_legendre(_GL_ORDER)
        l = lo[sel][:, None]
        h = width[sel][:, None]
        t = l + h * x
        gs = g[sel][:, None] if np.ndim(g) else g
        f = (alpha[sel][:, None] + beta[sel][:, None] * t) * t ** (gs - 1.0)
        out[sel] = (f * w).sum(axis=1) * h[:, 0]
    return out


def _broadcast(*arrays):
    return [np.asarray(v, float) for v in np.broadcast_arrays(*arrays)]


def nu_gamma_band(a, b, c, d, gamma, s1=0.0, s2=np.inf):
    """nu_gamma of {(x, y) in [a,b] x [c,d] : s1 < |x - y| < s2}.

    The pair density of t = x - y over the cell is a trapezoid; each of its
    three linear segments is integrated against |t|**(gamma - 1) in closed
    form, or with Gauss-Legendre when the segment is far from t = 0.
    """
    check_gamma(gamma)
    a, b, c, d, s1, s2, g = _broadcast(a, b, c, d, s1, s2, gamma)
    shape = a.shape
    a, b, c, d, s1, s2, g = (v.ravel() for v in (a, b, c, d, s1, s2, g))
    s1 = np.maximum(s1, 0.0)
    wx, wy = b - a, d - c
    top = np.minimum(wx, wy)
    t0 = a - d
    t1 = np.minimum(a - c, b - d)
    t2 = np.maximum(a - c, b - d)
    t3 = b - c
    total = np.zeros(a.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        rise = np.where(t1 > t0, top / (t1 - t0), 0.0)
    # (start, end, value at start, slope) of each trapezoid segment
    segments = ((t0, t1, np.zeros_like(top), rise),
                (t1, t2, top, np.zeros_like(top)),
                (t2, t3, top, -rise))
    for p, q, phi_p, slope in segments:
        # t > 0 part
        lo = np.clip(np.maximum(p, s1), 0.0, None)
        hi = np.minimum(q, s2)
        ok = hi > lo
        if ok.any():
            alpha = phi_p - slope * p
            total[ok] += _power_moment(alpha[ok], slope[ok], lo[ok], hi[ok], g[ok])
        # t < 0 part, written in t' = -t
        lo = np.clip(np.maximum(-q, s1), 0.0, None)
        hi = np.minimum(-p, s2)
        ok = hi > lo
        if ok.any():
            # phi(t) = phi_p + slope (t - p) = (phi_p - slope p) - slope t'
            alpha = phi_p - slope * p
            total[ok] += _power_moment(alpha[ok], -slope[ok], lo[ok], hi[ok], g[ok])
    total = np.maximum(total, 0.0)
    return total.reshape(shape) if shape else float(total[0])


def nu_gamma_cell(cell, gamma=None):
    """nu_gamma of a rectangle via the four-term second-antiderivative formula.

    `cell` is a :class:`Cell`, a tuple (a, b, c, d), or a (..., 4) array.
    Cells far from the diagonal are routed through the band integral to
    avoid cancellation between the four terms.

    >>> nu_gamma_cell(Cell((0.0, 1.0), (0.0, 1.0)), 2.0)  # doctest: +ELLIPSIS
    0.333333333333...
    """
    if gamma is None:
        raise ParameterError("gamma is required")
    check_gamma(gamma)
    if isinstance(cell, Cell):
        cell = cell.bounds
    arr = np.asarray(cell, float)
    a, b, c, d = (arr[..., k] for k in range(4))
    G = second_antiderivative
    four = G(b - c, gamma) - G(a - c, gamma) - G(b - d, gamma) + G(a - d, gamma)
    four = np.asarray(four, float)
    size = np.maximum(b - a, d - c)
    gap = np.maximum(np.maximum(c - b, a - d), 0.0)
    far = gap > FAR_RATIO * size
    if np.any(far):
        four = np.where(far, nu_gamma_band(a, b, c, d, gamma), four)
    four = np.where((b > a) & (d > c), np.maximum(four, 0.0), 0.0)
    return float(four) if four.ndim == 0 else four
