"""Closed catalog of smooth piece forms with exact range enclosures.

Every form is vectorized over query points / query intervals and supplies

* ``value(x)`` and ``deriv(x)``,
* ``range(a, b)`` / ``deriv_range(a, b)``: tight enclosures of the image of
  [a, b] (exact up to round-off: candidates are endpoints plus critical
  points),
* ``variation(a, b)``: the exact total variation on [a, b].

Affine maps, polynomials and splines all share the piecewise-polynomial
engine :class:`PPolyForm`; the scaled sine is separate.
"""

import numpy as np
from scipy.interpolate import PchipInterpolator

from ..errors import DomainError

def _horner(coef, s):
    """Evaluate columns of `coef` (highest power first) at local coords `s`."""
    out = np.zeros_like(s, dtype=float)
    for row in coef:
        out = out * s + row
    return out


def _real_roots_in(coef, h):
    """Real roots in the open interval (0, h_i) of each column polynomial.

    Returns an (m, d) array padded with NaN, d the column degree.
    """
    deg = coef.shape[0] - 1
    m = coef.shape[1]
    if deg <= 0:
        return np.empty((m, 0))
    out = np.full((m, deg), np.nan)
    if deg == 1:
        a, b = coef
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(a != 0, -b / a, np.nan)
        out[:, 0] = r
    elif deg == 2:
        a, b, c = coef
        with np.errstate(divide="ignore", invalid="ignore"):
            disc = b * b - 4 * a * c
            sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
            # numerically stable pair
            q = -0.5 * (b + np.copysign(sq, b))
            r1 = np.where(a != 0, q / a, np.where(b != 0, -c / b, np.nan))
            r2 = np.where((a != 0) & (q != 0), c / q, np.nan)
        out[:, 0] = r1
        out[:, 1] = r2
    else:
        for i in range(m):
            col = np.trim_zeros(coef[:, i], "f")
            if col.size <= 1:
                continue
            rts = np.roots(col)
            rts = rts[np.abs(rts.imag) <= 1e-12 * (1 + np.abs(rts.real))].real
            out[i, : rts.size] = rts
    bad = ~((out > 0) & (out < h[:, None]))
    out[bad] = np.nan
    return out


def _compose_affine(coef, offset, scale):
    """Coefficients of v -> p(offset + scale * v) for each column polynomial p."""
    deg = coef.shape[0] - 1
    low = coef[::-1]  # low[k] multiplies u**k
    out = np.zeros_like(low)
    from math import comb
    for k in range(deg + 1):
        for j in range(k + 1):
            out[j] = out[j] + low[k] * comb(k, j) * offset ** (k - j) * scale ** j
    return out[::-1].copy()


def _deriv_coef(coef):
    deg = coef.shape[0] - 1
    if deg == 0:
        return np.zeros((1, coef.shape[1]))
    powers = np.arange(deg, 0, -1, dtype=float)[:, None]
    return coef[:-1] * powers


class _SparseTable:
    """O(1) range-min/max over contiguous segment index ranges."""

    def __init__(self, lo, hi):
        self.lo = [np.asarray(lo, float)]
        self.hi = [np.asarray(hi, float)]
        k = 1
        while 2 * k <= len(lo):
            plo, phi = self.lo[-1], self.hi[-1]
            self.lo.append(np.minimum(plo[:-k], plo[k:]))
            self.hi.append(np.maximum(phi[:-k], phi[k:]))
            k *= 2

    def query(self, i, j):
        """min/max over segments i..j inclusive (requires i <= j)."""
        n = j - i + 1
        lev = np.floor(np.log2(np.maximum(n, 1))).astype(int)
        lo = np.empty(i.shape)
        hi = np.empty(i.shape)
        for L in np.unique(lev):
            sel = lev == L
            w = 1 << int(L)
            ii, jj = i[sel], j[sel] - w + 1
            lo[sel] = np.minimum(self.lo[L][ii], self.lo[L][jj])
            hi[sel] = np.maximum(self.hi[L][ii], self.hi[L][jj])
        return lo, hi


class _PPolyCore:
    """Range machinery for one piecewise polynomial (no derivative tables)."""

    def __init__(self, x, c):
        self.x = x
        self.c = c
        self.h = np.diff(x)
        self.crit = _real_roots_in(_deriv_coef(c), self.h)
        m = self.h.size
        lo = np.minimum(c[-1], _horner(c, self.h))
        hi = np.maximum(c[-1], _horner(c, self.h))
        for k in range(self.crit.shape[1]):
            s = self.crit[:, k]
            ok = ~np.isnan(s)
            v = _horner(c[:, ok], s[ok])
            lo[ok] = np.minimum(lo[ok], v)
            hi[ok] = np.maximum(hi[ok], v)
        self.seg_lo, self.seg_hi = lo, hi
        self.table = _SparseTable(lo, hi) if m > 2 else None

    def seg_index(self, x):
        return np.clip(np.searchsorted(self.x, x, side="right") - 1, 0, self.h.size - 1)

    def value(self, x):
        x = np.asarray(x, float)
        i = self.seg_index(x)
        return _horner(self.c[:, i], x - self.x[i])

    def _partial(self, i, s0, s1):
        c = self.c[:, i]
        v0 = _horner(c, s0)
        v1 = _horner(c, s1)
        lo, hi = np.minimum(v0, v1), np.maximum(v0, v1)
        for k in range(self.crit.shape[1]):
            s = self.crit[i, k]
            ok = (s > s0) & (s < s1)
            if ok.any():
                v = _horner(c[:, ok], s[ok])
                lo[ok] = np.minimum(lo[ok], v)
                hi[ok] = np.maximum(hi[ok], v)
        return lo, hi

    def range(self, a, b):
        a = np.atleast_1d(np.asarray(a, float))
        b = np.atleast_1d(np.asarray(b, float))
        ia = self.seg_index(a)
        ib = np.clip(np.searchsorted(self.x, b, side="left") - 1, 0, self.h.size - 1)
        ib = np.maximum(ib, ia)
        same = ia == ib
        lo = np.empty(a.shape)
        hi = np.empty(a.shape)
        if same.any():
            i = ia[same]
            lo[same], hi[same] = self._partial(i, a[same] - self.x[i], b[same] - self.x[i])
        d = ~same
        if d.any():
            i0, i1 = ia[d], ib[d]
            l0, h0 = self._partial(i0, a[d] - self.x[i0], self.h[i0])
            l1, h1 = self._partial(i1, np.zeros(i1.shape), b[d] - self.x[i1])
            lo_d, hi_d = np.minimum(l0, l1), np.maximum(h0, h1)
            mid = i1 - i0 >= 2
            if mid.any():
                ml, mh = self._mid_range(i0[mid] + 1, i1[mid] - 1)
                lo_d[mid] = np.minimum(lo_d[mid], ml)
                hi_d[mid] = np.maximum(hi_d[mid], mh)
            lo[d], hi[d] = lo_d, hi_d
        return lo, hi

    def _mid_range(self, i, j):
        if self.table is not None:
            return self.table.query(i, j)
        lo = np.array([self.seg_lo[p : q + 1].min() for p, q in zip(i, j)])
        hi = np.array([self.seg_hi[p : q + 1].max() for p, q in zip(i, j)])
        return lo, hi


class PPolyForm:
    """Piecewise polynomial on knots `x` with scipy-layout coefficients `c`.

    ``c[k, i]`` multiplies ``(t - x[i]) ** (deg - k)`` on segment i.
    Affine maps and polynomials are the one-segment special case.
    """

    kind = "spline"

    def __init__(self, x, c, meta=None):
        x = np.asarray(x, dtype=float)
        c = np.atleast_2d(np.asarray(c, dtype=float))
        if c.ndim != 2 or c.shape[1] != x.size - 1:
            raise ValueError("coefficient array does not match the knot vector")
        if np.any(np.diff(x) <= 0):
            raise ValueError("knots must be strictly increasing")
        self.meta = meta
        self._f = _PPolyCore(x, c)
        self._df = _PPolyCore(x, _deriv_coef(c))
        dcrit = self._f.crit
        # exact variation per segment: sum of |increments| between critical points
        seg_var = np.zeros(x.size - 1)
        pts = np.concatenate([np.zeros((x.size - 1, 1)), np.sort(dcrit, axis=1),
                              self._f.h[:, None]], axis=1)
        prev = _horner(c, pts[:, 0])
        for k in range(1, pts.shape[1]):
            s = pts[:, k]
            ok = ~np.isnan(s)
            v = np.where(ok, _horner(c, np.where(ok, s, 0.0)), prev)
            seg_var += np.abs(v - prev)
            prev = v
        self._cum_var = np.concatenate([[0.0], np.cumsum(seg_var)])

    @property
    def support(self):
        return float(self._f.x[0]), float(self._f.x[-1])

    @property
    def knots(self):
        return self._f.x

    @property
    def coefficients(self):
        return self._f.c

    @property
    def degree(self):
        return self._f.c.shape[0] - 1

    def value(self, x):
        return self._f.value(x)

    def deriv(self, x):
        return self._df.value(x)

    def range(self, a, b):
        return self._f.range(a, b)

    def deriv_range(self, a, b):
        return self._df.range(a, b)

    def _variation_from_left(self, x):
        """Exact variation on [x_0, x]."""
        f = self._f
        i = f.seg_index(x)
        s1 = x - f.x[i]
        c = f.c[:, i]
        crit = np.sort(f.crit[i], axis=1)
        prev = c[-1].copy()
        acc = np.zeros(x.shape)
        for k in range(crit.shape[1]):
            s = crit[:, k]
            ok = s < s1
            v = np.where(ok, _horner(c, np.where(ok, s, 0.0)), prev)
            acc += np.abs(v - prev)
            prev = v
        acc += np.abs(_horner(c, s1) - prev)
        return self._cum_var[i] + acc

    def variation(self, a, b):
        a = np.atleast_1d(np.asarray(a, float))
        b = np.atleast_1d(np.asarray(b, float))
        return self._variation_from_left(b) - self._variation_from_left(a)

    def integral(self, a, b):
        """Exact integral over [a, b] (inside the support)."""
        if not hasattr(self, "_ic"):
            c = self._f.c
            deg = c.shape[0] - 1
            powers = np.arange(deg + 1, 0, -1, dtype=float)[:, None]
            self._ic = np.vstack([c / powers, np.zeros((1, c.shape[1]))])
            self._cum_int = np.concatenate([[0.0], np.cumsum(_horner(self._ic, self._f.h))])

        def prim(x):
            x = np.atleast_1d(np.asarray(x, float))
            i = self._f.seg_index(x)
            return self._cum_int[i] + _horner(self._ic[:, i], x - self._f.x[i])

        return prim(b) - prim(a)

    def scaled(self, factor):
        return PPolyForm(self._f.x, self._f.c * factor)

    def reparam(self, scale, shift):
        """Form of t -> f(scale * t + shift) on the preimage support."""
        x, c = self._f.x, self._f.c
        scale = float(scale)
        if scale == 0:
            raise ValueError("scale must be nonzero")
        if scale > 0:
            return PPolyForm((x - shift) / scale, _compose_affine(c, np.zeros(c.shape[1]), scale))
        # reversed orientation: new left end is the old right end of each segment
        newc = _compose_affine(c, np.diff(x), scale)[:, ::-1]
        return PPolyForm(((x - shift) / scale)[::-1], newc)

    def to_dict(self):
        if self.meta is not None:
            return dict(self.meta)
        return {"kind": "spline", "knots": self._f.x.tolist(), "coefficients": self._f.c.tolist()}


def affine_form(slope, support, intercept=0.0):
    a, b = map(float, support)
    c = np.array([[float(slope)], [float(slope) * a + float(intercept)]])
    form = PPolyForm([a, b], c)
    form.kind = "affine"
    form.meta = {"kind": "affine", "slope": float(slope), "intercept": float(intercept)}
    return form


def poly_form(coefficients, support):
    """Polynomial with coefficients in increasing powers of the global variable."""
    a, b = map(float, support)
    coefficients = [float(v) for v in coefficients]
    p = np.polynomial.Polynomial(coefficients)
    # Taylor-shift to local variable t - a
    shifted = p(np.polynomial.Polynomial([a, 1.0]))
    local = np.zeros(max(len(coefficients), 1))
    local[: shifted.coef.size] = shifted.coef
    form = PPolyForm([a, b], local[::-1][:, None])
    form.kind = "poly"
    form.meta = {"kind": "poly", "coefficients": coefficients}
    return form


def spline_form(knots, values):
    """Monotonicity-preserving cubic (PCHIP) interpolant of samples."""
    knots = np.asarray(knots, float)
    values = np.asarray(values, float)
    pch = PchipInterpolator(knots, values)
    form = PPolyForm(pch.x, pch.c)
    form.meta = {"kind": "spline", "knots": knots.tolist(), "values": values.tolist()}
    return form


class SineForm:
    """amplitude * sin(frequency * x + phase)."""

    kind = "sine"

    def __init__(self, amplitude, frequency, phase):
        self.amplitude = float(amplitude)
        self.frequency = float(frequency)
        self.phase = float(phase)

    def value(self, x):
        return self.amplitude * np.sin(self.frequency * np.asarray(x, float) + self.phase)

    def deriv(self, x):
        return self.amplitude * self.frequency * np.cos(self.frequency * np.asarray(x, float) + self.phase)

    @staticmethod
    def _sin_range(t0, t1):
        """Range of sin on [t0, t1] (t0 <= t1)."""
        v0, v1 = np.sin(t0), np.sin(t1)
        lo, hi = np.minimum(v0, v1), np.maximum(v0, v1)
        # maxima at pi/2 + 2 pi k, minima at -pi/2 + 2 pi k
        kmax = np.ceil((t0 - np.pi / 2) / (2 * np.pi))
        hi = np.where(np.pi / 2 + 2 * np.pi * kmax <= t1, 1.0, hi)
        kmin = np.ceil((t0 + np.pi / 2) / (2 * np.pi))
        lo = np.where(-np.pi / 2 + 2 * np.pi * kmin <= t1, -1.0, lo)
        return lo, hi

    def _phase_interval(self, a, b):
        t0 = self.frequency * np.asarray(a, float) + self.phase
        t1 = self.frequency * np.asarray(b, float) + self.phase
        return np.minimum(t0, t1), np.maximum(t0, t1)

    def range(self, a, b):
        t0, t1 = self._phase_interval(a, b)
        lo, hi = self._sin_range(t0, t1)
        A = self.amplitude
        return (A * lo, A * hi) if A >= 0 else (A * hi, A * lo)

    def deriv_range(self, a, b):
        t0, t1 = self._phase_interval(a, b)
        lo, hi = self._sin_range(t0 + np.pi / 2, t1 + np.pi / 2)
        k = self.amplitude * self.frequency
        return (k * lo, k * hi) if k >= 0 else (k * hi, k * lo)

    def variation(self, a, b):
        a = np.atleast_1d(np.asarray(a, float))
        b = np.atleast_1d(np.asarray(b, float))
        t0, t1 = self._phase_interval(a, b)
        # extrema of sin at pi/2 + pi k
        k0 = np.ceil((t0 - np.pi / 2) / np.pi)
        k1 = np.floor((t1 - np.pi / 2) / np.pi)
        n = np.maximum(k1 - k0 + 1, 0)
        e0 = np.pi / 2 + np.pi * k0
        e1 = np.pi / 2 + np.pi * k1
        direct = np.abs(np.sin(t1) - np.sin(t0))
        through = (np.abs(np.sin(e0) - np.sin(t0)) + 2.0 * np.maximum(n - 1, 0)
                   + np.abs(np.sin(t1) - np.sin(e1)))
        return np.abs(self.amplitude) * np.where(n > 0, through, direct)

    def integral(self, a, b):
        a = np.atleast_1d(np.asarray(a, float))
        b = np.atleast_1d(np.asarray(b, float))
        w, p = self.frequency, self.phase
        if w == 0:
            return self.amplitude * np.sin(p) * (b - a)
        return self.amplitude * (np.cos(w * a + p) - np.cos(w * b + p)) / w

    def scaled(self, factor):
        return SineForm(self.amplitude * factor, self.frequency, self.phase)

    def reparam(self, scale, shift):
        return SineForm(self.amplitude, self.frequency * scale, self.frequency * shift + self.phase)

    def to_dict(self):
        return {"kind": "sine", "amplitude": self.amplitude, "frequency": self.frequency,
                "phase": self.phase}


def form_from_dict(d, support):
    kind = d["kind"]
    if kind == "affine":
        return affine_form(d["slope"], support, d.get("intercept", 0.0))
    if kind == "poly":
        return poly_form(d["coefficients"], support)
    if kind == "sine":
        return SineForm(d["amplitude"], d["frequency"], d.get("phase", 0.0))
    if kind == "spline":
        if "values" in d:
            return spline_form(d["knots"], d["values"])
        return PPolyForm(d["knots"], d["coefficients"])
    raise DomainError(f"unknown smooth form {kind!r}")
