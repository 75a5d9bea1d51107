"""Planar BV functions evaluated through their one-dimensional slices.

A line in the plane is parametrized by an angle theta and an offset zeta:
points are ``zeta * perp + t * sigma`` with ``sigma = (cos theta, sin theta)``
and ``perp = (-sin theta, cos theta)``. For the catalog below every slice
``t -> u(zeta * perp + t * sigma)`` is an exact :class:`BV1D`, and

    F(u, Omega) = integral over theta in [0, pi) and zeta of F_1d(slice),

where F_1d uses the one-dimensional kernel |t|^(gamma - 1).
"""

from dataclasses import dataclass, field
import csv
import io
import math
import time

import numpy as np
from scipy.special import gamma as gamma_fn

from .bvcalc import catalog
from .bvcalc.function import BV1D, DerivDecomp
from .bvcalc.measures import variation_decomposition
from .bvcalc.sets import OpenSet1D
from .errors import DomainError, ParameterError, UnsupportedFormError
from .evaluator1d import DEFAULT_RTOL, FunctionalEstimate, f_eval
from .kernel import check_gamma

_EPS = 1e-12


def c_n(n):
    """Integral of |x_1| over the unit sphere S^{n-1}: twice the volume of the unit (n-1)-ball.

    >>> c_n(2)
    4.0
    """
    if int(n) != n or n < 1:
        raise ParameterError("dimension must be a positive integer")
    m = n - 1
    return float(2.0 * math.pi ** (m / 2) / gamma_fn(m / 2 + 1))


def c_n_mc(n, samples=1_000_000, seed=0):
    """Sphere Monte Carlo estimate of c_n with its standard error."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((samples, n))
    x1 = np.abs(g[:, 0]) / np.linalg.norm(g, axis=1)
    area = 2.0 * math.pi ** (n / 2) / gamma_fn(n / 2)
    return float(area * x1.mean()), float(area * x1.std(ddof=1) / math.sqrt(samples))


def _frame(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([c, s]), np.array([-s, c])


# ------------------------------------------------------------------ regions

class Disk:
    def __init__(self, center, radius):
        self.center = np.asarray(center, float)
        self.radius = float(radius)
        if self.radius <= 0:
            raise DomainError("disk radius must be positive")

    def chord(self, theta, zeta):
        sigma, perp = _frame(theta)
        dz = zeta - self.center @ perp
        h2 = self.radius ** 2 - dz * dz
        if h2 <= 0:
            return None
        tc = self.center @ sigma
        h = math.sqrt(h2)
        return tc - h, tc + h

    def offset_range(self, theta):
        _, perp = _frame(theta)
        zc = self.center @ perp
        return zc - self.radius, zc + self.radius

    def offset_breaks(self, theta):
        return list(self.offset_range(theta))

    def line_hits(self, d, s):
        """End points of {<x, d> = s} inside the closed disk."""
        d = np.asarray(d, float)
        foot = self.center + (s - self.center @ d) * d
        h2 = self.radius ** 2 - (s - self.center @ d) ** 2
        if h2 < 0:
            return []
        e = np.array([-d[1], d[0]])
        h = math.sqrt(h2)
        return [foot - h * e, foot + h * e]

    @property
    def area(self):
        return math.pi * self.radius ** 2

    @property
    def perimeter(self):
        return 2 * math.pi * self.radius

    def contains(self, pts):
        pts = np.atleast_2d(pts)
        return np.sum((pts - self.center) ** 2, axis=1) < self.radius ** 2

    def inside_of(self, other):
        if isinstance(other, Disk):
            return np.linalg.norm(self.center - other.center) + self.radius <= other.radius
        ang = np.linspace(0, 2 * np.pi, 721)
        ring = self.center + self.radius * np.column_stack([np.cos(ang), np.sin(ang)])
        return bool(np.all(other.signed_margin(ring) >= -1e-12)) and other._disk_clear(self)

    def sample(self, n, rng):
        r = self.radius * np.sqrt(rng.random(n))
        a = 2 * np.pi * rng.random(n)
        return self.center + np.column_stack([r * np.cos(a), r * np.sin(a)])

    def rotated(self, angle):
        return Disk(_rot(angle) @ self.center, self.radius)

    def to_dict(self):
        return {"kind": "disk", "center": self.center.tolist(), "radius": self.radius}


class ConvexPolygon:
    """Convex polygon with vertices in counter-clockwise order."""

    def __init__(self, vertices):
        v = np.asarray(vertices, float)
        if v.ndim != 2 or v.shape[0] < 3 or v.shape[1] != 2:
            raise DomainError("a polygon needs at least three planar vertices")
        area2 = np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
        if area2 < 0:
            v = v[::-1]
        self.vertices = v
        edges = np.roll(v, -1, axis=0) - v
        # outward normals n_i and offsets: inside iff n_i . x < c_i
        self.normals = np.column_stack([edges[:, 1], -edges[:, 0]])
        self.normals /= np.linalg.norm(self.normals, axis=1)[:, None]
        self.offsets = np.sum(self.normals * v, axis=1)

    @classmethod
    def rectangle(cls, x0, x1, y0, y1):
        return cls([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])

    def chord(self, theta, zeta):
        sigma, perp = _frame(theta)
        p0 = zeta * perp
        lo, hi = -math.inf, math.inf
        for nrm, c in zip(self.normals, self.offsets):
            den = nrm @ sigma
            num = c - nrm @ p0
            if abs(den) < 1e-15:
                if num <= 0:
                    return None
                continue
            t = num / den
            if den > 0:
                hi = min(hi, t)
            else:
                lo = max(lo, t)
        if not hi - lo > _EPS:
            return None
        return lo, hi

    def offset_range(self, theta):
        _, perp = _frame(theta)
        z = self.vertices @ perp
        return float(z.min()), float(z.max())

    def offset_breaks(self, theta):
        _, perp = _frame(theta)
        return sorted((self.vertices @ perp).tolist())

    def line_hits(self, d, s):
        d = np.asarray(d, float)
        e = np.array([-d[1], d[0]])
        theta = math.atan2(e[1], e[0])
        # the line {<x, d> = s} is {zeta' perp' + t e}, perp' = -d, zeta' = -s
        ch = self.chord(theta, -s)
        if ch is None:
            return []
        p0 = -s * np.array([-math.sin(theta), math.cos(theta)])
        return [p0 + ch[0] * e, p0 + ch[1] * e]

    @property
    def area(self):
        v = self.vertices
        return 0.5 * float(np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1]))

    @property
    def perimeter(self):
        return float(np.sum(np.linalg.norm(np.roll(self.vertices, -1, axis=0) - self.vertices, axis=1)))

    def signed_margin(self, pts):
        pts = np.atleast_2d(pts)
        return np.min(self.offsets[None, :] - pts @ self.normals.T, axis=1)

    def _disk_clear(self, disk):
        return bool(np.all(self.offsets - self.normals @ disk.center >= disk.radius - 1e-12))

    def contains(self, pts):
        return self.signed_margin(pts) > 0

    def inside_of(self, other):
        if isinstance(other, ConvexPolygon):
            return bool(np.all(other.signed_margin(self.vertices) >= -1e-12))
        return bool(np.all(other.contains(self.vertices)))

    def sample(self, n, rng):
        lo, hi = self.vertices.min(axis=0), self.vertices.max(axis=0)
        out = np.empty((0, 2))
        while out.shape[0] < n:
            m = int(1.3 * (n - out.shape[0])) + 16
            p = lo + (hi - lo) * rng.random((m, 2))
            out = np.vstack([out, p[self.contains(p)]])
        return out[:n]

    def rotated(self, angle):
        return ConvexPolygon(self.vertices @ _rot(angle).T)

    def to_dict(self):
        return {"kind": "polygon", "vertices": self.vertices.tolist()}


def _rot(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def unit_square():
    return ConvexPolygon.rectangle(0.0, 1.0, 0.0, 1.0)


def region_from_dict(d):
    if d["kind"] == "disk":
        return Disk(d["center"], d["radius"])
    if d["kind"] == "polygon":
        return ConvexPolygon(d["vertices"])
    if d["kind"] == "rectangle":
        return ConvexPolygon.rectangle(*d["bounds"])
    raise DomainError(f"unknown region kind {d['kind']!r}")


# ---------------------------------------------------------------- functions

class BV2D:
    """Base class: a catalog function on a convex domain."""

    domain = None

    def slice(self, sigma, z):
        """Restriction to the line through z * perp with direction sigma.

        Returns ``(BV1D, OpenSet1D)``; the function is the zero constant on
        an empty chord, in which case the open set is None.
        """
        sigma = np.asarray(sigma, float)
        sigma = sigma / np.linalg.norm(sigma)
        theta = math.atan2(sigma[1], sigma[0])
        return self.slice_at(theta, float(z))

    def slice_at(self, theta, zeta):
        ch = self.domain.chord(theta, zeta)
        if ch is None:
            return catalog.constant(0.0), None
        W = OpenSet1D.interval(*ch)
        return self._slice(theta, zeta, W), W

    def offset_breaks(self, theta):
        return self.domain.offset_breaks(theta)

    def __add__(self, other):
        if not isinstance(other, BV2D):
            return NotImplemented
        return SumBV2D([self, other])

    def oscillation_bound(self):
        raise NotImplementedError


class Ridge(BV2D):
    """u(x) = profile(<x, direction>)."""

    def __init__(self, profile, direction, domain):
        d = np.asarray(direction, float)
        self.direction = d / np.linalg.norm(d)
        self.profile = profile
        self.domain = domain
        lo, hi = self._projection()
        if not profile.domain.closure_contains(lo) or not profile.domain.closure_contains(hi):
            raise DomainError("the profile does not cover the projection of the domain")

    def _projection(self):
        # at theta = angle(direction) - pi/2 the offset axis is the direction
        return self.domain.offset_range(self._theta_d())

    def _theta_d(self):
        return math.atan2(self.direction[1], self.direction[0]) - math.pi / 2

    def _slice(self, theta, zeta, W):
        sigma, perp = _frame(theta)
        scale = float(sigma @ self.direction)
        shift = float(zeta * (perp @ self.direction))
        if abs(scale) < 1e-14:
            return catalog.constant(self.profile.eval_unchecked(shift)[0], W)
        return self.profile.reparam(scale, shift, domain=W)

    def __call__(self, pts):
        pts = np.atleast_2d(pts)
        return self.profile.eval_unchecked(pts @ self.direction)

    def offset_breaks(self, theta):
        _, perp = _frame(theta)
        out = list(self.domain.offset_breaks(theta))
        lo, hi = self._projection()
        for s in self.profile.breakpoints(lo - _EPS, hi + _EPS):
            for p in self.domain.line_hits(self.direction, s):
                out.append(float(p @ perp))
        return sorted(out)

    def oscillation_bound(self):
        lo, hi = self._projection()
        a, b = self.profile.range_open(np.array([lo - 1e-9]), np.array([hi + 1e-9]))
        return float(b[0] - a[0])

    def rotated(self, angle):
        return Ridge(self.profile, _rot(angle) @ self.direction, self.domain.rotated(angle))

    def decomposition(self):
        """Exact derivative masses: profile masses weighted by chord length."""
        lo, hi = self._projection()
        dom = self.domain
        d = self.direction

        def width(s):
            hits = dom.line_hits(d, s)
            return float(np.linalg.norm(hits[1] - hits[0])) if hits else 0.0

        widths = np.vectorize(width)
        p = self.profile
        jump = sum(abs(h) * width(x) for x, h in zip(p.jump_locations, p.jump_heights)
                   if lo < x < hi)
        ac = 0.0
        from .quadrature import adaptive_gl
        for piece in p.pieces:
            a, b = max(piece.support[0], lo), min(piece.support[1], hi)
            if a < b:
                cuts = np.unique(np.concatenate([[a, b], [c for c in dom.offset_breaks(self._theta_d()) if a < c < b]]))
                val, _ = adaptive_gl(lambda s: np.abs(piece.form.deriv(s)) * widths(s),
                                     cuts[:-1], cuts[1:], 1e-10)
                ac += val
        cant = 0.0
        for comp in p.cantor:
            a, b = max(comp.window[0], lo), min(comp.window[1], hi)
            if a < b:
                # Stieltjes sum on a triadic grid of the support
                A, B = comp.support
                edges = A + (B - A) * np.arange(3 ** 9 + 1) / 3 ** 9
                edges = np.clip(edges, a, b)
                inc = np.abs(np.diff(comp.value(edges)))
                mids = 0.5 * (edges[:-1] + edges[1:])
                cant += float(np.sum(inc * widths(mids)))
        return DerivDecomp(ac, jump, cant)


class Indicator(BV2D):
    """height times the indicator of a disk or convex polygon."""

    def __init__(self, region, height, domain):
        self.region = region
        self.height = float(height)
        self.domain = domain

    def _slice(self, theta, zeta, W):
        t0, t1 = W.intervals[0]
        ch = self.region.chord(theta, zeta)
        if ch is None:
            return catalog.constant(0.0, W)
        tin, tout = ch
        base = self.height if tin <= t0 < tout else 0.0
        locs, hts = [], []
        if t0 < tin < t1:
            locs.append(tin)
            hts.append(self.height)
        if t0 < tout < t1:
            locs.append(tout)
            hts.append(-self.height)
        return catalog.steps(locs, hts, W, base)

    def __call__(self, pts):
        return self.height * self.region.contains(pts).astype(float)

    def offset_breaks(self, theta):
        return sorted(list(self.domain.offset_breaks(theta)) + list(self.region.offset_breaks(theta)))

    def oscillation_bound(self):
        return abs(self.height)

    def rotated(self, angle):
        return Indicator(self.region.rotated(angle), self.height, self.domain.rotated(angle))

    def decomposition(self):
        if self.region.inside_of(self.domain):
            return DerivDecomp(0.0, abs(self.height) * self.region.perimeter, 0.0)
        return None


class Radial(BV2D):
    """u(x) = profile(|x - center|) for a profile made of jumps only."""

    def __init__(self, profile, center, domain):
        if profile.pieces or profile.cantor:
            raise UnsupportedFormError("radial forms take jump-only profiles")
        self.profile = profile
        self.center = np.asarray(center, float)
        self.domain = domain

    def _slice(self, theta, zeta, W):
        t0, t1 = W.intervals[0]
        sigma, perp = _frame(theta)
        dz = zeta - self.center @ perp
        tc = self.center @ sigma
        p = self.profile
        r0 = math.hypot(dz, t0 - tc)
        base = float(p.eval_unchecked(r0)[0]) if r0 not in p.jump_locations else p.right_limit(r0)
        locs, hts = [], []
        for r, h in zip(p.jump_locations, p.jump_heights):
            if r <= abs(dz):
                continue
            w = math.sqrt(r * r - dz * dz)
            for t, sgn in ((tc - w, -1.0), (tc + w, 1.0)):
                if t0 < t < t1:
                    locs.append(t)
                    hts.append(sgn * h)
        return catalog.steps(locs, hts, W, base)

    def __call__(self, pts):
        pts = np.atleast_2d(pts)
        return self.profile.eval_unchecked(np.linalg.norm(pts - self.center, axis=1))

    def offset_breaks(self, theta):
        _, perp = _frame(theta)
        zc = self.center @ perp
        out = list(self.domain.offset_breaks(theta))
        for r in self.profile.jump_locations:
            out += [zc - r, zc + r]
        return sorted(out)

    def oscillation_bound(self):
        return float(sum(abs(h) for h in self.profile.jump_heights))

    def rotated(self, angle):
        return Radial(self.profile, _rot(angle) @ self.center, self.domain.rotated(angle))

    def decomposition(self):
        circles = [Disk(self.center, r) for r in self.profile.jump_locations]
        if all(c.inside_of(self.domain) for c in circles):
            jump = sum(abs(h) * c.perimeter for h, c in zip(self.profile.jump_heights, circles))
            return DerivDecomp(0.0, jump, 0.0)
        return None


class SumBV2D(BV2D):
    def __init__(self, terms):
        flat = []
        for t in terms:
            flat.extend(t.terms if isinstance(t, SumBV2D) else [t])
        self.terms = flat
        self.domain = flat[0].domain

    def _slice(self, theta, zeta, W):
        out = None
        for t in self.terms:
            s = t._slice(theta, zeta, W)
            out = s if out is None else out + s
        return out.with_domain(W)

    def __call__(self, pts):
        return sum(t(pts) for t in self.terms)

    def offset_breaks(self, theta):
        return sorted(set().union(*(t.offset_breaks(theta) for t in self.terms)))

    def oscillation_bound(self):
        return sum(t.oscillation_bound() for t in self.terms)

    def rotated(self, angle):
        return SumBV2D([t.rotated(angle) for t in self.terms])

    def decomposition(self):
        return None


class Constant2D(BV2D):
    def __init__(self, value, domain):
        self.value = float(value)
        self.domain = domain

    def _slice(self, theta, zeta, W):
        return catalog.constant(self.value, W)

    def __call__(self, pts):
        return np.full(np.atleast_2d(pts).shape[0], self.value)

    def oscillation_bound(self):
        return 0.0

    def rotated(self, angle):
        return Constant2D(self.value, self.domain.rotated(angle))

    def decomposition(self):
        return DerivDecomp(0.0, 0.0, 0.0)


def cantor_sheet(mass=1.0, axis=(1.0, 0.0), domain=None, support=(0.0, 1.0)):
    """mass times the Cantor function of <x, axis>, rescaled to `support`."""
    domain = unit_square() if domain is None else domain
    profile = catalog.cantor(mass, support, domain=((support[0] - 1e3, support[1] + 1e3),))
    return Ridge(profile, axis, domain)


def linear_ridge(slope=1.0, direction=(1.0, 0.0), domain=None, extent=1e3):
    domain = unit_square() if domain is None else domain
    profile = catalog.affine(slope, 0.0, ((-extent, extent),))
    return Ridge(profile, direction, domain)


def disk_indicator(radius=0.3, center=(0.0, 0.0), height=1.0, domain=None):
    domain = ConvexPolygon.rectangle(-1, 1, -1, 1) if domain is None else domain
    return Indicator(Disk(center, radius), height, domain)


# -------------------------------------------------------------- evaluation

@dataclass(frozen=True)
class SliceQuadrature:
    n_directions: int = 64
    tol: float = 1e-3
    slice_rtol: float = DEFAULT_RTOL
    max_level: int = 12
    angle_offset: float = 0.0

    def __post_init__(self):
        if self.n_directions < 4:
            raise ParameterError("at least four directions are required")
        if not self.tol > 0:
            raise ParameterError("tolerance must be positive")


@dataclass(frozen=True)
class SliceEstimate:
    value: float
    error_bound: float
    n_directions: int
    n_offsets: int
    angular_error: float = 0.0
    offset_error: float = 0.0
    slice_error: float = 0.0
    warning: bool = False
    per_direction: list = field(default_factory=list, repr=False)

    def as_functional_estimate(self):
        return FunctionalEstimate(self.value, self.error_bound, 0, self.n_offsets, 0,
                                  warning=self.warning)


def _offset_integral(fun, breaks, tol, max_level):
    """Adaptive Simpson of `fun` (returning (value, err)) over consecutive breaks."""
    cache = {}

    def f(z):
        if z not in cache:
            cache[z] = fun(z)
        return cache[z]

    total = 0.0
    quad_err = 0.0
    span = breaks[-1] - breaks[0]
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b - a <= _EPS * max(1.0, span):
            continue
        stack = [(a, b, 0)]
        while stack:
            lo, hi, lev = stack.pop()
            m = 0.5 * (lo + hi)
            fl, fm, fh = f(lo)[0], f(m)[0], f(hi)[0]
            q1, q3 = 0.5 * (lo + m), 0.5 * (m + hi)
            coarse = (hi - lo) * (fl + 4 * fm + fh) / 6
            fine = (hi - lo) * (fl + 4 * f(q1)[0] + 2 * fm + 4 * f(q3)[0] + fh) / 12
            err = abs(fine - coarse) / 15
            if err <= tol * (hi - lo) / span or lev >= max_level:
                total += fine + (fine - coarse) / 15
                quad_err += err
            else:
                stack.append((lo, m, lev + 1))
                stack.append((m, hi, lev + 1))
    # slice errors weighted by the composite rule are bounded by the span
    # times the largest per-slice error bound
    slice_err = span * max((e for _, e in cache.values()), default=0.0)
    return total, quad_err, slice_err, len(cache)


def f_eval_2d(u, gamma, lam, quad=None):
    """F_{gamma,lambda}(u, Omega) in the plane by slicing.

    The direction integral uses the periodic trapezoid rule on [0, pi)
    (slices along sigma and -sigma coincide); its error is estimated by
    comparison with the rule on every other angle.
    """
    check_gamma(gamma)
    if not lam > 0:
        raise ParameterError("lambda must be positive")
    quad = SliceQuadrature() if quad is None else quad
    n = quad.n_directions
    thetas = quad.angle_offset + np.pi * np.arange(n) / n
    per_dir = []
    n_off = 0
    warn = False
    q_err = s_err = 0.0
    for theta in thetas:
        flags = []

        def fun(z, theta=theta):
            s, W = u.slice_at(theta, z)
            if W is None:
                return 0.0, 0.0
            est = f_eval(s, W, gamma, lam, rtol=quad.slice_rtol, warn=False)
            flags.append(est.warning)
            return est.value, est.error_bound

        lo, hi = u.domain.offset_range(theta)
        breaks = sorted({lo, hi} | {b for b in u.offset_breaks(theta) if lo < b < hi})
        val, qe, se, cnt = _offset_integral(fun, breaks, quad.tol, quad.max_level)
        per_dir.append(val)
        q_err += qe
        s_err += se
        n_off += cnt
        warn |= any(flags)
    per_dir = np.array(per_dir)
    h = np.pi / n
    value = h * per_dir.sum()
    half = 2 * h * per_dir[::2].sum()
    ang_err = abs(value - half)
    err = ang_err + h * (q_err + s_err)
    return SliceEstimate(float(value), float(err), n, n_off, float(ang_err), float(h * q_err),
                         float(h * s_err), warn, per_dir.tolist())


def variation_decomposition_2d(u, quad=None):
    """|D^a u|, |D^j u|, |D^c u| on the domain.

    Uses closed forms where the geometry allows and otherwise the slicing
    identity: c_2 |Du| = integral over S^1 and offsets of |D u_slice|.
    """
    exact = u.decomposition() if hasattr(u, "decomposition") else None
    if exact is not None:
        return exact
    return variation_by_slicing(u, quad)


def variation_by_slicing(u, quad=None):
    quad = SliceQuadrature() if quad is None else quad
    n = quad.n_directions
    acc = np.zeros(3)
    for theta in quad.angle_offset + np.pi * np.arange(n) / n:

        def fun(z, theta=theta, part=None):
            s, W = u.slice_at(theta, z)
            if W is None:
                return np.zeros(3)
            d = variation_decomposition(s, W)
            return np.array([d.abs, d.jump, d.cantor])

        lo, hi = u.domain.offset_range(theta)
        breaks = sorted({lo, hi} | {b for b in u.offset_breaks(theta) if lo < b < hi})
        for k in range(3):
            val, _, _, _ = _offset_integral(lambda z, k=k, fun=fun: (fun(z)[k], 0.0),
                                            breaks, quad.tol, quad.max_level)
            acc[k] += val
    # the angle integral over S^1 is twice the one over [0, pi)
    acc *= 2 * np.pi / n / c_n(2)
    return DerivDecomp(*map(float, acc))


def f_eval_mc_2d(u, gamma, lam, samples=1_000_000, seed=0, batch=1_000_000):
    """Direct Monte Carlo estimate of lam * nu_gamma(E) in the plane.

    x is uniform on the domain and y = x + rho (cos phi, sin phi) with rho of
    density proportional to rho^(gamma - 1) on (0, R), which absorbs the
    kernel |x - y|^(gamma - 2) together with the polar Jacobian; R bounds
    the reach of E through the oscillation of u.
    """
    check_gamma(gamma)
    if samples <= 0:
        raise ParameterError("samples must be positive")
    osc = u.oscillation_bound()
    if osc <= 0:
        return 0.0, 0.0
    R = (osc / lam) ** (1.0 / (1.0 + gamma))
    Z = 2 * np.pi * R ** gamma / gamma
    area = u.domain.area
    rng = np.random.default_rng(seed)
    total = total_sq = 0.0
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        x = u.domain.sample(m, rng)
        rho = R * rng.random(m) ** (1.0 / gamma)
        phi = 2 * np.pi * rng.random(m)
        y = x + rho[:, None] * np.column_stack([np.cos(phi), np.sin(phi)])
        ok = u.domain.contains(y)
        hit = np.zeros(m, bool)
        if ok.any():
            hit[ok] = np.abs(u(x[ok]) - u(y[ok])) > lam * rho[ok] ** (1.0 + gamma)
        val = lam * area * Z * hit
        total += val.sum()
        total_sq += (val * val).sum()
        done += m
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    return float(mean), float(math.sqrt(var / samples))


CSV_COLUMNS_2D = ("lambda", "value", "error_bound", "n_directions", "n_offsets", "runtime_ms")


def sweep_2d(u, gamma, grid, quad=None):
    rows = []
    for lam in grid:
        t0 = time.perf_counter()
        est = f_eval_2d(u, gamma, float(lam), quad)
        rows.append((float(lam), est, 1e3 * (time.perf_counter() - t0)))
    return rows


def sweep_2d_csv(rows, out=None, timing=True):
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_COLUMNS_2D)
    for lam, e, ms in rows:
        wr.writerow([repr(lam), repr(e.value), repr(e.error_bound), e.n_directions,
                     e.n_offsets, f"{ms if timing else 0.0:.3f}"])
    text = buf.getvalue()
    if isinstance(out, str):
        with open(out, "w") as fh:
            fh.write(text)
    elif out is not None:
        out.write(text)
    return text
