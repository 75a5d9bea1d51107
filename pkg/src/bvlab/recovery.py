"""Recovery sequences: truncation, level staircases, mollification, gluing.

``build_recovery_family`` assembles, for a catalog function u, jump-only
approximations u_k of its Cantor part together with a threshold lambda_k
beyond which the functional of u_k is certified close to its SBV limit.
"""

from dataclasses import dataclass, field
import json
import math
import time

import numpy as np
from scipy.signal import fftconvolve

from .bvcalc import catalog
from .bvcalc.forms import PPolyForm, SineForm, spline_form
from .bvcalc.function import BV1D, CantorComponent, DerivDecomp, SmoothPiece
from .bvcalc.measures import area_functional, l1_distance, variation_decomposition
from .bvcalc.sets import OpenSet1D
from .errors import BVLabError, DomainError, ParameterError, UnsupportedFormError
from .evaluator1d import f_eval
from .kernel import check_gamma
from .quadrature import adaptive_gl

DEFAULT_LEVEL_SAMPLES = 33
DEFAULT_STAGES = (1, 2, 4, 8, 16, 32, 64)
LAMBDA_MAX = 1e9
MOLLIFIER_SAMPLES = 2048


class DegenerateLevelError(BVLabError):
    """u equals the level on a set of positive measure."""


# ------------------------------------------------------------ level sets

def _segments(u, lo, hi):
    pts = np.concatenate([[lo], u.breakpoints(lo, hi), [hi]])
    return pts[:-1], pts[1:]


def _label_cells(u, a, b, t, min_width):
    """Cells of (a, b) labelled +1 (u > t), -1 (u < t) or 0 (u == t).

    Cells narrower than `min_width` that still straddle t are labelled by
    the sign of u - t at their midpoint and marked as thin.
    """
    out_a, out_b, out_lab, out_thin = [], [], [], []
    flat = 1e-12 * (1.0 + abs(t))
    while a.size:
        lo, hi = u.range_open(a, b)
        above = lo > t
        below = hi < t
        level = ~above & ~below & (hi - lo <= flat)
        thin = ~above & ~below & ~level & (b - a <= min_width)
        done = above | below | level | thin
        if done.any():
            lab = np.where(above, 1, np.where(below, -1, 0))
            if thin.any():
                mid = 0.5 * (a[thin] + b[thin])
                lab[thin] = np.sign(u.eval_unchecked(mid) - t).astype(int)
            out_a.append(a[done])
            out_b.append(b[done])
            out_lab.append(lab[done])
            out_thin.append(thin[done] | (level[done] & (b[done] - a[done] <= min_width)))
        a, b = a[~done], b[~done]
        m = 0.5 * (a + b)
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
    if not out_a:
        return (np.empty(0),) * 2 + (np.empty(0, int), np.empty(0, bool))
    a = np.concatenate(out_a)
    order = np.argsort(a)
    return (a[order], np.concatenate(out_b)[order], np.concatenate(out_lab)[order],
            np.concatenate(out_thin)[order])


def _runs(A, B, a, b, lab):
    """Merge labelled cells into runs; boundaries sit mid-gap between runs."""
    change = np.nonzero(lab[1:] != lab[:-1])[0]
    cuts = 0.5 * (b[change] + a[change + 1])
    starts = np.concatenate([[A], cuts])
    ends = np.concatenate([cuts, [B]])
    run_lab = np.concatenate([[lab[0]], lab[change + 1]])
    ivs = [(float(s), float(e)) for s, e, l in zip(starts, ends, run_lab) if l > 0]
    return ivs, change.size


def _superlevel(u, t, W=None, degenerate_tol=1e-9):
    """Intervals of {u > t} inside W up to null sets, and the boundary count.

    A level set of positive measure is harmless unless {u >= t} has a
    different boundary count, in which case the level is degenerate.
    """
    W = u.domain if W is None else OpenSet1D.coerce(W)
    if not W.bounded:
        raise DomainError("level sets need a bounded domain")
    intervals = []
    crossings = 0
    for A, B in W.intervals:
        min_width = 1e-13 * max(B - A, abs(A), abs(B), 1e-300)
        sa, sb = _segments(u, A, B)
        a, b, lab, thin = _label_cells(u, sa, sb, t, min_width)
        level = (lab == 0) & ~thin
        keep = ~thin & ((lab != 0) | level)
        a, b, lab, level = a[keep], b[keep], lab[keep], level[keep]
        if a.size == 0:
            continue
        ivs, n = _runs(A, B, a, b, np.where(level, -1, lab))
        if float(np.sum((b - a)[level])) > degenerate_tol * (B - A):
            _, n_closed = _runs(A, B, a, b, np.where(level, 1, lab))
            if n_closed != n:
                raise DegenerateLevelError(f"u equals {t!r} on a set of positive measure")
        intervals += ivs
        crossings += n
    return intervals, crossings


def superlevel_set(u, t, W=None):
    """{u > t} as a tuple of open intervals, up to a null set."""
    return tuple(_superlevel(u, t, W)[0])


def level_crossings(u, t, W=None):
    """Number of essential boundary points of {u > t} inside W.

    Raises DegenerateLevelError when u equals t on a set of positive measure.

    >>> from bvlab.bvcalc.catalog import affine
    >>> level_crossings(affine(), 0.5)
    1
    """
    return _superlevel(u, t, W)[1]


# ------------------------------------------------------------ truncation

def _sup_inf(u, W):
    lo, hi = math.inf, -math.inf
    for A, B in W.intervals:
        sa, sb = _segments(u, A, B)
        l, h = u.range_open(sa, sb)
        lo, hi = min(lo, float(l.min())), max(hi, float(h.max()))
    return lo, hi


def truncate(u, N):
    """max(min(u, N), -N) as a catalog function.

    The derivative measure is restricted to {-N < u < N}; every jump is
    replaced by the jump of the clipped one-sided limits.
    """
    if not N > 0:
        raise ParameterError("truncation level must be positive")
    W = u.domain
    lo, hi = _sup_inf(u, W)
    if -N <= lo and hi <= N:
        return u
    # open set {-N < u < N} up to null sets
    upper = _superlevel(-u, -N, W)[0]
    lower = _superlevel(u, -N, W)[0]
    inside = []
    for p, q in upper:
        for r, s in lower:
            a, b = max(p, r), min(q, s)
            if a < b:
                inside.append((a, b))
    pieces = []
    for piece in u.pieces:
        for a, b in inside:
            c, d = max(a, piece.support[0]), min(b, piece.support[1])
            if c < d:
                pieces.append(SmoothPiece((c, d), piece.form))
    cantor = []
    for comp in u.cantor:
        for a, b in inside:
            c, d = max(a, comp.window[0]), min(b, comp.window[1])
            if c < d:
                cantor.append(CantorComponent(comp.support, comp.mass, (c, d)))
    locs, hts = [], []
    for p in u.jump_locations:
        h = min(max(u.right_limit(p), -N), N) - min(max(u.left_limit(p), -N), N)
        if h != 0:
            locs.append(p)
            hts.append(h)
    start = W.lower
    base = min(max(u.right_limit(start), -N), N)
    out = BV1D(base, tuple(pieces), tuple(locs), tuple(hts), tuple(cantor), W, u.depth)
    # continuous entries into the clipped region are exact; what is left
    # are boundary values of the pieces that start at a crossing point
    return _match_values(out, u, N)


def _match_values(v, u, N):
    """Add corrective jumps where v and clip(u) disagree between features."""
    W = u.domain
    pts = np.union1d(v.breakpoints(W.lower, W.upper), u.breakpoints(W.lower, W.upper))
    edges = np.concatenate([[W.lower], pts, [W.upper]])
    mids = 0.5 * (edges[:-1] + edges[1:])
    target = np.clip(u.eval_unchecked(mids), -N, N)
    got = v.eval_unchecked(mids)
    diff = target - got
    tol = 1e-9 * max(1.0, N)
    if np.all(np.abs(diff) <= tol):
        return v
    # a mismatch is constant between features; fix it at the left feature
    locs = list(v.jump_locations)
    hts = list(v.jump_heights)
    prev = 0.0
    for x0, d in zip(edges[:-1], diff):
        step = d - prev
        if abs(step) > tol:
            locs.append(float(x0))
            hts.append(float(step))
            prev = d
    return BV1D(v.base, v.pieces, tuple(locs), tuple(hts), v.cantor, v.domain, v.depth)


# ------------------------------------------------------------- staircase

@dataclass(frozen=True)
class StaircaseParams:
    """Levels split [center - M, center + M] into k slots of width 2M / k."""

    M: float
    k: int
    level_samples: int = DEFAULT_LEVEL_SAMPLES
    center: float = 0.0

    def __post_init__(self):
        if not self.M > 0:
            raise ParameterError("M must be positive")
        if int(self.k) != self.k or self.k < 1:
            raise ParameterError("k must be a positive integer")
        if self.level_samples < 1:
            raise ParameterError("level_samples must be positive")

    @property
    def step(self):
        return 2.0 * self.M / self.k

    def required_k(self, eps, measure):
        """Smallest k with 2M/k < min(1, eps/|Omega|)."""
        return int(math.floor(2.0 * self.M / min(1.0, eps / measure))) + 1


@dataclass(frozen=True)
class StaircaseResult:
    function: BV1D
    levels: tuple
    crossings: tuple
    l1_gap: float
    variation_before: float
    variation_after: float


def _is_monotone(u, W):
    for A, B in W.intervals:
        rise = abs(u.left_limit(B) - u.right_limit(A))
        if variation_decomposition(u, ((A, B),)).total > rise * (1 + 1e-12) + 1e-15:
            return False
    return True


def _choose_level(u, lo, h, m, W, vmin, vmax, monotone):
    """Sampled level in [lo, lo + h] with the fewest boundary points.

    Ties go to the candidate nearest the slot centre. For monotone u every
    non-degenerate level has the same count, so the first one tried wins.
    """
    cands = [lo + h * (i + 0.5) / m for i in sorted(range(m), key=lambda i: abs(i + 0.5 - m / 2))]
    # levels beyond the range of u have no boundary; the samples may miss them
    cands = [t for t in (vmax, vmin) if lo <= t <= lo + h] + cands
    best = None
    for t in cands:
        i = (t - lo) / h * m - 0.5
        if t >= vmax:
            n, iv = 0, []
        elif t <= vmin:
            n, iv = 0, list(W.intervals)
        else:
            try:
                iv, n = _superlevel(u, t, W)
            except DegenerateLevelError:
                continue
        key = (n, abs(i + 0.5 - m / 2))
        if best is None or key < best[0]:
            best = (key, t, iv, n)
        if monotone or n == 0:
            break
    if best is None:
        raise DegenerateLevelError("every sampled level in the slot is degenerate")
    return best[1:]


def staircase_result(u, params, eps=None):
    """Jump-only approximation (center - M) + sum_j (2M/k) 1{u > t_j}.

    In each slot the level t_j is the sampled candidate whose superlevel set
    has the fewest boundary points, so sum_j (2M/k) #boundary(t_j) stays
    below the coarea integral |Du|.
    """
    W = u.domain
    if not W.bounded:
        raise DomainError("staircase needs a bounded domain")
    if eps is not None:
        if not eps > 0:
            raise ParameterError("eps must be positive")
        if not params.step < min(1.0, eps / W.measure):
            raise ParameterError(
                f"k={params.k} is too small for eps={eps}; need k >= {params.required_k(eps, W.measure)}")
    lo_u, hi_u = _sup_inf(u, W)
    lo_u, hi_u = lo_u - 1e-12 * (hi_u - lo_u), hi_u + 1e-12 * (hi_u - lo_u)
    bottom = params.center - params.M
    h = params.step
    monotone = _is_monotone(u, W)
    levels, counts = [], []
    locs, hts = [], []
    base = bottom
    for j in range(params.k):
        t, iv, n = _choose_level(u, bottom + j * h, h, params.level_samples, W, lo_u, hi_u,
                                 monotone)
        levels.append(t)
        counts.append(n)
        for p, q in iv:
            # a level set reaching the left end raises the base instead
            if p <= W.lower:
                base += h
            else:
                locs.append(p)
                hts.append(h)
            if q < W.upper:
                locs.append(q)
                hts.append(-h)
    v = BV1D(base, (), tuple(locs), tuple(hts), (), W, u.depth)
    before = variation_decomposition(u).total
    after = variation_decomposition(v).total
    gap, _ = l1_distance(v, u, tol=1e-9 * max(1.0, W.measure))
    return StaircaseResult(v, tuple(levels), tuple(counts), gap, before, after)


def staircase(u, params, eps=None):
    """Jump-only staircase of u; see :func:`staircase_result`."""
    if not isinstance(u, BV1D):
        return _staircase_2d(u, params, eps)
    return staircase_result(u, params, eps).function


def _staircase_2d(u, params, eps):
    from . import slicer

    if isinstance(u, slicer.Ridge):
        lo, hi = u._projection()
        prof = u.profile.with_domain(OpenSet1D.interval(lo, hi))
        return slicer.Ridge(staircase(prof, params, eps).with_domain(u.profile.domain),
                            u.direction, u.domain)
    if isinstance(u, (slicer.Indicator, slicer.Radial, slicer.Constant2D)):
        return u
    if isinstance(u, slicer.SumBV2D):
        return slicer.SumBV2D([_staircase_2d(t, params, eps) for t in u.terms])
    raise UnsupportedFormError(f"no staircase for {type(u).__name__}")


# ----------------------------------------------------------- mollifying

def _bump(s):
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def mollify(u, delta, samples=MOLLIFIER_SAMPLES):
    """Convolution of u with a smooth bump of radius delta, as a PCHIP spline.

    The result lives on the delta-neighbourhood of the domain hull, where
    the smeared derivative is fully contained. Cell averages of u come from
    its exact primitive, so jumps and Cantor parts are handled exactly up to
    the sampling step delta / samples.
    """
    if not delta > 0:
        raise ParameterError("delta must be positive")
    W = u.domain
    if not W.bounded or delta > W.upper - W.lower:
        raise ParameterError("delta must not exceed the domain length")
    step = delta / samples
    a, b = W.lower - 2 * delta, W.upper + 2 * delta
    n = int(math.ceil((b - a) / step))
    edges = a + step * np.arange(n + 1)
    avg = np.diff(u._primitive(edges)) / step
    # kernel masses on the same grid, centred
    ke = step * np.arange(-samples, samples + 1)
    kmid = 0.5 * (ke[:-1] + ke[1:]) / delta
    kern = _bump(kmid)
    kern /= kern.sum()
    conv = fftconvolve(avg, kern, mode="same")
    # conv[i] is centred at the right edge of cell i - 1/2 shift; place values on edges
    x = 0.5 * (edges[:-1] + edges[1:]) + 0.5 * step
    lo, hi = W.lower - delta, W.upper + delta
    sel = (x >= lo - step) & (x <= hi + step)
    xs, vs = x[sel], conv[sel]
    form = spline_form(xs, vs)
    s0, s1 = form.support
    dom = OpenSet1D.interval(max(lo, s0), min(hi, s1))
    return BV1D(float(vs[0]), (SmoothPiece((s0, s1), form),), domain=dom, depth=u.depth)


# --------------------------------------------------------------- gluing

def _smoothstep(s):
    s = np.clip(s, 0.0, 1.0)
    return s ** 3 * (10 - 15 * s + 6 * s * s)


def _smoothstep_d(s):
    inside = (s > 0) & (s < 1)
    return np.where(inside, 30 * s * s * (1 - s) ** 2, 0.0)


@dataclass(frozen=True)
class Cutoff:
    """Piecewise quintic cutoff: rises on `rise`, equals 1, falls on `fall`.

    ``rise=None`` means 1 from the left, ``fall=None`` 1 to the right;
    ``level`` is 0 or 1 and multiplies the whole profile.
    """

    rise: tuple = None
    fall: tuple = None
    level: float = 1.0

    def __post_init__(self):
        for r in (self.rise, self.fall):
            if r is not None and not r[0] < r[1]:
                raise ParameterError("cutoff transitions need lo < hi")
        if self.rise and self.fall and self.fall[0] < self.rise[1]:
            raise ParameterError("the fall must start after the rise ends")
        if self.level not in (0.0, 1.0):
            raise ParameterError("level is 0 or 1")

    @classmethod
    def zero(cls):
        return cls(level=0.0)

    @classmethod
    def one(cls):
        return cls()

    @property
    def knots(self):
        out = []
        for r in (self.rise, self.fall):
            if r is not None:
                out += list(r)
        return out

    def value(self, x):
        x = np.asarray(x, float)
        v = np.ones_like(x)
        if self.rise is not None:
            v = v * _smoothstep((x - self.rise[0]) / (self.rise[1] - self.rise[0]))
        if self.fall is not None:
            v = v * (1 - _smoothstep((x - self.fall[0]) / (self.fall[1] - self.fall[0])))
        return self.level * v

    def deriv(self, x):
        x = np.asarray(x, float)
        d = np.zeros_like(x)
        if self.rise is not None:
            L = self.rise[1] - self.rise[0]
            d += _smoothstep_d((x - self.rise[0]) / L) / L
        if self.fall is not None:
            L = self.fall[1] - self.fall[0]
            d -= _smoothstep_d((x - self.fall[0]) / L) / L
        return self.level * d

    @property
    def degree(self):
        return 0 if self.level == 0 or (self.rise is None and self.fall is None) else 5


@dataclass(frozen=True)
class GlueResult:
    function: BV1D
    jump_bound: float
    ac_bound: float
    decomposition: DerivDecomp

    @property
    def within_bounds(self):
        d = self.decomposition
        slack = 1e-9 * (1.0 + self.jump_bound + self.ac_bound)
        return d.jump <= self.jump_bound + slack and d.abs <= self.ac_bound + slack


def _form_degree(u):
    deg = 0
    for p in u.pieces:
        if isinstance(p.form, SineForm):
            raise UnsupportedFormError("gluing is limited to piecewise polynomial inputs")
        deg = max(deg, p.form.degree)
    if u.cantor:
        raise UnsupportedFormError("gluing is limited to functions without a Cantor part")
    return deg


def _internal_knots(u, lo, hi):
    pts = [u.breakpoints(lo, hi)]
    for p in u.pieces:
        k = p.form.knots
        pts.append(k[(k > lo) & (k < hi)])
    return np.concatenate(pts) if pts else np.empty(0)


def glue_result(eta, w, v):
    """eta * w + (1 - eta) * v with Leibniz bounds for its derivative parts.

    jump_bound = sum of eta |jumps of w| + (1 - eta) |jumps of v|;
    ac_bound = int eta |w'| + int (1 - eta) |v'| + int |eta'| |w - v|.
    """
    if w.domain != v.domain:
        raise DomainError("glue needs a shared domain")
    if eta.level == 0:
        return GlueResult(v, *_leibniz(eta, w, v), variation_decomposition(v))
    if eta.rise is None and eta.fall is None:
        return GlueResult(w, *_leibniz(eta, w, v), variation_decomposition(w))
    W = v.domain
    lo, hi = W.lower, W.upper
    deg = eta.degree + max(_form_degree(w), _form_degree(v))
    cuts = np.concatenate([[lo, hi], _internal_knots(w, lo, hi), _internal_knots(v, lo, hi),
                           [k for k in eta.knots if lo < k < hi]])
    knots = np.unique(cuts)
    knots = knots[np.concatenate([[True], np.diff(knots) > 1e-14 * max(1.0, hi - lo)])]
    knots[-1] = hi
    a, L = knots[:-1], np.diff(knots)
    # exact interpolation of the segment polynomials at Chebyshev nodes
    m = deg + 1
    nodes = 0.5 * (1 - np.cos(np.pi * (np.arange(m) + 0.5) / m))
    x = a[:, None] + L[:, None] * nodes
    g = lambda z: v.eval_unchecked(z) + eta.value(z) * (w.eval_unchecked(z) - v.eval_unchecked(z))
    vals = g(x.ravel()).reshape(x.shape)
    vand = np.vander(nodes, m, increasing=True)
    q = np.linalg.solve(vand, vals.T)  # coefficients in tau = (t - a) / L
    c = (q / L[None, :] ** np.arange(m)[:, None])[::-1]
    form = PPolyForm(knots, c)
    left = float(form.value(np.array([lo]))[0])
    locs, hts = [], []
    for p in sorted(set(w.jump_locations) | set(v.jump_locations)):
        if lo < p < hi:
            e = float(eta.value(np.array([p]))[0])
            hw = w.right_limit(p) - w.left_limit(p)
            hv = v.right_limit(p) - v.left_limit(p)
            locs.append(p)
            hts.append(e * hw + (1 - e) * hv)
    out = BV1D(left, (SmoothPiece((lo, hi), _make_continuous(form, locs)),), tuple(locs),
               tuple(hts), (), W, v.depth)
    return GlueResult(out, *_leibniz(eta, w, v), variation_decomposition(out))


def _make_continuous(form, locs):
    """Shift segments so the form is continuous; jumps are carried separately."""
    if not locs:
        return form
    # remove the value discontinuity at each jump knot by shifting later segments
    x, c = form.knots, form.coefficients.copy()
    h = np.diff(x)
    for i in range(1, x.size - 1):
        right = c[-1, i]
        left = sum(c[k, i - 1] * h[i - 1] ** (c.shape[0] - 1 - k) for k in range(c.shape[0]))
        c[-1, i:] += left - right
    return PPolyForm(x, c)


def _leibniz(eta, w, v):
    W = v.domain
    jb = 0.0
    for g, weight in ((w, lambda e: e), (v, lambda e: 1 - e)):
        for p, hgt in zip(g.jump_locations, g.jump_heights):
            if W.contains(p):
                jb += weight(float(eta.value(np.array([p]))[0])) * abs(hgt)
    lo, hi = W.lower, W.upper
    cuts = np.unique(np.concatenate([[lo, hi], _internal_knots(w, lo, hi),
                                     _internal_knots(v, lo, hi),
                                     [k for k in eta.knots if lo < k < hi]]))
    a, b = cuts[:-1], cuts[1:]

    def integrand(x):
        e = eta.value(x)
        return (e * np.abs(w.ac_deriv(x)) + (1 - e) * np.abs(v.ac_deriv(x))
                + np.abs(eta.deriv(x)) * np.abs(w.eval_unchecked(x) - v.eval_unchecked(x)))

    val, err = adaptive_gl(integrand, a, b, 1e-12)
    return jb, val + err


def glue(eta, w, v):
    return glue_result(eta, w, v).function


# --------------------------------------------------------------- family

@dataclass
class RecoveryStage:
    k: int
    lam: float
    function: object
    decomposition: DerivDecomp
    target: float
    f_value: float
    f_error: float
    f_tail: float
    area_gap: float
    l1_gap: float
    verified: bool
    runtime_ms: float = 0.0

    @property
    def f_limit_certificate(self):
        """Certified upper bound of F(u_k) at lambda_k."""
        return self.f_value + self.f_error

    def to_dict(self):
        d = self.decomposition
        out = {"k": self.k, "lambda": self.lam, "abs": d.abs, "jump": d.jump,
               "cantor": d.cantor, "target": self.target, "f_value": self.f_value,
               "f_error": self.f_error, "f_tail": self.f_tail,
               "f_limit_certificate": self.f_limit_certificate,
               "area_gap": self.area_gap, "l1_gap": self.l1_gap,
               "verified": self.verified, "runtime_ms": self.runtime_ms}
        if isinstance(self.function, BV1D):
            out["function"] = catalog.to_dict(self.function)
        return out


@dataclass
class RecoveryFamily:
    stages: list
    gamma: float
    method: str
    limit: float
    meta: dict = field(default_factory=dict)

    def lookup(self, lam):
        """Stage used at lam: the last one with lambda_k <= lam (None below the first)."""
        chosen = None
        for s in self.stages:
            if s.lam <= lam:
                chosen = s
        return chosen

    def function_at(self, lam):
        s = self.lookup(lam)
        return None if s is None else s.function

    @property
    def lambdas(self):
        return [s.lam for s in self.stages]

    def to_dict(self):
        return {"gamma": self.gamma, "method": self.method, "limit": self.limit,
                "meta": self.meta, "stages": [s.to_dict() for s in self.stages]}

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=1)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_dict(cls, d):
        stages = []
        for s in d["stages"]:
            fn = catalog.from_dict(s["function"]) if "function" in s else None
            stages.append(RecoveryStage(
                s["k"], s["lambda"], fn, DerivDecomp(s["abs"], s["jump"], s["cantor"]),
                s["target"], s["f_value"], s["f_error"], s["f_tail"], s["area_gap"],
                s["l1_gap"], s["verified"], s.get("runtime_ms", 0.0)))
        return cls(stages, d["gamma"], d["method"], d["limit"], d.get("meta", {}))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def sbv_limit(dec, gamma, n=1):
    """C_n/gamma |D^a| + C_n/(gamma + 1) |D^s| with C_1 = 2, C_2 = 4."""
    from .slicer import c_n

    c = c_n(n)
    return c / gamma * dec.abs + c / (gamma + 1) * dec.singular


def _parts(u):
    ac = BV1D(0.0, u.pieces, domain=u.domain, depth=u.depth)
    jumps = BV1D(u.base, (), u.jump_locations, u.jump_heights, (), u.domain, u.depth)
    cant = BV1D(0.0, (), (), (), u.cantor, u.domain, u.depth)
    return ac, jumps, cant


def _stage_function(u, k, method, level_samples):
    if method == "split":
        ac, jumps, cant = _parts(u)
        if not cant.cantor:
            return u
        lo, hi = _sup_inf(cant, cant.domain)
        M = 0.5 * (hi - lo)
        K = k * max(1, math.ceil(2 * M - 1e-12))
        stair = staircase(cant, StaircaseParams(M, K, level_samples, 0.5 * (hi + lo)))
        return ac + jumps + stair
    if method == "full":
        lo, hi = _sup_inf(u, u.domain)
        if hi - lo <= 0:
            return u
        M = 0.5 * (hi - lo)
        K = k * max(1, math.ceil(2 * M - 1e-12))
        return staircase(u, StaircaseParams(M, K, level_samples, 0.5 * (hi + lo)))
    raise ParameterError(f"unknown recovery method {method!r}")


def _stage_function_2d(u, k, method, level_samples):
    from . import slicer

    if isinstance(u, slicer.SumBV2D):
        return slicer.SumBV2D([_stage_function_2d(t, k, method, level_samples) for t in u.terms])
    if isinstance(u, slicer.Ridge):
        lo, hi = u._projection()
        prof = u.profile.with_domain(OpenSet1D.interval(lo, hi))
        new = _stage_function(prof, k, method, level_samples).with_domain(u.profile.domain)
        return slicer.Ridge(new, u.direction, u.domain)
    return u


def build_recovery_family(u, gamma, stages=DEFAULT_STAGES, method="split", rtol=1e-3,
                          lam_max=LAMBDA_MAX, level_samples=DEFAULT_LEVEL_SAMPLES,
                          quad=None, tail_factor=4.0):
    """Stages (lambda_k, u_k) with F(u_k) certified within 1/k of its SBV limit.

    method="split" keeps the absolutely continuous and jump parts of u and
    replaces only the Cantor part by a level staircase; method="full"
    replaces the whole function, which gives the larger family whose limit
    is C_n/(gamma + 1) |Du|.
    """
    check_gamma(gamma)
    two_d = not isinstance(u, BV1D)
    if two_d:
        from . import slicer

        dec_u = slicer.variation_decomposition_2d(u, quad)
        n = 2
    else:
        dec_u = variation_decomposition(u)
        area_u = area_functional(u)
        n = 1
    if method == "split":
        limit = sbv_limit(DerivDecomp(dec_u.abs, dec_u.singular, 0.0), gamma, n)
    else:
        limit = sbv_limit(DerivDecomp(0.0, dec_u.total, 0.0), gamma, n)
    out = []
    prev = 0.0
    for k in stages:
        t0 = time.perf_counter()
        if two_d:
            uk = _stage_function_2d(u, k, method, level_samples)
            dec = slicer.variation_decomposition_2d(uk, quad)
            area_gap = l1_gap = float("nan")
        else:
            uk = _stage_function(u, k, method, level_samples)
            dec = variation_decomposition(uk)
            area_gap = abs(area_functional(uk) - area_u)
            l1_gap = l1_distance(uk, u, tol=1e-9)[0]
        target = sbv_limit(dec, gamma, n)

        def F(lam):
            if two_d:
                e = slicer.f_eval_2d(uk, gamma, lam, quad)
            else:
                e = f_eval(uk, None, gamma, lam, rtol=rtol, warn=False)
            return e.value, e.error_bound

        # lambda_k must exceed k; doubling keeps the thresholds increasing
        lam = max(2.0 * k, 2.0 * prev)
        verified = False
        val, err = math.nan, math.inf
        while lam <= lam_max:
            val, err = F(lam)
            if abs(val - target) + err <= 1.0 / k:
                verified = True
                break
            lam *= 2.0
        if not verified:
            lam = min(lam, lam_max)
            if math.isnan(val):
                # the search started above lam_max: record the value there
                val, err = F(lam)
        tail_val, tail_err = F(lam * tail_factor)
        out.append(RecoveryStage(k, lam, uk, dec, target, val, err, tail_val + tail_err,
                                 area_gap, l1_gap, verified,
                                 1e3 * (time.perf_counter() - t0)))
        prev = lam
    return RecoveryFamily(out, float(gamma), method, float(limit),
                          {"stages": list(stages), "rtol": rtol})
