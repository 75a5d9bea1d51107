"""Derivative decomposition, signed measure, area functional and L1 gaps."""

import math

import numpy as np

from ..errors import DomainError, UnsupportedFormError
from ..quadrature import adaptive_gl
from .function import BV1D, DerivDecomp
from .sets import OpenSet1D

DEFAULT_RADIUS = 1e3
DEFAULT_TOL = 1e-10


def _window(u, W, radius=None):
    W = u.domain if W is None else OpenSet1D.coerce(W)
    if not u.domain.covers(W):
        raise DomainError(f"{W.intervals} is not contained in the domain {u.domain.intervals}")
    if not W.bounded:
        W = W.truncated(DEFAULT_RADIUS if radius is None else radius)
    return W


def _clipped_supports(supports, W):
    """Pieces of each support lying inside W, as arrays (owner, lo, hi)."""
    own, lo, hi = [], [], []
    for k, (a, b) in enumerate(supports):
        for c, d in W.intervals:
            l, h = max(a, c), min(b, d)
            if l < h:
                own.append(k)
                lo.append(l)
                hi.append(h)
    return np.array(own, int), np.array(lo, float), np.array(hi, float)


def variation_decomposition(u, W=None, radius=None):
    """Masses of the absolutely continuous, jump and Cantor parts of Du on W.

    >>> from bvlab.bvcalc.catalog import cantor
    >>> variation_decomposition(cantor(), ((0.0, 1 / 3),)).cantor
    0.5
    """
    W = _window(u, W, radius)
    ac = 0.0
    own, lo, hi = _clipped_supports([p.support for p in u.pieces], W)
    for k in np.unique(own):
        sel = own == k
        ac += float(u.pieces[k].form.variation(lo[sel], hi[sel]).sum())
    jump = 0.0
    for p, h in zip(u.jump_locations, u.jump_heights):
        if W.contains(p):
            jump += abs(h)
    cant = 0.0
    for comp in u.cantor:
        for c, d in W.intervals:
            v = comp.value(np.array([c, d]))
            cant += abs(float(v[1] - v[0]))
    return DerivDecomp(ac, jump, cant)


def total_variation(u, W=None, radius=None):
    return variation_decomposition(u, W, radius).total


def signed_measure(u, a, b):
    """Du((a, b]) = u(b+) - u(a+)."""
    if not (u.domain.closure_contains(a) and u.domain.closure_contains(b)):
        raise DomainError(f"({a}, {b}] is not inside the domain closure")
    if b < a:
        raise DomainError("signed_measure needs a <= b")
    return u.right_limit(b) - u.right_limit(a)


def area_functional(u, W=None, tol=DEFAULT_TOL, radius=None, return_error=False):
    """Integral of sqrt(1 + u'^2) over W plus the singular mass |D^s u|(W)."""
    W = _window(u, W, radius)
    dec = variation_decomposition(u, W)
    value = dec.singular + W.measure
    err = 0.0
    for piece in u.pieces:
        _, lo, hi = _clipped_supports([piece.support], W)
        if lo.size == 0:
            continue
        lo, hi = _subdivide(piece.form, lo, hi)
        f = piece.form

        def excess(x, f=f):
            d = f.deriv(x)
            # sqrt(1 + d^2) - 1 without cancellation
            return d * d / (np.sqrt(1.0 + d * d) + 1.0)

        val, e = adaptive_gl(excess, lo, hi, tol / max(len(u.pieces), 1))
        value += val
        err += e
    return (value, err) if return_error else value


def _subdivide(form, lo, hi):
    """Split at polynomial knots or quarter periods so each cell is smooth."""
    cuts = getattr(form, "knots", None)
    if cuts is None:
        w = abs(form.frequency)
        step = math.pi / (2 * w) if w > 0 else math.inf
        cuts = []
        for a, b in zip(lo, hi):
            if math.isfinite(step):
                cuts.extend(np.arange(a, b, step)[1:])
        cuts = np.array(cuts)
    pts_lo, pts_hi = [], []
    for a, b in zip(lo, hi):
        inner = cuts[(cuts > a) & (cuts < b)]
        edges = np.concatenate([[a], inner, [b]])
        pts_lo.append(edges[:-1])
        pts_hi.append(edges[1:])
    return np.concatenate(pts_lo), np.concatenate(pts_hi)


def l1_distance(v, u, W=None, tol=1e-9, max_cells=2_000_000, radius=None):
    """Certified enclosure of the integral of |v - u| over W.

    Cells on which v - u has a definite sign contribute the exact integral of
    the difference; the others are bisected. Returns ``(value, error)``.
    """
    W = _window(u, W, radius)
    if not v.domain.covers(W):
        raise DomainError("W is not contained in the domain of v")
    try:
        w = v - u
        diffs = [w]
    except UnsupportedFormError:
        diffs = [v, u]

    def enclose(a, b):
        if len(diffs) == 1:
            return w.range_open(a, b)
        lv, hv = v.range_open(a, b)
        lu, hu = u.range_open(a, b)
        return lv - hu, hv - lu

    def integral(a, b):
        if len(diffs) == 1:
            return w.integral(a, b)
        return v.integral(a, b) - u.integral(a, b)

    edges = set()
    for g in (v, u):
        edges.update(g.breakpoints(W.lower, W.upper).tolist())
    a_list, b_list = [], []
    for c, d in W.intervals:
        pts = np.array(sorted({c, d} | {e for e in edges if c < e < d}))
        a_list.append(pts[:-1])
        b_list.append(pts[1:])
    a, b = np.concatenate(a_list), np.concatenate(b_list)
    value = 0.0
    pending_lo = 0.0
    pending_hi = 0.0
    processed = 0
    while a.size:
        lo, hi = enclose(a, b)
        definite = (lo >= 0) | (hi <= 0)
        if definite.any():
            value += float(np.abs(integral(a[definite], b[definite])).sum())
        a, b, lo, hi = a[~definite], b[~definite], lo[~definite], hi[~definite]
        if a.size == 0:
            break
        length = b - a
        ints = np.abs(integral(a, b))
        bound = np.maximum(np.abs(lo), np.abs(hi)) * length
        slack = float((bound - ints).sum())
        processed += a.size
        if slack <= tol or processed > max_cells or length.max() < 1e-15 * (1 + abs(W.upper)):
            pending_lo = float(ints.sum())
            pending_hi = float(bound.sum())
            break
        m = 0.5 * (a + b)
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
    mid = 0.5 * (pending_lo + pending_hi)
    return value + mid, 0.5 * (pending_hi - pending_lo) + 1e-14 * (value + mid)


def area_strict_gap(v, u, W=None, tol=1e-9, radius=None):
    """(integral of |v - u|, |A(v) - A(u)|) on W, A the area functional."""
    if v.domain != u.domain:
        raise DomainError("area_strict_gap needs a shared domain")
    l1, _ = l1_distance(v, u, W, tol, radius=radius)
    gap = abs(area_functional(v, W, radius=radius) - area_functional(u, W, radius=radius))
    return l1, gap


def is_bv1d(obj):
    return isinstance(obj, BV1D)
