"""Exact one-dimensional BV functions.

A :class:`BV1D` is stored through its derivative decomposition::

    u(x) = base + AC(x) + sum_j h_j H(x - p_j) + sum_k K_k(x)

where AC is assembled from non-overlapping smooth pieces (each piece
contributes its increment, so AC is continuous by construction), H is the
unit step with H(0) = 1/2 and K_k are windowed, rescaled Cantor functions.
All evaluation and enclosure methods are vectorized.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from ..errors import DomainError, UnsupportedFormError
from .cantor import DEFAULT_DEPTH, cantor_array, cantor_error_bound, cantor_integral_array
from .forms import PPolyForm, SineForm, _compose_affine, _SparseTable
from .sets import OpenSet1D


@dataclass(frozen=True)
class DerivDecomp:
    """Masses |D^a u|(W), |D^j u|(W), |D^c u|(W)."""

    abs: float
    jump: float
    cantor: float

    @property
    def total(self):
        return self.abs + self.jump + self.cantor

    @property
    def singular(self):
        return self.jump + self.cantor


@dataclass(frozen=True)
class SmoothPiece:
    support: tuple
    form: object

    def __post_init__(self):
        a, b = map(float, self.support)
        if not a < b:
            raise DomainError("piece support must be a nondegenerate interval")
        if not isinstance(self.form, (PPolyForm, SineForm)):
            raise UnsupportedFormError(f"{type(self.form).__name__} is not a catalog form")
        object.__setattr__(self, "support", (a, b))

    @property
    def increment(self):
        a, b = self.support
        return float(self.form.value(np.array([b]))[0] - self.form.value(np.array([a]))[0])


@dataclass(frozen=True)
class CantorComponent:
    """mass * (C(s(clamp(x, p, q))) - C(s(p))), s mapping [a, b] onto [0, 1].

    The window [p, q] defaults to the full support; a narrower window
    appears after truncation or restriction.
    """

    support: tuple
    mass: float
    window: tuple = None

    def __post_init__(self):
        a, b = map(float, self.support)
        if not a < b:
            raise DomainError("Cantor support must be a nondegenerate interval")
        if self.mass == 0:
            raise DomainError("Cantor mass must be nonzero")
        w = self.window if self.window is not None else (a, b)
        p, q = max(float(w[0]), a), min(float(w[1]), b)
        object.__setattr__(self, "support", (a, b))
        object.__setattr__(self, "window", (p, q))
        object.__setattr__(self, "mass", float(self.mass))

    def _unit(self, x):
        a, b = self.support
        p, q = self.window
        return (np.clip(x, p, q) - a) / (b - a)

    @property
    def _offset(self):
        a, b = self.support
        return float(cantor_array(np.array([(self.window[0] - a) / (b - a)]))[0])

    def value(self, x):
        x = np.asarray(x, float)
        return self.mass * (cantor_array(self._unit(x)) - self._offset)

    def primitive(self, x):
        """Integral of the component over (-inf, x]."""
        x = np.asarray(x, float)
        a, b = self.support
        p, q = self.window
        L = b - a
        c0 = self._offset
        s = (np.clip(x, p, q) - a) / L
        sp = (p - a) / L
        inner = L * (cantor_integral_array(s) - cantor_integral_array(np.array(sp))) \
            - c0 * (np.clip(x, p, q) - p)
        tail = (self.value(np.array(q)) / self.mass) * np.maximum(x - q, 0.0)
        return self.mass * (inner + tail)

    @property
    def total_mass(self):
        """Signed increment over the window."""
        return float(self.value(np.array([self.window[1]]))[0])

    def reparam(self, scale, shift):
        a, b = self.support
        p, q = self.window
        na, nb = sorted(((a - shift) / scale, (b - shift) / scale))
        np_, nq = sorted(((p - shift) / scale, (q - shift) / scale))
        if scale > 0:
            return CantorComponent((na, nb), self.mass, (np_, nq))
        # C(1 - s) = 1 - C(s): orientation flip negates the mass
        return CantorComponent((na, nb), -self.mass, (np_, nq))


def _as_array(x):
    return np.atleast_1d(np.asarray(x, dtype=float))


@dataclass(frozen=True, eq=False)
class BV1D:
    base: float = 0.0
    pieces: tuple = ()
    jump_locations: tuple = ()
    jump_heights: tuple = ()
    cantor: tuple = ()
    domain: OpenSet1D = field(default_factory=lambda: OpenSet1D.interval(0.0, 1.0))
    depth: int = DEFAULT_DEPTH

    def __post_init__(self):
        dom = OpenSet1D.coerce(self.domain)
        object.__setattr__(self, "domain", dom)
        pieces = tuple(sorted(self.pieces, key=lambda p: p.support[0]))
        for p0, p1 in zip(pieces, pieces[1:]):
            if p1.support[0] < p0.support[1] - 1e-15 * max(1.0, abs(p0.support[1])):
                raise DomainError("smooth pieces must not overlap")
        object.__setattr__(self, "pieces", pieces)
        locs = np.asarray(self.jump_locations, float).ravel()
        hts = np.asarray(self.jump_heights, float).ravel()
        if locs.size != hts.size:
            raise DomainError("jump locations and heights differ in length")
        order = np.argsort(locs, kind="stable")
        locs, hts = locs[order], hts[order]
        if locs.size:
            # merge coincident jumps, drop zero heights
            uniq, inv = np.unique(locs, return_inverse=True)
            merged = np.zeros(uniq.size)
            np.add.at(merged, inv, hts)
            keep = merged != 0
            locs, hts = uniq[keep], merged[keep]
        object.__setattr__(self, "jump_locations", tuple(locs.tolist()))
        object.__setattr__(self, "jump_heights", tuple(hts.tolist()))
        merged = {}
        for comp in self.cantor:
            key = (comp.support, comp.window)
            merged[key] = merged.get(key, 0.0) + comp.mass
        object.__setattr__(self, "cantor", tuple(
            CantorComponent(k[0], m, k[1]) for k, m in merged.items() if m != 0))
        object.__setattr__(self, "base", float(self.base))
        # cached arrays
        object.__setattr__(self, "_cache", {})
        object.__setattr__(self, "_p", locs)
        object.__setattr__(self, "_h", hts)
        object.__setattr__(self, "_cs", np.concatenate([[0.0], np.cumsum(hts)]))
        object.__setattr__(self, "_cs_pos", np.concatenate([[0.0], np.cumsum(np.maximum(hts, 0))]))
        object.__setattr__(self, "_cs_neg", np.concatenate([[0.0], np.cumsum(np.minimum(hts, 0))]))
        starts = np.array([p.support[0] for p in pieces])
        ends = np.array([p.support[1] for p in pieces])
        incs = np.array([p.increment for p in pieces])
        object.__setattr__(self, "_starts", starts)
        object.__setattr__(self, "_ends", ends)
        object.__setattr__(self, "_offsets", np.concatenate([[0.0], np.cumsum(incs)]))
        object.__setattr__(self, "_left_vals", np.array(
            [float(p.form.value(np.array([p.support[0]]))[0]) for p in pieces]))

    # ----------------------------------------------------------------- basics
    @property
    def pure_singular(self):
        return not self.pieces

    @property
    def has_cantor(self):
        return bool(self.cantor)

    def _jump_table(self):
        if "jt" not in self._cache:
            self._cache["jt"] = _SparseTable(self._cs, self._cs)
        return self._cache["jt"]

    def check_domain(self, x):
        x = _as_array(x)
        ok = np.zeros(x.shape, bool)
        for a, b in self.domain.intervals:
            ok |= (x >= a) & (x <= b)
        if not ok.all():
            bad = x[~ok][0]
            raise DomainError(f"x = {bad!r} lies outside the closure of the domain")

    # --------------------------------------------------------- AC component
    def ac_value(self, x):
        x = _as_array(x)
        out = np.zeros(x.shape)
        if not self.pieces:
            return out
        idx = np.searchsorted(self._starts, x, side="right") - 1
        inside = (idx >= 0) & (x <= self._ends[np.maximum(idx, 0)])
        # past the end of piece idx: full increment through idx
        out[:] = self._offsets[idx + 1]
        for i, piece in enumerate(self.pieces):
            sel = inside & (idx == i)
            if sel.any():
                out[sel] = self._offsets[i] + piece.form.value(x[sel]) - self._left_vals[i]
        return out

    def ac_deriv(self, x):
        x = _as_array(x)
        out = np.zeros(x.shape)
        for piece in self.pieces:
            a, b = piece.support
            sel = (x >= a) & (x <= b)
            if sel.any():
                out[sel] = piece.form.deriv(x[sel])
        return out

    def ac_range(self, a, b):
        """Enclosure of AC on [a, b]."""
        a, b = _as_array(a), _as_array(b)
        va, vb = self.ac_value(a), self.ac_value(b)
        lo, hi = np.minimum(va, vb), np.maximum(va, vb)
        for i, piece in enumerate(self.pieces):
            pa, pb = piece.support
            sel = (a < pb) & (b > pa)
            if sel.any():
                l, h = piece.form.range(np.maximum(a[sel], pa), np.minimum(b[sel], pb))
                shift = self._offsets[i] - self._left_vals[i]
                lo[sel] = np.minimum(lo[sel], l + shift)
                hi[sel] = np.maximum(hi[sel], h + shift)
        return lo, hi

    def ac_slope_range(self, a, b):
        """Enclosure of AC' on [a, b] (0 included where no piece covers)."""
        a, b = _as_array(a), _as_array(b)
        lo = np.full(a.shape, np.inf)
        hi = np.full(a.shape, -np.inf)
        covered = np.zeros(a.shape)
        for piece in self.pieces:
            pa, pb = piece.support
            sel = (a < pb) & (b > pa)
            if sel.any():
                ca, cb = np.maximum(a[sel], pa), np.minimum(b[sel], pb)
                l, h = piece.form.deriv_range(ca, cb)
                lo[sel] = np.minimum(lo[sel], l)
                hi[sel] = np.maximum(hi[sel], h)
                covered[sel] += cb - ca
        gap = covered < (b - a) * (1 - 1e-12)
        lo[gap] = np.minimum(lo[gap], 0.0)
        hi[gap] = np.maximum(hi[gap], 0.0)
        return lo, hi

    def ac_variation(self, a, b):
        a, b = _as_array(a), _as_array(b)
        out = np.zeros(a.shape)
        for piece in self.pieces:
            pa, pb = piece.support
            sel = (a < pb) & (b > pa)
            if sel.any():
                out[sel] += piece.form.variation(np.maximum(a[sel], pa), np.minimum(b[sel], pb))
        return out

    # ------------------------------------------------------ jump component
    def jump_value(self, x, side=0):
        """Jump part; side=0 midpoint, +1 right limit, -1 left limit."""
        x = _as_array(x)
        r = self._cs[np.searchsorted(self._p, x, side="right")]
        if side > 0:
            return r
        left = self._cs[np.searchsorted(self._p, x, side="left")]
        return left if side < 0 else 0.5 * (left + r)

    def jump_range_open(self, a, b):
        a, b = _as_array(a), _as_array(b)
        i = np.searchsorted(self._p, a, side="right")
        j = np.searchsorted(self._p, b, side="left")
        lo = self._cs[i].copy()
        hi = lo.copy()
        more = j > i
        if more.any():
            l, h = self._jump_table().query(i[more], j[more])
            lo[more], hi[more] = l, h
        return lo, hi

    def jump_increment_bounds_open(self, a, b):
        """Bounds on J(x) - J(y) for a < y < x < b."""
        a, b = _as_array(a), _as_array(b)
        i = np.searchsorted(self._p, a, side="right")
        j = np.searchsorted(self._p, b, side="left")
        return self._cs_neg[j] - self._cs_neg[i], self._cs_pos[j] - self._cs_pos[i]

    # ---------------------------------------------------- Cantor component
    def cantor_value(self, x):
        x = _as_array(x)
        out = np.zeros(x.shape)
        for comp in self.cantor:
            out += comp.value(x)
        return out

    def cantor_range(self, a, b):
        a, b = _as_array(a), _as_array(b)
        lo = np.zeros(a.shape)
        hi = np.zeros(a.shape)
        pad = cantor_error_bound(self.depth)
        for comp in self.cantor:
            va, vb = comp.value(a), comp.value(b)
            # equal digit values: both ends lie on one plateau
            slack = np.where(va == vb, 0.0, pad * abs(comp.mass))
            lo += np.minimum(va, vb) - slack
            hi += np.maximum(va, vb) + slack
        return lo, hi

    def cantor_increment_bounds(self, a, b):
        """Bounds on K(x) - K(y) for a < y < x < b (monotone components)."""
        a, b = _as_array(a), _as_array(b)
        lo = np.zeros(a.shape)
        hi = np.zeros(a.shape)
        pad = cantor_error_bound(self.depth)
        for comp in self.cantor:
            d = comp.value(b) - comp.value(a)
            slack = np.where(d == 0, 0.0, 2 * pad * abs(comp.mass))
            lo += np.minimum(d, 0.0) - slack
            hi += np.maximum(d, 0.0) + slack
        return lo, hi

    # ------------------------------------------------------------ evaluation
    def _value(self, x, side=0):
        return self.base + self.ac_value(x) + self.jump_value(x, side) + self.cantor_value(x)

    def __call__(self, x):
        """Precise representative: midpoint of one-sided limits at jumps."""
        scalar = np.ndim(x) == 0
        self.check_domain(x)
        out = self._value(_as_array(x))
        return float(out[0]) if scalar else out.reshape(np.shape(x))

    def eval_unchecked(self, x, side=0):
        return self._value(_as_array(x), side)

    def right_limit(self, x):
        return float(self._value(_as_array(x), 1)[0])

    def left_limit(self, x):
        return float(self._value(_as_array(x), -1)[0])

    def range_open(self, a, b):
        """Enclosure of u on the open interval (a, b)."""
        l0, h0 = self.ac_range(a, b)
        l1, h1 = self.jump_range_open(a, b)
        l2, h2 = self.cantor_range(a, b)
        lo = self.base + l0 + l1 + l2
        hi = self.base + h0 + h1 + h2
        pad = 1e-13 * (hi - lo) + 4e-16 * (np.abs(lo) + np.abs(hi))
        return lo - pad, hi + pad

    def singular_range_open(self, a, b):
        l1, h1 = self.jump_range_open(a, b)
        l2, h2 = self.cantor_range(a, b)
        return l1 + l2, h1 + h2

    def singular_increment_bounds(self, a, b):
        l1, h1 = self.jump_increment_bounds_open(a, b)
        l2, h2 = self.cantor_increment_bounds(a, b)
        return l1 + l2, h1 + h2

    def integral(self, a, b):
        """Exact integral of u over [a, b] (vectorized, a <= b)."""
        a, b = _as_array(a), _as_array(b)
        return self._primitive(b) - self._primitive(a)

    def _primitive(self, x):
        out = self.base * x
        # AC part: constant offsets between pieces, shifted forms inside
        if self.pieces:
            for i, piece in enumerate(self.pieces):
                s, e = piece.support
                lo = np.full(x.shape, s)
                hi = np.clip(x, s, e)
                shift = self._offsets[i] - self._left_vals[i]
                out = out + piece.form.integral(lo, hi) + shift * (hi - lo)
                nxt = self._starts[i + 1] if i + 1 < len(self.pieces) else np.inf
                out = out + self._offsets[i + 1] * np.maximum(np.minimum(x, nxt) - e, 0.0)
        for p, h in zip(self.jump_locations, self.jump_heights):
            out = out + h * np.maximum(x - p, 0.0)
        for comp in self.cantor:
            out = out + comp.primitive(x)
        return out

    # ------------------------------------------------------------ structure
    def breakpoints(self, lo=-math.inf, hi=math.inf):
        """Sorted feature points (piece ends, jumps, Cantor ends) inside (lo, hi)."""
        pts = set(self.jump_locations)
        for piece in self.pieces:
            pts.update(piece.support)
        for comp in self.cantor:
            pts.update(comp.window)
        arr = np.array(sorted(p for p in pts if lo < p < hi))
        return arr

    def cantor_triadic_cells(self):
        """(support, window) of each Cantor component, for triadic refinement."""
        return [(c.support, c.window) for c in self.cantor]

    def oscillation_bound(self, W=None):
        """Upper bound on sup |u(x) - u(y)| over W (default: the domain)."""
        W = self.domain if W is None else OpenSet1D.coerce(W)
        los, his = [], []
        for a, b in W.intervals:
            lo, hi = self.range_open(np.array([a]), np.array([b]))
            los.append(lo[0])
            his.append(hi[0])
        return max(his) - min(los)

    # --------------------------------------------------------- transforms
    def with_domain(self, domain):
        return BV1D(self.base, self.pieces, self.jump_locations, self.jump_heights,
                    self.cantor, domain, self.depth)

    def scaled(self, c):
        """c * u."""
        c = float(c)
        if c == 0:
            return BV1D(0.0, domain=self.domain)
        pieces = tuple(SmoothPiece(p.support, p.form.scaled(c)) for p in self.pieces)
        comps = tuple(CantorComponent(k.support, k.mass * c, k.window) for k in self.cantor)
        return BV1D(self.base * c, pieces, self.jump_locations,
                    tuple(h * c for h in self.jump_heights), comps, self.domain, self.depth)

    def shifted(self, const):
        """u + const."""
        return BV1D(self.base + const, self.pieces, self.jump_locations,
                    self.jump_heights, self.cantor, self.domain, self.depth)

    def reparam(self, scale, shift, domain=None):
        """The function t -> u(scale * t + shift)."""
        scale, shift = float(scale), float(shift)
        if scale == 0:
            raise DomainError("reparametrization scale must be nonzero")
        if domain is None:
            domain = OpenSet1D(tuple(sorted(((a - shift) / scale, (b - shift) / scale))
                                     for a, b in self.domain.intervals))
        pieces = []
        for p in self.pieces:
            a, b = sorted(((p.support[0] - shift) / scale, (p.support[1] - shift) / scale))
            pieces.append(SmoothPiece((a, b), p.form.reparam(scale, shift)))
        locs = [(x - shift) / scale for x in self.jump_locations]
        hts = [h if scale > 0 else -h for h in self.jump_heights]
        comps = [c.reparam(scale, shift) for c in self.cantor]
        draft = BV1D(0.0, tuple(pieces), locs, hts, tuple(comps), domain, self.depth)
        # fix the additive constant at a point that is not a jump
        t0 = _continuity_point(draft, domain)
        x0 = scale * t0 + shift
        base = float(self._value(_as_array(x0))[0] - draft._value(_as_array(t0))[0])
        return BV1D(base, draft.pieces, draft.jump_locations, draft.jump_heights,
                    draft.cantor, domain, self.depth)

    def __add__(self, other):
        if isinstance(other, (int, float)):
            return self.shifted(other)
        if not isinstance(other, BV1D):
            return NotImplemented
        domain = self.domain if self.domain.covers(other.domain) else other.domain
        if not (self.domain.covers(domain) and other.domain.covers(domain)):
            domain = self.domain.intersect(other.domain)
            if domain is None:
                raise DomainError("summands have disjoint domains")
        pieces = _merge_pieces(self.pieces, other.pieces)
        return BV1D(self.base + other.base, pieces,
                    self.jump_locations + other.jump_locations,
                    self.jump_heights + other.jump_heights,
                    self.cantor + other.cantor, domain, max(self.depth, other.depth))

    __radd__ = __add__

    def __neg__(self):
        return self.scaled(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, (int, float)):
            return self.scaled(c)
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, BV1D):
            return NotImplemented
        from .catalog import to_dict
        return to_dict(self) == to_dict(other)

    def __hash__(self):
        return id(self)

    def __repr__(self):
        return (f"BV1D(base={self.base}, pieces={len(self.pieces)}, jumps={len(self.jump_locations)}, "
                f"cantor={len(self.cantor)}, domain={self.domain.intervals})")


def _continuity_point(u, domain):
    a, b = domain.intervals[0]
    if not math.isfinite(a):
        a = min(b, 0.0) - 1.0
    if not math.isfinite(b):
        b = a + 2.0
    for frac in (0.5, 0.37, 0.61, 0.29, 0.83, 0.11):
        t = a + frac * (b - a)
        if t not in u.jump_locations:
            return t
    return a + 0.4142135 * (b - a)


def _ppoly_sum(forms, lo, hi):
    """Single piecewise polynomial equal to the sum of `forms` on [lo, hi]."""
    knots = {lo, hi}
    for f in forms:
        knots.update(k for k in f.knots if lo < k < hi)
    x = np.array(sorted(knots))
    deg = max(f.degree for f in forms)
    c = np.zeros((deg + 1, x.size - 1))
    left = x[:-1]
    for f in forms:
        i = np.clip(np.searchsorted(f.knots, left, side="right") - 1, 0, f.knots.size - 2)
        local = _compose_affine(f.coefficients[:, i], left - f.knots[i], 1.0)
        c[deg - f.degree:] += local
    return PPolyForm(x, c)


def _merge_pieces(first, second):
    if not first:
        return second
    if not second:
        return first
    allp = list(first) + list(second)
    cuts = sorted({v for p in allp for v in p.support})
    out = []
    for lo, hi in zip(cuts, cuts[1:]):
        cover = [p for p in allp if p.support[0] <= lo and hi <= p.support[1]]
        if not cover:
            continue
        if len(cover) == 1:
            out.append(SmoothPiece((lo, hi), cover[0].form))
            continue
        if not all(isinstance(p.form, PPolyForm) for p in cover):
            raise UnsupportedFormError("only polynomial/spline pieces can overlap in a sum")
        out.append(SmoothPiece((lo, hi), _ppoly_sum([p.form for p in cover], lo, hi)))
    return tuple(out)
