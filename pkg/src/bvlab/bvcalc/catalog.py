"""Constructors for catalog functions and their text (JSON) blocks.

A block is a dict with a ``kind`` in {affine, poly, sine, spline, step,
cantor, sum}, its parameters and an optional ``domain`` (list of open
intervals). ``to_dict`` / ``from_dict`` round-trip every BV1D exactly.
"""

import json

from ..errors import DomainError
from .forms import SineForm, affine_form, form_from_dict, poly_form, spline_form
from .function import BV1D, CantorComponent, SmoothPiece
from .sets import OpenSet1D

UNIT = ((0.0, 1.0),)


def _domain(domain):
    return OpenSet1D.coerce(UNIT if domain is None else domain)


def _support(support, dom):
    if support is None:
        return dom.lower, dom.upper
    return tuple(map(float, support))


def constant(c=0.0, domain=None):
    return BV1D(float(c), domain=_domain(domain))


def affine(slope=1.0, intercept=0.0, domain=None, support=None):
    """slope * x + intercept on `support` (defaults to the domain hull)."""
    dom = _domain(domain)
    a, b = _support(support, dom)
    form = affine_form(slope, (a, b), intercept)
    return BV1D(slope * a + intercept, (SmoothPiece((a, b), form),), domain=dom)


def poly(coefficients, domain=None, support=None):
    """Polynomial with coefficients in increasing powers of x."""
    dom = _domain(domain)
    a, b = _support(support, dom)
    form = poly_form(coefficients, (a, b))
    return BV1D(float(form.value([a])[0]), (SmoothPiece((a, b), form),), domain=dom)


def sine(amplitude=1.0, frequency=1.0, phase=0.0, domain=None, support=None):
    dom = _domain(domain)
    a, b = _support(support, dom)
    form = SineForm(amplitude, frequency, phase)
    return BV1D(float(form.value([a])[0]), (SmoothPiece((a, b), form),), domain=dom)


def spline(knots, values, domain=None):
    """PCHIP interpolant of the samples; the support is [knots[0], knots[-1]]."""
    form = spline_form(knots, values)
    a, b = form.support
    dom = _domain(((a, b),) if domain is None else domain)
    return BV1D(float(values[0]), (SmoothPiece((a, b), form),), domain=dom)


def step(location=0.5, height=1.0, domain=None):
    """height * H(x - location)."""
    return BV1D(0.0, (), (float(location),), (float(height),), domain=_domain(domain))


def steps(locations, heights, domain=None, base=0.0):
    return BV1D(float(base), (), tuple(locations), tuple(heights), domain=_domain(domain))


def cantor(mass=1.0, support=None, domain=None, window=None):
    """mass times the Cantor function rescaled to `support`."""
    dom = _domain(domain)
    a, b = _support(support, dom)
    return BV1D(0.0, cantor=(CantorComponent((a, b), mass, window),), domain=dom)


def sum_of(*terms, domain=None):
    """Sum of BV1D terms (domain defaults to the first term's)."""
    if not terms:
        raise DomainError("sum_of needs at least one term")
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    if domain is not None:
        out = out.with_domain(_domain(domain))
    return out


# ------------------------------------------------------------ serialization

def _term_dicts(u):
    terms = []
    for p in u.pieces:
        d = p.form.to_dict()
        d["support"] = list(p.support)
        terms.append(d)
    for loc, h in zip(u.jump_locations, u.jump_heights):
        terms.append({"kind": "step", "location": loc, "height": h})
    for c in u.cantor:
        terms.append({"kind": "cantor", "mass": c.mass, "support": list(c.support),
                      "window": list(c.window)})
    return terms


def to_dict(u):
    """Lossless block for a BV1D."""
    return {"kind": "sum", "base": u.base, "domain": u.domain.to_list(),
            "depth": u.depth, "terms": _term_dicts(u)}


def from_dict(d):
    """Inverse of :func:`to_dict`; also accepts single-term blocks."""
    kind = d.get("kind")
    dom = _domain(d.get("domain"))
    if kind == "sum":
        if "base" in d:
            pieces, locs, hts, comps = [], [], [], []
            for t in d["terms"]:
                k = t["kind"]
                if k == "step":
                    locs.append(t["location"])
                    hts.append(t["height"])
                elif k == "cantor":
                    comps.append(CantorComponent(tuple(t["support"]), t["mass"],
                                                 tuple(t.get("window") or t["support"])))
                else:
                    sup = tuple(t["support"])
                    pieces.append(SmoothPiece(sup, form_from_dict(t, sup)))
            return BV1D(d["base"], tuple(pieces), tuple(locs), tuple(hts), tuple(comps), dom,
                        d.get("depth", 48))
        terms = [from_dict({**t, "domain": t.get("domain", dom.to_list())}) for t in d["terms"]]
        return sum_of(*terms, domain=dom)
    if kind == "affine":
        return affine(d.get("slope", 1.0), d.get("intercept", 0.0), dom, d.get("support"))
    if kind == "poly":
        return poly(d["coefficients"], dom, d.get("support"))
    if kind == "sine":
        return sine(d.get("amplitude", 1.0), d.get("frequency", 1.0), d.get("phase", 0.0),
                    dom, d.get("support"))
    if kind == "spline":
        return spline(d["knots"], d["values"], dom)
    if kind == "step":
        return step(d.get("location", 0.5), d.get("height", 1.0), dom)
    if kind == "cantor":
        return cantor(d.get("mass", 1.0), d.get("support"), dom, d.get("window"))
    if kind == "constant":
        return constant(d.get("value", 0.0), dom)
    raise DomainError(f"unknown function kind {kind!r}")


def dumps(u):
    return json.dumps(to_dict(u))


def loads(text):
    return from_dict(json.loads(text))
