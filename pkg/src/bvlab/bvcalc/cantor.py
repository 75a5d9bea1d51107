"""Middle-thirds Cantor-Lebesgue function via ternary digits.

The scalar routine works on the exact binary expansion of the input float
(integer arithmetic), the vectorized one on a 2**-62 fixed-point grid with
unsigned 64-bit integers, so neither accumulates floating-point drift while
peeling off ternary digits.
"""

from fractions import Fraction
import math

import numpy as np

from ..errors import DomainError

DEFAULT_DEPTH = 48

_FIX_BITS = 62
_FIX_ONE = np.uint64(1) << np.uint64(_FIX_BITS)

# Hoelder modulus of the Cantor function is 2 * |dx| ** (log 2 / log 3);
# inputs below 2**-10 lose bits when mapped to the 2**-62 grid.
FIXED_POINT_SLACK = 2.0 * 2.0 ** (-_FIX_BITS * np.log(2) / np.log(3))


# floats within SNAP_ULPS ulps of a triadic rational k / 3**m are read as that
# rational, so that plateau endpoints such as 1/3 evaluate exactly
SNAP_ULPS = 2
_MAX_LEVEL = 20
_POW3 = np.array([3 ** m for m in range(_MAX_LEVEL + 1)], dtype=np.int64)


def _snap_scalar(x):
    fx = Fraction(x)
    tol = SNAP_ULPS * math.ulp(x) if x > 0 else 0.0
    for m in range(1, _MAX_LEVEL + 1):
        k = round(fx * 3 ** m)
        if abs(fx - Fraction(k, 3 ** m)) <= tol:
            return k, 3 ** m
    return fx.numerator, fx.denominator


def _snap_array(flat):
    """Level and numerator of the triadic rational near each entry (level 0: none)."""
    level = np.zeros(flat.shape, dtype=np.int64)
    num = np.zeros(flat.shape, dtype=np.int64)
    tol = SNAP_ULPS * np.spacing(flat)
    todo = np.ones(flat.shape, bool)
    for m in range(1, _MAX_LEVEL + 1):
        k = np.rint(flat * float(_POW3[m]))
        hit = todo & (np.abs(flat - k / float(_POW3[m])) <= tol)
        level[hit] = m
        num[hit] = k[hit].astype(np.int64)
        todo &= ~hit
        if not todo.any():
            break
    return level, num


def eval_cantor(x, depth=DEFAULT_DEPTH):
    """Cantor function at a single point, truncated after `depth` ternary digits.

    The truncation error is at most ``2**-depth``.

    >>> eval_cantor(1 / 3)
    0.5
    """
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"Cantor function is defined on [0, 1], got {x!r}")
    if depth < 1:
        raise ValueError("depth must be a positive integer")
    if x == 1.0:
        return 1.0
    num, den = _snap_scalar(x)
    if num >= den:
        # snapped up to 1 from just below
        return 1.0
    value = 0.0
    weight = 0.5
    for _ in range(depth):
        num *= 3
        digit, num = divmod(num, den)
        if digit == 1:
            return value + weight
        if digit == 2:
            value += weight
        weight *= 0.5
    return value


def cantor_array(x, depth=DEFAULT_DEPTH):
    """Vectorized Cantor function; `x` is clipped to [0, 1]."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    shape = x.shape
    flat = x.ravel()
    if flat.size > 256:
        # callers pass many repeated points (shared cell corners)
        uniq, inv = np.unique(flat, return_inverse=True)
        if uniq.size < 0.7 * flat.size:
            return cantor_array(uniq, depth)[inv].reshape(shape)
    m = np.floor(np.ldexp(flat, _FIX_BITS)).astype(np.uint64)
    top = flat >= 1.0
    m[top] = 0
    value = np.zeros(flat.shape)
    alive = ~top
    weight = 0.5
    three = np.uint64(3)
    shift = np.uint64(_FIX_BITS)
    for _ in range(depth):
        m = m * three
        digit = m >> shift
        m = m - (digit << shift)
        value += np.where(alive & (digit >= 1), weight, 0.0)
        alive &= digit != 1
        if not alive.any():
            break
        weight *= 0.5
    value[top] = 1.0
    level, num = _snap_array(flat)
    snapped = (level > 0) & ~top
    value[snapped & (num >= _POW3[level])] = 1.0
    snapped &= num < _POW3[level]
    if snapped.any():
        value[snapped] = _triadic_values(num[snapped], level[snapped], depth)
    return value.reshape(shape)


def _triadic_values(k, level, depth):
    """Cantor function at k / 3**level from the base-3 digits of k."""
    value = np.zeros(k.shape)
    alive = np.ones(k.shape, bool)
    weight = 0.5
    for j in range(min(int(level.max()), depth)):
        pos = level - 1 - j
        live = alive & (pos >= 0)
        digit = np.where(live, (k // _POW3[np.maximum(pos, 0)]) % 3, 0)
        value += np.where(live & (digit >= 1), weight, 0.0)
        alive &= ~(live & (digit == 1))
        weight *= 0.5
    return value


def cantor_error_bound(depth=DEFAULT_DEPTH):
    """Enclosure slack for `cantor_array` values."""
    return 2.0 ** (-depth) + FIXED_POINT_SLACK


def cantor_measure(a, b, depth=DEFAULT_DEPTH):
    """Cantor-measure of the interval [a, b] (any endpoints, clipped to [0, 1])."""
    a = min(max(a, 0.0), 1.0)
    b = min(max(b, 0.0), 1.0)
    if b <= a:
        return 0.0
    return eval_cantor(b, depth) - eval_cantor(a, depth)


def cantor_inverse_left(level, depth=60):
    """Smallest x in [0, 1] with C(x) = level (binary digits -> ternary 0/2)."""
    if not 0.0 <= level <= 1.0:
        raise DomainError("level must lie in [0, 1]")
    if level == 1.0:
        return 1.0
    x = 0.0
    scale = 2.0 / 3.0
    frac = level
    for _ in range(depth):
        frac *= 2.0
        if frac >= 1.0:
            x += scale
            frac -= 1.0
        scale /= 3.0
        if frac == 0.0:
            break
    return x


def cantor_integral_array(x, depth=DEFAULT_DEPTH):
    """Vectorized I(x) = integral of the Cantor function over [0, x].

    Uses I(x/3) = I(x)/6 on the first third, the plateau value 1/2 on the
    middle third and symmetry on the last third; the truncation error is at
    most 6**-depth / 2.
    """
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    shape = x.shape
    flat = x.ravel()
    m = np.floor(np.ldexp(flat, _FIX_BITS)).astype(np.uint64)
    top = flat >= 1.0
    m[top] = 0
    value = np.zeros(flat.shape)
    alive = ~top
    f = 1.0
    three = np.uint64(3)
    shift = np.uint64(_FIX_BITS)
    for _ in range(depth):
        m = m * three
        digit = m >> shift
        m = m - (digit << shift)
        r = np.ldexp(m.astype(float), -_FIX_BITS)
        add = np.where(digit == 1, 1 / 12 + r / 6, np.where(digit == 2, 0.25 + r / 6, 0.0))
        value += np.where(alive, f * add, 0.0)
        # digit 1 lands on a plateau, where the r/6 term is already exact
        alive &= digit != 1
        if not alive.any():
            break
        f /= 6.0
    value[top] = 0.5
    return value.reshape(shape)
