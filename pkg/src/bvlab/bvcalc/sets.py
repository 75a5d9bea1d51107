"""Finite unions of open intervals on the real line."""

from dataclasses import dataclass
import math

from ..errors import DomainError


@dataclass(frozen=True)
class OpenSet1D:
    intervals: tuple

    def __post_init__(self):
        ivs = tuple(sorted((float(a), float(b)) for a, b in self.intervals))
        for a, b in ivs:
            if not a < b:
                raise DomainError(f"empty or reversed interval ({a}, {b})")
        for (a0, b0), (a1, b1) in zip(ivs, ivs[1:]):
            if a1 < b0:
                raise DomainError("intervals must be pairwise disjoint")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def interval(cls, a, b):
        return cls(((a, b),))

    @classmethod
    def coerce(cls, obj):
        if isinstance(obj, OpenSet1D):
            return obj
        obj = tuple(obj)
        if len(obj) == 2 and all(isinstance(v, (int, float)) for v in obj):
            return cls((obj,))
        return cls(tuple(tuple(iv) for iv in obj))

    @property
    def bounded(self):
        return all(math.isfinite(a) and math.isfinite(b) for a, b in self.intervals)

    @property
    def measure(self):
        return sum(b - a for a, b in self.intervals)

    @property
    def lower(self):
        return self.intervals[0][0]

    @property
    def upper(self):
        return self.intervals[-1][1]

    def contains(self, x):
        return any(a < x < b for a, b in self.intervals)

    def closure_contains(self, x):
        return any(a <= x <= b for a, b in self.intervals)

    def covers(self, other):
        """True if `other` is a subset of this set."""
        other = OpenSet1D.coerce(other)
        return all(any(a <= c and d <= b for a, b in self.intervals) for c, d in other.intervals)

    def intersect(self, other):
        other = OpenSet1D.coerce(other)
        out = []
        for a, b in self.intervals:
            for c, d in other.intervals:
                lo, hi = max(a, c), min(b, d)
                if lo < hi:
                    out.append((lo, hi))
        return OpenSet1D(tuple(out)) if out else None

    def truncated(self, radius):
        """Intersection with (-radius, radius); used for unbounded domains."""
        return self.intersect(((-radius, radius),))

    def to_list(self):
        return [list(iv) for iv in self.intervals]
