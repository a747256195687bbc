# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

from __future__ import annotations
import math
import typing
import numpy as np

import librate.core.common.constants as lr_constants
import librate.core.common.errors as lr_errors
import librate.core.ivl.rounding as rnd


Number = typing.Union[int, float]


class Interval:
    """
    Closed real interval [lo, hi] with binary64 endpoints.
    Instances are immutable. The empty set is the Interval.EMPTY sentinel and
    never appears as lo > hi.
    """

    __slots__ = ("lo", "hi", "_empty")

    EMPTY: Interval = None  # set below

    def __init__(self, lo: Number, hi: typing.Optional[Number]=None):
        lo = float(lo)
        hi = lo if hi is None else float(hi)
        if math.isnan(lo) or math.isnan(hi):
            raise lr_errors.DomainError("interval error: NaN endpoint")
        if lo > hi:
            raise lr_errors.DomainError("interval error: lower bound %r above upper bound %r" % (lo, hi))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "_empty", False)

    def __setattr__(self, key, value):
        raise AttributeError("Interval is immutable")

    @classmethod
    def _make_empty(cls) -> Interval:
        e = object.__new__(cls)
        object.__setattr__(e, "lo", math.nan)
        object.__setattr__(e, "hi", math.nan)
        object.__setattr__(e, "_empty", True)
        return e

    @classmethod
    def point(cls, x: Number) -> Interval:
        return cls(x, x)

    @classmethod
    def around(cls, center: Number, radius: Number) -> Interval:
        """center + [-radius, radius], rounded outwards."""
        lo, hi = rnd.add(center, center, -abs(radius), abs(radius))
        return cls(lo, hi)

    @staticmethod
    def coerce(value: typing.Union[Interval, Number]) -> Interval:
        if isinstance(value, Interval): return value
        return Interval(value, value)

    """Set properties."""

    @property
    def is_empty(self) -> bool:
        return self._empty

    @property
    def mid(self) -> float:
        self._checkNonEmpty()
        m = 0.5 * (self.lo + self.hi)
        if math.isinf(m): m = 0.5 * self.lo + 0.5 * self.hi
        return min(max(m, self.lo), self.hi)

    @property
    def rad(self) -> float:
        """Upper bound of the radius around mid."""
        m = self.mid
        return float(rnd.up(max(m - self.lo, self.hi - m)))

    @property
    def width(self) -> float:
        self._checkNonEmpty()
        return float(rnd.up(self.hi - self.lo)) if self.hi > self.lo else 0.0

    @property
    def width_lower(self) -> float:
        """Lower bound of hi - lo."""
        self._checkNonEmpty()
        return max(float(rnd.down(self.hi - self.lo)), 0.0) if self.hi > self.lo else 0.0

    @property
    def mag(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    @property
    def mig(self) -> float:
        if self.lo <= 0.0 <= self.hi: return 0.0
        return min(abs(self.lo), abs(self.hi))

    def contains(self, other: typing.Union[Interval, Number]) -> bool:
        if self._empty: return False
        if isinstance(other, Interval):
            if other.is_empty: return True
            return self.lo <= other.lo and other.hi <= self.hi
        return self.lo <= other <= self.hi

    def __contains__(self, other) -> bool:
        return self.contains(other)

    def subset(self, other: Interval) -> bool:
        return other.contains(self)

    def interior(self, other: Interval) -> bool:
        """Whether self lies in the interior of other."""
        if self._empty: return True
        return other.lo < self.lo and self.hi < other.hi

    def hull(self, other: Interval) -> Interval:
        if self._empty: return other
        if other.is_empty: return self
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersect(self, other: Interval) -> Interval:
        if self._empty or other.is_empty: return Interval.EMPTY
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi: return Interval.EMPTY
        return Interval(lo, hi)

    def is_positive(self) -> bool:
        return self.lo > 0.0

    def is_negative(self) -> bool:
        return self.hi < 0.0

    def inflate(self, factor: float, absolute: float=0.0) -> Interval:
        """Scale the radius around mid by factor and add an absolute margin."""
        return Interval.around(self.mid, self.rad * factor + absolute)

    """Arithmetic."""

    def _checkNonEmpty(self):
        if self._empty: raise lr_errors.DomainError("interval error: operation on the empty interval")

    def _binary(self, other, kernel) -> Interval:
        other = Interval.coerce(other)
        self._checkNonEmpty()
        other._checkNonEmpty()
        lo, hi = kernel(self.lo, self.hi, other.lo, other.hi)
        return Interval(lo, hi)

    def __add__(self, other): return self._binary(other, rnd.add)
    def __radd__(self, other): return Interval.coerce(other)._binary(self, rnd.add)
    def __sub__(self, other): return self._binary(other, rnd.sub)
    def __rsub__(self, other): return Interval.coerce(other)._binary(self, rnd.sub)
    def __mul__(self, other): return self._binary(other, rnd.mul)
    def __rmul__(self, other): return Interval.coerce(other)._binary(self, rnd.mul)
    def __truediv__(self, other): return self._binary(other, rnd.div)
    def __rtruediv__(self, other): return Interval.coerce(other)._binary(self, rnd.div)

    def __neg__(self) -> Interval:
        self._checkNonEmpty()
        return Interval(-self.hi, -self.lo)

    def __pos__(self) -> Interval:
        return self

    def __abs__(self) -> Interval:
        self._checkNonEmpty()
        return Interval(self.mig, self.mag)

    def __pow__(self, n: int) -> Interval:
        if not isinstance(n, int): raise TypeError("interval power error: only integer exponents are supported")
        self._checkNonEmpty()
        if n == 2: lo, hi = rnd.sqr(self.lo, self.hi)
        else: lo, hi = rnd.ipow(self.lo, self.hi, n)
        return Interval(lo, hi)

    def sqr(self) -> Interval:
        return self ** 2

    def sqrt(self, policy: lr_constants.SqrtPolicy=lr_constants.SqrtPolicy.STRICT) -> Interval:
        self._checkNonEmpty()
        lo, hi = rnd.sqrt(self.lo, self.hi, truncate=(policy == lr_constants.SqrtPolicy.TRUNCATE))
        return Interval(lo, hi)

    def _unary(self, kernel) -> Interval:
        self._checkNonEmpty()
        lo, hi = kernel(self.lo, self.hi)
        return Interval(float(np.ravel(lo)[0]), float(np.ravel(hi)[0]))

    def sin(self) -> Interval: return self._unary(rnd.sin)
    def cos(self) -> Interval: return self._unary(rnd.cos)
    def atan(self) -> Interval: return self._unary(rnd.atan)
    def exp(self) -> Interval: return self._unary(rnd.exp)

    """Comparison and serialization."""

    def __eq__(self, other) -> bool:
        if not isinstance(other, Interval): return NotImplemented
        if self._empty or other.is_empty: return self._empty and other.is_empty
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self) -> int:
        return hash(("empty",)) if self._empty else hash((self.lo, self.hi))

    def __repr__(self) -> str:
        if self._empty: return "Interval.EMPTY"
        return "Interval(%r, %r)" % (self.lo, self.hi)

    def to_json(self) -> dict:
        """Shortest round-trip decimal strings; reloads bit-exactly."""
        if self._empty: return {"empty": True}
        return {"lo": repr(self.lo), "hi": repr(self.hi)}

    @classmethod
    def from_json(cls, data: dict) -> Interval:
        if data.get("empty", False): return cls.EMPTY
        return cls(float(data["lo"]), float(data["hi"]))


Interval.EMPTY = Interval._make_empty()


def hull_intersect(a: Interval, b: Interval) -> tuple[Interval, Interval]:
    return a.hull(b), a.intersect(b)


_BINARY_OPS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": lambda a, b: a / b,
}

_UNARY_OPS = {
    "sqrt": lambda a: a.sqrt(),
    "sin": lambda a: a.sin(),
    "cos": lambda a: a.cos(),
    "atan": lambda a: a.atan(),
    "exp": lambda a: a.exp(),
}


def arith(a: Interval, b: typing.Optional[typing.Union[Interval, int]], op: str) -> Interval:
    """
    Single entry point for the primitive operations.
    op is one of + - * / sqrt sin cos atan exp pow; unary ops ignore b, pow takes an integer b.
    """
    if op in _BINARY_OPS: return _BINARY_OPS[op](a, b)
    if op in _UNARY_OPS: return _UNARY_OPS[op](a)
    if op == "pow": return a ** int(b)
    raise lr_errors.DomainError("interval error: unknown operation %s" % op)


def interval_sum(items: typing.Iterable[Interval]) -> Interval:
    total = Interval(0.0)
    for item in items: total = total + item
    return total
