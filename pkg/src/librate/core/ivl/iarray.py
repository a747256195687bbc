# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

"""
Interval vectors and matrices stored as a pair of numpy endpoint arrays.
"""

from __future__ import annotations
import typing
import numpy as np

import librate.core.common.errors as lr_errors
import librate.core.ivl.rounding as rnd
from librate.core.ivl.interval import Interval


def _bounds(value) -> tuple:
    if isinstance(value, IntervalArray): return value.lo, value.hi
    if isinstance(value, Interval):
        if value.is_empty: raise lr_errors.DomainError("interval array error: empty interval operand")
        return value.lo, value.hi
    arr = np.asarray(value, dtype=np.float64)
    return arr, arr


class IntervalArray:
    """Shared behaviour of IVector and IMatrix; instances are immutable."""

    ndim: int = 0

    def __init__(self, lo, hi=None):
        lo = np.array(lo, dtype=np.float64)
        hi = lo.copy() if hi is None else np.array(hi, dtype=np.float64)
        if lo.shape != hi.shape:
            raise lr_errors.DomainError("interval array error: endpoint shapes differ %s %s" % (lo.shape, hi.shape))
        if lo.ndim != self.ndim:
            raise lr_errors.DomainError("interval array error: %s expects %d dimensions, got %d" % (type(self).__name__, self.ndim, lo.ndim))
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise lr_errors.DomainError("interval array error: NaN endpoint")
        if np.any(lo > hi):
            raise lr_errors.DomainError("interval array error: lower bound above upper bound")
        lo.setflags(write=False)
        hi.setflags(write=False)
        self.lo = lo
        self.hi = hi

    @classmethod
    def _wrap(cls, lo, hi) -> IntervalArray:
        lo = np.asarray(lo)
        if lo.ndim == 0: return Interval(float(lo), float(hi))
        if lo.ndim == 1: return IVector(lo, hi)
        return IMatrix(lo, hi)

    @classmethod
    def point(cls, values) -> IntervalArray:
        return cls(values, values)

    @classmethod
    def from_intervals(cls, items) -> IntervalArray:
        items = np.asarray(items, dtype=object)
        lo = np.vectorize(lambda i: Interval.coerce(i).lo, otypes=[np.float64])(items)
        hi = np.vectorize(lambda i: Interval.coerce(i).hi, otypes=[np.float64])(items)
        return cls(lo, hi)

    @property
    def shape(self) -> tuple:
        return self.lo.shape

    def __len__(self) -> int:
        return self.lo.shape[0]

    def __getitem__(self, index):
        return self._wrap(self.lo[index], self.hi[index])

    def mid(self) -> np.ndarray:
        m = 0.5 * (self.lo + self.hi)
        return np.minimum(np.maximum(m, self.lo), self.hi)

    def rad(self) -> np.ndarray:
        m = self.mid()
        return rnd.up(np.maximum(m - self.lo, self.hi - m))

    def width(self) -> np.ndarray:
        return np.where(self.hi > self.lo, rnd.up(self.hi - self.lo), 0.0)

    def mag(self) -> np.ndarray:
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def mig(self) -> np.ndarray:
        return np.where(rnd.contains_zero(self.lo, self.hi), 0.0, np.minimum(np.abs(self.lo), np.abs(self.hi)))

    def max_width(self) -> float:
        return float(np.max(self.width())) if self.lo.size else 0.0

    """Set operations."""

    def contains(self, other) -> bool:
        olo, ohi = _bounds(other)
        return bool(np.all(self.lo <= olo) and np.all(ohi <= self.hi))

    def subset(self, other: IntervalArray) -> bool:
        return other.contains(self)

    def interior(self, other: IntervalArray) -> bool:
        return bool(np.all(other.lo < self.lo) and np.all(self.hi < other.hi))

    def hull(self, other) -> IntervalArray:
        olo, ohi = _bounds(other)
        return type(self)(np.minimum(self.lo, olo), np.maximum(self.hi, ohi))

    def intersect(self, other) -> typing.Optional[IntervalArray]:
        """Componentwise meet; None stands for the empty set."""
        olo, ohi = _bounds(other)
        lo, hi = np.maximum(self.lo, olo), np.minimum(self.hi, ohi)
        if np.any(lo > hi): return None
        return type(self)(lo, hi)

    def inflate(self, factor: float, absolute: float=0.0) -> IntervalArray:
        m = self.mid()
        r = rnd.up(self.rad() * factor + absolute)
        lo, hi = rnd.sub(m, m, r, r)[0], rnd.add(m, m, r, r)[1]
        return type(self)(lo, hi)

    """Arithmetic."""

    def __add__(self, other):
        olo, ohi = _bounds(other)
        return self._wrap(*rnd.add(self.lo, self.hi, olo, ohi))

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        olo, ohi = _bounds(other)
        return self._wrap(*rnd.sub(self.lo, self.hi, olo, ohi))

    def __rsub__(self, other):
        olo, ohi = _bounds(other)
        return self._wrap(*rnd.sub(olo, ohi, self.lo, self.hi))

    def __neg__(self):
        return self._wrap(*rnd.neg(self.lo, self.hi))

    def __mul__(self, other):
        """Elementwise (or scalar broadcast) product."""
        olo, ohi = _bounds(other)
        return self._wrap(*rnd.mul(self.lo, self.hi, olo, ohi))

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        olo, ohi = _bounds(other)
        return self._wrap(*rnd.div(self.lo, self.hi, olo, ohi))

    def __matmul__(self, other):
        olo, ohi = _bounds(other)
        if self.ndim == 1:
            raise lr_errors.DomainError("interval array error: use IMatrix @ IVector")
        return self._wrap(*rnd.matmul(self.lo, self.hi, olo, ohi))

    def __rmatmul__(self, other):
        olo, ohi = _bounds(other)
        return self._wrap(*rnd.matmul(olo, ohi, self.lo, self.hi))

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalArray): return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi))

    __hash__ = None

    def to_json(self) -> list:
        return np.vectorize(lambda lo, hi: Interval(lo, hi).to_json(), otypes=[object])(self.lo, self.hi).tolist()

    @classmethod
    def from_json(cls, data: list) -> IntervalArray:
        items = np.vectorize(Interval.from_json, otypes=[object])(np.asarray(data, dtype=object))
        return cls.from_intervals(items)

    def __repr__(self) -> str:
        return "%s(lo=%s, hi=%s)" % (type(self).__name__, self.lo.tolist(), self.hi.tolist())


class IVector(IntervalArray):
    ndim = 1

    @classmethod
    def zeros(cls, n: int) -> IVector:
        return cls(np.zeros(n), np.zeros(n))

    def __iter__(self) -> typing.Iterator[Interval]:
        for i in range(len(self)): yield Interval(self.lo[i], self.hi[i])

    def with_component(self, index: int, value: Interval) -> IVector:
        lo, hi = self.lo.copy(), self.hi.copy()
        lo[index], hi[index] = value.lo, value.hi
        return IVector(lo, hi)

    def dot(self, other) -> Interval:
        olo, ohi = _bounds(other)
        plo, phi = rnd.mul(self.lo, self.hi, olo, ohi)
        lo, hi = rnd.sum_bounds(plo, phi, axis=0)
        return Interval(float(lo), float(hi))

    def norm2(self) -> Interval:
        """Euclidean norm."""
        slo, shi = rnd.sqr(self.lo, self.hi)
        lo, hi = rnd.sum_bounds(slo, shi, axis=0)
        return Interval(max(float(lo), 0.0), float(hi)).sqrt()


class IMatrix(IntervalArray):
    ndim = 2

    @classmethod
    def identity(cls, n: int) -> IMatrix:
        return cls(np.eye(n), np.eye(n))

    @classmethod
    def zeros(cls, n: int, m: typing.Optional[int]=None) -> IMatrix:
        m = n if m is None else m
        return cls(np.zeros((n, m)), np.zeros((n, m)))

    @property
    def T(self) -> IMatrix:
        return IMatrix(self.lo.T, self.hi.T)

    def row(self, i: int) -> IVector:
        return IVector(self.lo[i], self.hi[i])

    def column(self, j: int) -> IVector:
        return IVector(self.lo[:, j], self.hi[:, j])

    @classmethod
    def block(cls, blocks: list[list[IMatrix]]) -> IMatrix:
        return cls(np.block([[b.lo for b in row] for row in blocks]), np.block([[b.hi for b in row] for row in blocks]))
