# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

"""
Outward rounding kernels on (lo, hi) endpoint arrays.

Every primitive computes its endpoints in round-to-nearest binary64 and then
widens each endpoint by one ULP outwards, which encloses the exact result of
any correctly rounded operation. The kernels accept numpy arrays or scalars
and always return numpy values; Interval, IVector and IMatrix are thin
wrappers around them.
"""

import math
import numpy as np

import librate.core.common.errors as lr_errors


EPS = float(np.finfo(np.float64).eps)


def down(x):
    return np.nextafter(x, -np.inf)

def up(x):
    return np.nextafter(x, np.inf)


def add(alo, ahi, blo, bhi):
    return down(np.add(alo, blo)), up(np.add(ahi, bhi))

def sub(alo, ahi, blo, bhi):
    return down(np.subtract(alo, bhi)), up(np.subtract(ahi, blo))

def neg(alo, ahi):
    return np.negative(ahi), np.negative(alo)


def mul(alo, ahi, blo, bhi):
    with np.errstate(invalid="ignore"):
        p = np.stack(np.broadcast_arrays(np.multiply(alo, blo), np.multiply(alo, bhi),
                                         np.multiply(ahi, blo), np.multiply(ahi, bhi)))
    p = np.where(np.isnan(p), 0.0, p)  # 0 * inf
    return down(p.min(axis=0)), up(p.max(axis=0))


def contains_zero(lo, hi) -> np.ndarray:
    return np.logical_and(np.asarray(lo) <= 0.0, np.asarray(hi) >= 0.0)


def div(alo, ahi, blo, bhi):
    if np.any(contains_zero(blo, bhi)):
        raise lr_errors.DivisionByZeroInterval("interval division error: divisor contains zero")
    q = np.stack(np.broadcast_arrays(np.divide(alo, blo), np.divide(alo, bhi),
                                     np.divide(ahi, blo), np.divide(ahi, bhi)))
    return down(q.min(axis=0)), up(q.max(axis=0))


def sqr(alo, ahi):
    """Square with the dependency on the sign of the argument handled exactly."""
    alo = np.asarray(alo, dtype=np.float64)
    ahi = np.asarray(ahi, dtype=np.float64)
    mig = np.where(contains_zero(alo, ahi), 0.0, np.minimum(np.abs(alo), np.abs(ahi)))
    mag = np.maximum(np.abs(alo), np.abs(ahi))
    lo = np.where(mig == 0.0, 0.0, np.maximum(down(mig * mig), 0.0))
    return lo, up(mag * mag)


def sqrt(alo, ahi, truncate: bool=False):
    alo = np.asarray(alo, dtype=np.float64)
    ahi = np.asarray(ahi, dtype=np.float64)
    if np.any(ahi < 0.0) or (not truncate and np.any(alo < 0.0)):
        raise lr_errors.DomainError("interval sqrt error: argument has negative members")
    alo = np.maximum(alo, 0.0)
    lo = np.where(alo == 0.0, 0.0, np.maximum(down(np.sqrt(alo)), 0.0))
    return lo, up(np.sqrt(ahi))


def exp(alo, ahi):
    with np.errstate(over="ignore"):
        return np.maximum(down(np.exp(alo)), 0.0), up(np.exp(ahi))


def atan(alo, ahi):
    return down(np.arctan(alo)), up(np.arctan(ahi))


def _touches(lo: float, hi: float, offset: float) -> bool:
    """Whether [lo, hi] may contain offset + 2k*pi for some integer k."""
    two_pi = 2.0 * math.pi
    slack = 4.0 * EPS * max(1.0, abs(lo), abs(hi))
    k = math.ceil((lo - slack - offset) / two_pi)
    return offset + k * two_pi <= hi + slack


def _sin_scalar(lo: float, hi: float) -> tuple[float, float]:
    if hi - lo >= 2.0 * math.pi: return -1.0, 1.0
    slo, shi = math.sin(lo), math.sin(hi)
    rlo = max(-1.0, math.nextafter(min(slo, shi), -math.inf))
    rhi = min(1.0, math.nextafter(max(slo, shi), math.inf))
    if _touches(lo, hi, 0.5 * math.pi): rhi = 1.0
    if _touches(lo, hi, -0.5 * math.pi): rlo = -1.0
    return rlo, rhi


def sin(alo, ahi):
    alo = np.atleast_1d(np.asarray(alo, dtype=np.float64))
    ahi = np.atleast_1d(np.asarray(ahi, dtype=np.float64))
    out = np.array([_sin_scalar(float(l), float(h)) for l, h in zip(alo.ravel(), ahi.ravel())])
    return out[:, 0].reshape(alo.shape), out[:, 1].reshape(alo.shape)


def cos(alo, ahi):
    # cos(x) = sin(x + pi/2); the shift is enclosed before the sine
    half_pi = 0.5 * math.pi
    slo, shi = add(alo, ahi, down(half_pi), up(half_pi))
    return sin(slo, shi)


def ipow(alo, ahi, n: int):
    """Integer power by repeated outward-rounded multiplication of monotone pieces."""
    if n < 0:
        plo, phi = ipow(alo, ahi, -n)
        return div(1.0, 1.0, plo, phi)
    if n == 0:
        return np.ones_like(np.asarray(alo, dtype=np.float64)), np.ones_like(np.asarray(ahi, dtype=np.float64))
    alo = np.asarray(alo, dtype=np.float64)
    ahi = np.asarray(ahi, dtype=np.float64)
    if n % 2 == 0:
        base_lo = np.where(contains_zero(alo, ahi), 0.0, np.minimum(np.abs(alo), np.abs(ahi)))
        base_hi = np.maximum(np.abs(alo), np.abs(ahi))
    else:
        base_lo, base_hi = alo, ahi
    # thin powers of each endpoint; monotone on the chosen base
    llo, _ = _thin_pow(base_lo, n)
    _, hhi = _thin_pow(base_hi, n)
    if n % 2 == 0: llo = np.maximum(llo, 0.0)
    return llo, hhi


def _thin_pow(x, n: int):
    lo, hi = x, x
    for _ in range(n - 1):
        lo, hi = mul(lo, hi, x, x)
    return lo, hi


def sum_bounds(lo, hi, axis=0):
    """
    Rigorous enclosure of the sum of intervals along axis.
    The floating point sums are widened by gamma(n) * sum|x| which bounds the
    accumulated rounding error of any summation order.
    """
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    axes = axis if isinstance(axis, tuple) else (axis,)
    n = int(np.prod([lo.shape[a] for a in axes]))
    gamma = (n + 2) * EPS
    slo = np.sum(lo, axis=axis)
    shi = np.sum(hi, axis=axis)
    elo = up(np.sum(np.abs(lo), axis=axis) * gamma)
    ehi = up(np.sum(np.abs(hi), axis=axis) * gamma)
    return down(slo - elo), up(shi + ehi)


def matmul(alo, ahi, blo, bhi):
    """Interval matrix product (n, k) x (k, m) or (n, k) x (k,)."""
    alo = np.asarray(alo, dtype=np.float64)
    ahi = np.asarray(ahi, dtype=np.float64)
    blo = np.asarray(blo, dtype=np.float64)
    bhi = np.asarray(bhi, dtype=np.float64)
    if blo.ndim == 1:
        plo, phi = mul(alo, ahi, blo[None, :], bhi[None, :])
        return sum_bounds(plo, phi, axis=1)
    plo, phi = mul(alo[:, :, None], ahi[:, :, None], blo[None, :, :], bhi[None, :, :])
    return sum_bounds(plo, phi, axis=1)
