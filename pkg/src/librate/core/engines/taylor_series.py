# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

"""
Interval Taylor coefficients of the PRC3BP flow by automatic differentiation.

For a box x0 the routine returns enclosures of the normalized coefficients
x_k = x^(k)(0) / k! for every solution through x0, and optionally the
coefficients V_k of the variational solution with V_0 = I. Negative powers of
the squared distances use the recurrence for u = s^a:

    u_k = 1 / (k s_0) * sum_{j<k} (a (k - j) - j) s_{k-j} u_j
"""

import typing
import numpy as np

import librate.core.ivl.rounding as rnd
from librate.core.ivl.iarray import IVector, IMatrix


class _Series:
    """Coefficient arrays of one scalar series, filled in order."""

    __slots__ = ("lo", "hi")

    def __init__(self, size: int):
        self.lo = np.zeros(size)
        self.hi = np.zeros(size)

    def set(self, k: int, lo, hi):
        self.lo[k] = lo
        self.hi[k] = hi


def _conv(a: _Series, b: _Series, k: int) -> tuple:
    plo, phi = rnd.mul(a.lo[:k + 1], a.hi[:k + 1], b.lo[k::-1], b.hi[k::-1])
    return rnd.sum_bounds(plo, phi)


def _square(a: _Series, k: int) -> tuple:
    """Coefficient k of a^2 using the symmetry of the Cauchy product."""
    half = (k + 1) // 2
    lo, hi = 0.0, 0.0
    if half > 0:
        plo, phi = rnd.mul(a.lo[:half], a.hi[:half], a.lo[k:k - half:-1], a.hi[k:k - half:-1])
        lo, hi = rnd.sum_bounds(plo, phi)
        lo, hi = rnd.mul(lo, hi, 2.0, 2.0)
    if k % 2 == 0:
        slo, shi = rnd.sqr(a.lo[k // 2], a.hi[k // 2])
        lo, hi = rnd.add(lo, hi, slo, shi)
    return lo, hi


def _power(s: _Series, u: _Series, k: int, alpha: float) -> tuple:
    """Coefficient k of u = s^alpha given u_0..u_{k-1}."""
    if k == 0:
        root_lo, root_hi = rnd.sqrt(s.lo[0], s.hi[0])
        n = int(round(-alpha - 0.5))  # alpha = -(n + 1/2)
        plo, phi = rnd.ipow(s.lo[0], s.hi[0], n)
        plo, phi = rnd.mul(plo, phi, root_lo, root_hi)
        return rnd.div(1.0, 1.0, plo, phi)
    j = np.arange(k)
    weights = alpha * (k - j) - j  # exact half-integers
    plo, phi = rnd.mul(s.lo[k:0:-1], s.hi[k:0:-1], u.lo[:k], u.hi[:k])
    plo, phi = rnd.mul(plo, phi, weights, weights)
    tlo, thi = rnd.sum_bounds(plo, phi)
    dlo, dhi = rnd.mul(s.lo[0], s.hi[0], float(k), float(k))
    return rnd.div(tlo, thi, dlo, dhi)


def _lin(terms: list[tuple[float, float, float]]) -> tuple:
    """Sum of c * [lo, hi] over (c, lo, hi) triples."""
    lo, hi = 0.0, 0.0
    for c, tlo, thi in terms:
        plo, phi = rnd.mul(tlo, thi, c, c)
        lo, hi = rnd.add(lo, hi, plo, phi)
    return lo, hi


class TaylorCoefficients(typing.NamedTuple):
    """state[k] encloses x_k; variational[k] encloses V_k when requested."""
    state_lo: np.ndarray   # (order + 1, 4)
    state_hi: np.ndarray
    var_lo: typing.Optional[np.ndarray]   # (order + 1, 4, 4)
    var_hi: typing.Optional[np.ndarray]

    @property
    def order(self) -> int:
        return self.state_lo.shape[0] - 1

    def state(self, k: int) -> IVector:
        return IVector(self.state_lo[k], self.state_hi[k])

    def variational(self, k: int) -> IMatrix:
        return IMatrix(self.var_lo[k], self.var_hi[k])


def taylor_coefficients(x0: IVector, order: int, mu: float, variational: bool=False) -> TaylorCoefficients:
    size = order + 1
    c1, c2 = 1.0 - mu, mu
    X, Y, PX, PY = (_Series(size) for _ in range(4))
    D1, D2, Q1, Q2, YY, S1, S2, U1, U2, P1, P2, W, YW = (_Series(size) for _ in range(13))
    if variational:
        Z1, Z2, QZ1, QZ2, Z, YYZ, DZ, YDZ = (_Series(size) for _ in range(8))
        OXX, OXY, OYY = (_Series(size) for _ in range(3))
        vlo = np.zeros((size, 4, 4))
        vhi = np.zeros((size, 4, 4))
        vlo[0] = np.eye(4)
        vhi[0] = np.eye(4)
        a0_const = np.array([[0.0, 1.0, 1.0, 0.0], [-1.0, 0.0, 0.0, 1.0], [-1.0, 0.0, 0.0, 1.0], [0.0, -1.0, -1.0, 0.0]])

    for i, s in enumerate((X, Y, PX, PY)): s.set(0, x0.lo[i], x0.hi[i])

    for k in range(order):
        # distances
        if k == 0:
            D1.set(0, *rnd.sub(X.lo[0], X.hi[0], c2, c2))
            D2.set(0, *rnd.add(X.lo[0], X.hi[0], c1, c1))
        else:
            D1.set(k, X.lo[k], X.hi[k])
            D2.set(k, X.lo[k], X.hi[k])
        Q1.set(k, *_square(D1, k))
        Q2.set(k, *_square(D2, k))
        YY.set(k, *_square(Y, k))
        S1.set(k, *rnd.add(Q1.lo[k], Q1.hi[k], YY.lo[k], YY.hi[k]))
        S2.set(k, *rnd.add(Q2.lo[k], Q2.hi[k], YY.lo[k], YY.hi[k]))
        U1.set(k, *_power(S1, U1, k, -1.5))
        U2.set(k, *_power(S2, U2, k, -1.5))
        P1.set(k, *_conv(D1, U1, k))
        P2.set(k, *_conv(D2, U2, k))
        W.set(k, *_lin([(c1, U1.lo[k], U1.hi[k]), (c2, U2.lo[k], U2.hi[k])]))
        YW.set(k, *_conv(Y, W, k))

        # field coefficient k and state coefficient k + 1
        ulo, uhi = rnd.add(PX.lo[k], PX.hi[k], Y.lo[k], Y.hi[k])
        vlo_, vhi_ = rnd.sub(PY.lo[k], PY.hi[k], X.lo[k], X.hi[k])
        oxlo, oxhi = _lin([(1.0, X.lo[k], X.hi[k]), (-c1, P1.lo[k], P1.hi[k]), (-c2, P2.lo[k], P2.hi[k])])
        oylo, oyhi = rnd.sub(Y.lo[k], Y.hi[k], YW.lo[k], YW.hi[k])
        f = [
            (ulo, uhi),
            (vlo_, vhi_),
            rnd.add(vlo_, vhi_, oxlo, oxhi),
            rnd.sub(oylo, oyhi, ulo, uhi),
        ]
        for s, (flo, fhi) in zip((X, Y, PX, PY), f):
            s.set(k + 1, *rnd.div(flo, fhi, float(k + 1), float(k + 1)))

        if variational:
            Z1.set(k, *_power(S1, Z1, k, -2.5))
            Z2.set(k, *_power(S2, Z2, k, -2.5))
            QZ1.set(k, *_conv(Q1, Z1, k))
            QZ2.set(k, *_conv(Q2, Z2, k))
            Z.set(k, *_lin([(c1, Z1.lo[k], Z1.hi[k]), (c2, Z2.lo[k], Z2.hi[k])]))
            YYZ.set(k, *_conv(YY, Z, k))
            dz1 = _conv(D1, Z1, k)
            dz2 = _conv(D2, Z2, k)
            DZ.set(k, *_lin([(c1, dz1[0], dz1[1]), (c2, dz2[0], dz2[1])]))
            YDZ.set(k, *_conv(Y, DZ, k))
            one = 1.0 if k == 0 else 0.0
            OXX.set(k, *_lin([(one, 1.0, 1.0), (-1.0, W.lo[k], W.hi[k]), (3.0 * c1, QZ1.lo[k], QZ1.hi[k]), (3.0 * c2, QZ2.lo[k], QZ2.hi[k])]))
            OYY.set(k, *_lin([(one, 1.0, 1.0), (-1.0, W.lo[k], W.hi[k]), (3.0, YYZ.lo[k], YYZ.hi[k])]))
            OXY.set(k, *_lin([(3.0, YDZ.lo[k], YDZ.hi[k])]))
            _variational_step(vlo, vhi, a0_const, OXX, OXY, OYY, k)

    state_lo = np.stack([X.lo, Y.lo, PX.lo, PY.lo], axis=1)
    state_hi = np.stack([X.hi, Y.hi, PX.hi, PY.hi], axis=1)
    if not variational: return TaylorCoefficients(state_lo, state_hi, None, None)
    return TaylorCoefficients(state_lo, state_hi, vlo, vhi)


def _variational_step(vlo: np.ndarray, vhi: np.ndarray, a0_const: np.ndarray,
                      OXX: _Series, OXY: _Series, OYY: _Series, k: int):
    """
    V_{k+1} = (A_0 V_k + sum_{j=1..k} A_j V_{k-j}) / (k + 1), where A_j for j >= 1
    only carries the Hessian of Omega in rows p_x, p_y and columns x, y.
    """
    alo = a0_const.copy()
    ahi = a0_const.copy()
    alo[2, 0], ahi[2, 0] = rnd.sub(OXX.lo[0], OXX.hi[0], 1.0, 1.0)
    alo[2, 1], ahi[2, 1] = OXY.lo[0], OXY.hi[0]
    alo[3, 0], ahi[3, 0] = OXY.lo[0], OXY.hi[0]
    alo[3, 1], ahi[3, 1] = rnd.sub(OYY.lo[0], OYY.hi[0], 1.0, 1.0)
    tlo, thi = rnd.matmul(alo, ahi, vlo[k], vhi[k])

    if k >= 1:
        # rows 2 and 3 pick up Omega_xx V[0,:] + Omega_xy V[1,:] and Omega_xy V[0,:] + Omega_yy V[1,:]
        j = slice(1, k + 1)
        past_lo, past_hi = vlo[k - 1::-1], vhi[k - 1::-1]  # V_{k-1}, ..., V_0 paired with A_1..A_k
        row0_lo, row0_hi = past_lo[:, 0, :], past_hi[:, 0, :]
        row1_lo, row1_hi = past_lo[:, 1, :], past_hi[:, 1, :]

        def _pair(a: _Series, b: _Series):
            p1 = rnd.mul(a.lo[j, None], a.hi[j, None], row0_lo, row0_hi)
            p2 = rnd.mul(b.lo[j, None], b.hi[j, None], row1_lo, row1_hi)
            lo = np.concatenate([p1[0], p2[0]], axis=0)
            hi = np.concatenate([p1[1], p2[1]], axis=0)
            return rnd.sum_bounds(lo, hi, axis=0)

        r2 = _pair(OXX, OXY)
        r3 = _pair(OXY, OYY)
        tlo[2], thi[2] = rnd.add(tlo[2], thi[2], r2[0], r2[1])
        tlo[3], thi[3] = rnd.add(tlo[3], thi[3], r3[0], r3[1])

    vlo[k + 1], vhi[k + 1] = rnd.div(tlo, thi, float(k + 1), float(k + 1))
