# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

"""
Planar restricted circular three-body problem in the rotating frame.

    H = ((p_x + y)^2 + (p_y - x)^2) / 2 - Omega(x, y)
    Omega = (x^2 + y^2) / 2 + (1 - mu) / r1 + mu / r2
    r1 = |(x - mu, y)|,  r2 = |(x + 1 - mu, y)|

The primary of mass 1 - mu sits at (mu, 0) and the one of mass mu at (-1 + mu, 0).
Every function takes boxes (State of Intervals) and returns rigorous enclosures;
the *_float variants evaluate the same formulas on plain numpy points.
"""

import logging
import typing
import numpy as np
from scipy import optimize

import librate.core.common.constants as lr_constants
import librate.core.common.errors as lr_errors
import librate.core.common.structs as lr_structs
from librate.core.ivl.interval import Interval
from librate.core.ivl.iarray import IVector, IMatrix
import librate.core.ivl.linalg as lr_linalg


logger = logging.getLogger(__name__)


def _distances(x: Interval, y: Interval, params: lr_structs.ModelParams) -> tuple[Interval, Interval, Interval, Interval]:
    """Returns (dx1, dx2, r1^2, r2^2) after checking the collision threshold."""
    mu = params.mu
    dx1 = x - mu
    dx2 = x + (1.0 - mu)
    ysq = y.sqr()
    s1 = dx1.sqr() + ysq
    s2 = dx2.sqr() + ysq
    limit = lr_constants.COLLISION_RADIUS ** 2
    if s1.lo <= limit or s2.lo <= limit:
        raise lr_errors.CollisionBox("prc3bp error: box at distance <= %g from a primary (x=%r, y=%r)"
                                     % (lr_constants.COLLISION_RADIUS, x, y))
    return dx1, dx2, s1, s2


def omega(x: Interval, y: Interval, params: lr_structs.ModelParams) -> Interval:
    mu = params.mu
    _, _, s1, s2 = _distances(x, y, params)
    return (x.sqr() + y.sqr()) / 2.0 + (1.0 - mu) / s1.sqrt() + mu / s2.sqrt()


def omega_gradient(x: Interval, y: Interval, params: lr_structs.ModelParams) -> tuple[Interval, Interval]:
    mu = params.mu
    dx1, dx2, s1, s2 = _distances(x, y, params)
    c1 = (1.0 - mu) / (s1 * s1.sqrt())
    c2 = mu / (s2 * s2.sqrt())
    return x - c1 * dx1 - c2 * dx2, y - (c1 + c2) * y


def omega_hessian(x: Interval, y: Interval, params: lr_structs.ModelParams) -> tuple[Interval, Interval, Interval]:
    """(Omega_xx, Omega_xy, Omega_yy)."""
    mu = params.mu
    dx1, dx2, s1, s2 = _distances(x, y, params)
    r1, r2 = s1.sqrt(), s2.sqrt()
    a1 = (1.0 - mu) / (s1 * r1)          # (1-mu) / r1^3
    a2 = mu / (s2 * r2)
    b1 = 3.0 * (1.0 - mu) / (s1.sqr() * r1)  # 3 (1-mu) / r1^5
    b2 = 3.0 * mu / (s2.sqr() * r2)
    ysq = y.sqr()
    oxx = 1.0 - a1 - a2 + b1 * dx1.sqr() + b2 * dx2.sqr()
    oyy = 1.0 - a1 - a2 + (b1 + b2) * ysq
    oxy = (b1 * dx1 + b2 * dx2) * y
    return oxx, oxy, oyy


def hamiltonian(q: lr_structs.State, params: lr_structs.ModelParams) -> Interval:
    return ((q.p_x + q.y).sqr() + (q.p_y - q.x).sqr()) / 2.0 - omega(q.x, q.y, params)


def hamiltonian_gradient(q: lr_structs.State, params: lr_structs.ModelParams) -> IVector:
    """(dH/dx, dH/dy, dH/dp_x, dH/dp_y)."""
    ox, oy = omega_gradient(q.x, q.y, params)
    u = q.p_x + q.y
    v = q.p_y - q.x
    return IVector.from_intervals([-v - ox, u - oy, u, v])


def vector_field(q: lr_structs.State, params: lr_structs.ModelParams) -> IVector:
    """J grad H: (x', y', p_x', p_y')."""
    ox, oy = omega_gradient(q.x, q.y, params)
    u = q.p_x + q.y
    v = q.p_y - q.x
    return IVector.from_intervals([u, v, v + ox, -u + oy])


def variational_field(q: lr_structs.State, params: lr_structs.ModelParams) -> IMatrix:
    oxx, oxy, oyy = omega_hessian(q.x, q.y, params)
    zero, one = Interval(0.0), Interval(1.0)
    return IMatrix.from_intervals([
        [zero, one, one, zero],
        [-one, zero, zero, one],
        [oxx - 1.0, oxy, zero, one],
        [oxy, oyy - 1.0, -one, zero],
    ])


def symmetry_S(q: lr_structs.State) -> lr_structs.State:
    """(x, y, p_x, p_y) -> (x, -y, -p_x, p_y); exact."""
    return lr_structs.State(q.x, -q.y, -q.p_x, q.p_y)


S_MATRIX = np.diag([1.0, -1.0, -1.0, 1.0])


def hill_region_test(x: Interval, y: Interval, h: lr_structs.EnergyLevel, params: lr_structs.ModelParams) -> lr_constants.HillRegion:
    """Classify a position box against R(h) = {Omega >= -h}."""
    om = omega(x, y, params)
    minus_h = -h.h
    if om.lo > minus_h.hi: return lr_constants.HillRegion.INSIDE
    if om.hi < minus_h.lo: return lr_constants.HillRegion.OUTSIDE
    return lr_constants.HillRegion.BOUNDARY


def hill_grid(h: lr_structs.EnergyLevel, x_range: tuple[float, float], y_range: tuple[float, float],
              nx: int, ny: int, params: lr_structs.ModelParams) -> list[tuple[float, float, float, float, int]]:
    """
    Classify a regular grid of cells; returns rows (x_lo, x_hi, y_lo, y_hi, region value).
    Cells too close to a primary are reported as inside (they are never forbidden).
    """
    xs = np.linspace(x_range[0], x_range[1], nx + 1)
    ys = np.linspace(y_range[0], y_range[1], ny + 1)
    rows = []
    for i in range(nx):
        for j in range(ny):
            xb, yb = Interval(xs[i], xs[i + 1]), Interval(ys[j], ys[j + 1])
            try: region = hill_region_test(xb, yb, h, params)
            except lr_errors.CollisionBox: region = lr_constants.HillRegion.INSIDE
            rows.append((xs[i], xs[i + 1], ys[j], ys[j + 1], region.value))
    return rows


"""Libration points."""

_COLLINEAR_SIGNS = {"L1": (-1.0, -1.0), "L2": (-1.0, 1.0), "L3": (1.0, 1.0)}


def _collinear(x: Interval, signs: tuple[float, float], params: lr_structs.ModelParams) -> tuple[Interval, Interval]:
    """Omega_x(x, 0) and its derivative on one branch between the primaries' singularities."""
    mu = params.mu
    d1, d2 = x - mu, x + (1.0 - mu)
    if d1.mig == 0.0 or d2.mig == 0.0:
        raise lr_errors.CollisionBox("prc3bp error: collinear box contains a primary")
    q1, q2 = d1.sqr(), d2.sqr()
    g = x - signs[0] * (1.0 - mu) / q1 - signs[1] * mu / q2
    dg = 1.0 + 2.0 * (1.0 - mu) / (q1 * abs(d1)) + 2.0 * mu / (q2 * abs(d2))
    return g, dg


def _collinear_float(x: float, signs: tuple[float, float], mu: float) -> float:
    return x - signs[0] * (1.0 - mu) / (x - mu) ** 2 - signs[1] * mu / (x + 1.0 - mu) ** 2


def _brackets(mu: float) -> dict[str, tuple[float, float]]:
    gap = 1e-6
    return {
        "L1": (-2.0, -1.0 + mu - gap),
        "L2": (-1.0 + mu + gap, mu - gap),
        "L3": (mu + gap, 2.0),
    }


def libration_points(params: lr_structs.ModelParams) -> dict[str, lr_structs.State]:
    """
    Certified enclosures of the collinear equilibria (x, 0, 0, x).
    L1 lies beyond the small primary, L2 between the primaries, L3 beyond the large primary.
    """
    out = {}
    for name, (a, b) in _brackets(params.mu).items():
        signs = _COLLINEAR_SIGNS[name]
        seed = optimize.brentq(_collinear_float, a, b, args=(signs, params.mu), xtol=1e-15, rtol=4 * np.finfo(float).eps)
        radius = 1e-12 * max(1.0, abs(seed))
        outcome = None
        for _ in range(5):
            X = Interval.around(seed, radius)
            g0, _ = _collinear(Interval(seed), signs, params)
            _, dg = _collinear(X, signs, params)
            outcome = lr_linalg.interval_newton(IVector.from_intervals([g0]), IMatrix.from_intervals([[dg]]),
                                                IVector.from_intervals([X]), [seed])
            if outcome.proven: break
            radius *= 10.0
        if outcome is None or not outcome.proven:
            raise lr_errors.IsolationFailed("prc3bp error: could not isolate %s near x=%r" % (name, seed))
        xr = outcome.refined[0]
        out[name] = lr_structs.State(xr, Interval(0.0), Interval(0.0), xr)
        logger.debug("prc3bp info: %s enclosed in %r", name, xr)
    return out


def libration_energies(params: lr_structs.ModelParams) -> dict[str, Interval]:
    return {name: hamiltonian(q, params) for name, q in libration_points(params).items()}


"""Plain floating point evaluations (non-rigorous engines and oracles)."""

def hamiltonian_float(q: np.ndarray, mu: float) -> float:
    x, y, px, py = q
    r1 = np.hypot(x - mu, y)
    r2 = np.hypot(x + 1.0 - mu, y)
    om = 0.5 * (x * x + y * y) + (1.0 - mu) / r1 + mu / r2
    return 0.5 * ((px + y) ** 2 + (py - x) ** 2) - om


def field_float(q: np.ndarray, mu: float) -> np.ndarray:
    x, y, px, py = q
    dx1, dx2 = x - mu, x + 1.0 - mu
    c1 = (1.0 - mu) / (dx1 * dx1 + y * y) ** 1.5
    c2 = mu / (dx2 * dx2 + y * y) ** 1.5
    u, v = px + y, py - x
    return np.array([u, v, v + x - c1 * dx1 - c2 * dx2, -u + y - (c1 + c2) * y])


def jacobian_float(q: np.ndarray, mu: float) -> np.ndarray:
    x, y = q[0], q[1]
    dx1, dx2 = x - mu, x + 1.0 - mu
    s1, s2 = dx1 * dx1 + y * y, dx2 * dx2 + y * y
    a1, a2 = (1.0 - mu) / s1 ** 1.5, mu / s2 ** 1.5
    b1, b2 = 3.0 * (1.0 - mu) / s1 ** 2.5, 3.0 * mu / s2 ** 2.5
    oxx = 1.0 - a1 - a2 + b1 * dx1 * dx1 + b2 * dx2 * dx2
    oyy = 1.0 - a1 - a2 + (b1 + b2) * y * y
    oxy = (b1 * dx1 + b2 * dx2) * y
    return np.array([
        [0.0, 1.0, 1.0, 0.0],
        [-1.0, 0.0, 0.0, 1.0],
        [oxx - 1.0, oxy, 0.0, 1.0],
        [oxy, oyy - 1.0, -1.0, 0.0],
    ])
