# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

"""
Non-rigorous floating point flow of the PRC3BP.

Used for crossing-time estimates, shooting of seeds, the chart fit (jet
transport of truncated polynomials) and as the reference trajectory the
rigorous engine is compared against. Nothing computed here enters a bound.
"""

from __future__ import annotations
import logging
import typing
import numpy as np
from scipy.integrate import solve_ivp

import librate.core.common.errors as lr_errors
import librate.core.common.structs as lr_structs
import librate.core.model.prc3bp as prc3bp
from librate.core.engines.engine_base import FlowEngineBase


logger = logging.getLogger(__name__)

RTOL = 1e-13
ATOL = 1e-14
MIN_EVENT_TIME = 1e-6  # crossings closer to the start belong to the initial point


class PointCrossing(typing.NamedTuple):
    time: float
    state: np.ndarray
    stm: np.ndarray
    DP: np.ndarray  # 4x4 derivative of the section-to-section map

    def DP3(self) -> np.ndarray:
        return self.DP[np.ix_(SECTION_INDICES, SECTION_INDICES)]


SECTION_INDICES = [0, 2, 3]  # (x, p_x, p_y) on {y = 0}


def _rhs(t: float, z: np.ndarray, mu: float) -> np.ndarray:
    q = z[:4]
    out = np.empty_like(z)
    out[:4] = prc3bp.field_float(q, mu)
    if z.shape[0] > 4:
        out[4:] = (prc3bp.jacobian_float(q, mu) @ z[4:].reshape(4, 4)).ravel()
    return out


def _section_event(t: float, z: np.ndarray, mu: float) -> float:
    return z[1]


def section_correction(state: np.ndarray, stm: np.ndarray, mu: float) -> np.ndarray:
    """DP = (I - f e_y^T / f_y) DPhi at a crossing of {y = 0}."""
    f = prc3bp.field_float(state, mu)
    if f[1] == 0.0:
        raise lr_errors.NoTransversalCrossing("point engine error: tangential crossing of y = 0")
    return stm - np.outer(f / f[1], stm[1, :])


class PointEngine(FlowEngineBase):
    """Floating point flow with scipy DOP853, optionally with the state transition matrix."""

    def __init__(self, class_id: str="point", params: typing.Optional[lr_structs.ModelParams]=None,
                 options: typing.Optional[lr_structs.IntegratorOptions]=None):
        super().__init__(class_id, params, options)

    def flow(self, initial, T: float, with_stm: bool=True) -> tuple[np.ndarray, typing.Optional[np.ndarray]]:
        q = np.asarray(initial, dtype=np.float64)
        z0 = np.concatenate([q, np.eye(4).ravel()]) if with_stm else q
        if T == 0.0: return q.copy(), (np.eye(4) if with_stm else None)
        sol = solve_ivp(_rhs, (0.0, T), z0, method="DOP853", rtol=RTOL, atol=ATOL, args=(self.params.mu,))
        if not sol.success:
            raise lr_errors.StepFailure("%s error: %s" % (self.class_id, sol.message))
        z = sol.y[:, -1]
        return z[:4], (z[4:].reshape(4, 4) if with_stm else None)

    def trajectory(self, q: np.ndarray, T: float, n_points: int=200) -> tuple[np.ndarray, np.ndarray]:
        """Sampled times and states, used for plots."""
        ts = np.linspace(0.0, T, n_points)
        sol = solve_ivp(_rhs, (0.0, T), np.asarray(q, dtype=np.float64), method="DOP853", rtol=RTOL, atol=ATOL,
                        t_eval=ts, args=(self.params.mu,))
        if not sol.success:
            raise lr_errors.StepFailure("%s error: %s" % (self.class_id, sol.message))
        return sol.t, sol.y.T

    def crossings(self, q: np.ndarray, n: int, direction: float=0.0) -> list[PointCrossing]:
        """
        The first n crossings of {y = 0} after the start, with derivatives.
        direction: 0 for any crossing, +1 / -1 for increasing / decreasing y
        """
        mu = self.params.mu
        event = lambda t, z, mu_: _section_event(t, z, mu_)
        event.direction = direction
        t_cap = self.options.section_time_cap
        window = 2.0
        z0 = np.concatenate([np.asarray(q, dtype=np.float64), np.eye(4).ravel()])
        found: list[PointCrossing] = []
        t0 = 0.0
        while len(found) < n and t0 < t_cap:
            t1 = min(t0 + window, t_cap)
            sol = solve_ivp(_rhs, (t0, t1), z0, method="DOP853", rtol=RTOL, atol=ATOL, events=event, args=(mu,))
            if not sol.success:
                raise lr_errors.StepFailure("%s error: %s" % (self.class_id, sol.message))
            for t, z in zip(sol.t_events[0], sol.y_events[0]):
                if t <= MIN_EVENT_TIME or (found and t <= found[-1].time + MIN_EVENT_TIME): continue
                stm = z[4:].reshape(4, 4)
                found.append(PointCrossing(float(t), z[:4].copy(), stm, section_correction(z[:4], stm, mu)))
                if len(found) == n: break
            z0 = sol.y[:, -1]
            t0 = t1
        if len(found) < n:
            raise lr_errors.NoTransversalCrossing("%s error: found %d of %d crossings of y = 0 within t <= %g"
                                                  % (self.class_id, len(found), n, t_cap))
        return found

    def crossing(self, q: np.ndarray, n: int=1) -> PointCrossing:
        return self.crossings(q, n)[-1]

    """Jet transport."""

    def jet_flow(self, coeffs: np.ndarray, T: float) -> np.ndarray:
        """
        Flow a curve given as a truncated polynomial.
        coeffs: 4 x (d + 1) coefficients of q(x) = sum_k coeffs[:, k] x^k

        return: coefficients of phi(T, q(x)) truncated at degree d
        """
        coeffs = np.asarray(coeffs, dtype=np.float64)
        shape = coeffs.shape
        mu = self.params.mu

        def rhs(t, z):
            return polynomial_field(z.reshape(shape), mu).ravel()

        sol = solve_ivp(rhs, (0.0, T), coeffs.ravel(), method="DOP853", rtol=RTOL, atol=ATOL)
        if not sol.success:
            raise lr_errors.StepFailure("%s error: %s" % (self.class_id, sol.message))
        return sol.y[:, -1].reshape(shape)


"""Truncated polynomial arithmetic (coefficient index on the last axis)."""

def _pmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)[:a.shape[-1]]

def _ppow(s: np.ndarray, alpha: float) -> np.ndarray:
    """s^alpha by the recurrence u_k = 1/(k s_0) sum_{j<k} (alpha (k - j) - j) s_{k-j} u_j."""
    u = np.zeros_like(s)
    u[0] = s[0] ** alpha
    for k in range(1, s.shape[0]):
        j = np.arange(k)
        u[k] = np.sum((alpha * (k - j) - j) * s[k:0:-1] * u[:k]) / (k * s[0])
    return u

def polynomial_field(c: np.ndarray, mu: float) -> np.ndarray:
    """PRC3BP vector field applied to a 4 x (d + 1) polynomial curve."""
    x, y, px, py = c
    dx1 = x.copy(); dx1[0] -= mu
    dx2 = x.copy(); dx2[0] += 1.0 - mu
    yy = _pmul(y, y)
    w1 = _ppow(_pmul(dx1, dx1) + yy, -1.5)
    w2 = _ppow(_pmul(dx2, dx2) + yy, -1.5)
    ox = x - (1.0 - mu) * _pmul(dx1, w1) - mu * _pmul(dx2, w2)
    oy = y - _pmul(y, (1.0 - mu) * w1 + mu * w2)
    u = px + y
    v = py - x
    return np.stack([u, v, v + ox, -u + oy])
