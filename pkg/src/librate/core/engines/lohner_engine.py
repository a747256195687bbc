# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

"""
Rigorous flow enclosures by the Taylor method with a Lohner set representation.

A set is carried as

    x in center + C r0 + B r,     DPhi in Vm + Bv Ev

with point matrices C, B, Vm, Bv and interval coefficients r0, r, Ev. The
frame C of a parallelogram input is transported with the midpoint Jacobian
and never reorthogonalized; the frame B is replaced by the orthogonal factor
of mid(J) B after every step.
"""

from __future__ import annotations
import logging
import typing
import numpy as np

import librate.core.common.errors as lr_errors
import librate.core.common.structs as lr_structs
import librate.core.common.math as lr_math
import librate.core.ivl.rounding as rnd
from librate.core.ivl.interval import Interval
from librate.core.ivl.iarray import IVector, IMatrix
import librate.core.ivl.linalg as lr_linalg
import librate.core.model.prc3bp as prc3bp
from librate.core.engines.engine_base import FlowEngineBase
from librate.core.engines.taylor_series import taylor_coefficients


logger = logging.getLogger(__name__)


class LohnerSet:
    """Doubleton representation of a set of states and of the derivative of the flow on it."""

    __slots__ = ("center", "C", "r0", "B", "r", "Vm", "Bv", "Ev", "time")

    def __init__(self, center: np.ndarray, C: np.ndarray, r0: IVector, B: np.ndarray, r: IVector,
                 Vm: np.ndarray, Bv: np.ndarray, Ev: IMatrix, time: Interval):
        self.center = np.asarray(center, dtype=np.float64)
        self.C = np.asarray(C, dtype=np.float64)
        self.r0 = r0
        self.B = np.asarray(B, dtype=np.float64)
        self.r = r
        self.Vm = np.asarray(Vm, dtype=np.float64)
        self.Bv = np.asarray(Bv, dtype=np.float64)
        self.Ev = Ev
        self.time = time

    @classmethod
    def from_box(cls, q: typing.Union[lr_structs.State, IVector]) -> LohnerSet:
        box = q.to_ivector() if isinstance(q, lr_structs.State) else q
        return cls.from_parallelogram(box, np.zeros((4, 0)), IVector(np.zeros(0)))

    @classmethod
    def from_parallelogram(cls, center: IVector, frame: np.ndarray, coeffs: IVector) -> LohnerSet:
        """
        The set center + frame @ coeffs; an interval center is absorbed in the remainder.
        center: IVector(4)
        frame:  4 x k point matrix
        coeffs: IVector(k)
        """
        frame = np.asarray(frame, dtype=np.float64)
        if frame.shape != (4, len(coeffs)):
            raise lr_errors.DomainError("lohner set error: frame shape %s does not match %d coefficients" % (frame.shape, len(coeffs)))
        c = center.mid()
        eye = np.eye(4)
        return cls(c, frame, coeffs, eye, center - c, eye, eye, IMatrix.zeros(4), Interval(0.0))

    def hull(self) -> IVector:
        out = IVector.point(self.center) + IMatrix.point(self.B) @ self.r
        if len(self.r0) > 0: out = out + IMatrix.point(self.C) @ self.r0
        return out

    def deriv(self) -> IMatrix:
        return IMatrix.point(self.Vm) + IMatrix.point(self.Bv) @ self.Ev


class FlowEnclosure(typing.NamedTuple):
    t_span: Interval
    state_out: lr_structs.State
    deriv_out: IMatrix
    lohner: LohnerSet


def _powers(h: Interval, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Enclosures of h^0 .. h^n."""
    lo = np.empty(n + 1)
    hi = np.empty(n + 1)
    for k in range(n + 1):
        lo[k], hi[k] = rnd.ipow(h.lo, h.hi, k)
    return lo, hi


def _series_sum(clo: np.ndarray, chi: np.ndarray, hlo: np.ndarray, hhi: np.ndarray):
    """sum_k c_k h^k for coefficient arrays with the index on axis 0."""
    shape = (-1,) + (1,) * (clo.ndim - 1)
    plo, phi = rnd.mul(clo, chi, hlo.reshape(shape), hhi.reshape(shape))
    return rnd.sum_bounds(plo, phi, axis=0)


class LohnerEngine(FlowEngineBase):
    """Validated integration of the PRC3BP with its first variational equation."""

    def __init__(self, class_id: str="lohner", params: typing.Optional[lr_structs.ModelParams]=None,
                 options: typing.Optional[lr_structs.IntegratorOptions]=None):
        super().__init__(class_id, params, options)

    def flow(self, initial: typing.Union[lr_structs.State, IVector, LohnerSet], T) -> FlowEnclosure:
        """
        initial: a box or an already transported set
        T:       float or Interval duration measured from the set's current time; may be negative
        """
        S = initial if isinstance(initial, LohnerSet) else LohnerSet.from_box(initial)
        S = self.advance(S, T)
        return FlowEnclosure(S.time, lr_structs.State.from_ivector(S.hull()), S.deriv(), S)

    def advance(self, S: LohnerSet, T) -> LohnerSet:
        T = Interval.coerce(T)
        if T.lo < 0.0 < T.hi:
            raise lr_errors.DomainError("%s error: time interval %r straddles 0" % (self.class_id, T))
        if T.hi <= 0.0 and T.lo < T.hi:
            S = self._advance_by(S, T.hi)
            return self._sweep(S, T.lo - T.hi)
        S = self._advance_by(S, T.lo)
        if T.hi > T.lo: S = self._sweep(S, T.hi - T.lo)
        return S

    """Step control."""

    def _predict(self, S: LohnerSet) -> float:
        """Step size from the decay of the Taylor coefficients at the center."""
        p = self.options.taylor_order
        tc = taylor_coefficients(IVector.point(S.center), p, self.params.mu)
        mags = np.maximum(np.abs(tc.state_lo), np.abs(tc.state_hi)).max(axis=1)
        candidates = [(self.options.abs_tolerance / mags[k]) ** (1.0 / k) for k in (p - 1, p) if mags[k] > 0.0]
        h = min(candidates) if candidates else self.options.max_step
        return float(min(max(h, self.options.min_step), self.options.max_step))

    def _advance_by(self, S: LohnerSet, duration: float) -> LohnerSet:
        """Integrate over exactly `duration`; the last step is an interval step absorbing rounding in the elapsed time."""
        if duration == 0.0: return S
        sign = 1.0 if duration > 0.0 else -1.0
        elapsed = Interval(0.0)
        n_steps = 0
        while True:
            remaining = abs(duration - elapsed.mid)
            h_try = self._predict(S)
            last = remaining <= h_try
            h = Interval(duration) - elapsed if last else Interval(sign * h_try)
            S, h_used = self._validated_step(S, h, sign)
            elapsed = elapsed + h_used
            n_steps += 1
            if last and h_used is h: break
        logger.debug("%s info: advanced %.6g time units in %d steps", self.class_id, duration, n_steps)
        return S

    def _sweep(self, S: LohnerSet, width: float) -> LohnerSet:
        """Replace the set by its union over times [0, width] (width may be negative)."""
        sign = 1.0 if width > 0.0 else -1.0
        total = abs(width)
        covered = 0.0
        while covered < total:
            s = rnd.up(min(total - covered, self._predict(S)))
            h = Interval(0.0, s) if sign > 0.0 else Interval(-s, 0.0)
            S, h_used = self._validated_step(S, h, sign)
            covered += h_used.mag
        return S

    def _validated_step(self, S: LohnerSet, h: Interval, sign: float) -> tuple[LohnerSet, Interval]:
        sweeping = h.lo == 0.0 or h.hi == 0.0
        while True:
            out = self._step(S, h)
            if out is not None:
                if out.hull().max_width() > self.options.width_cap:
                    raise lr_errors.BlowUp("%s error: enclosure width %.3g exceeds cap %.3g at t=%r"
                                           % (self.class_id, out.hull().max_width(), self.options.width_cap, out.time))
                return out, h
            size = 0.5 * h.mag
            if size < self.options.min_step:
                raise lr_errors.StepFailure("%s error: cannot validate a step of size %.3g at t=%r" % (self.class_id, size, S.time))
            logger.debug("%s info: step rejected, retrying with %.3g", self.class_id, size)
            if sweeping: h = Interval(0.0, size) if sign > 0.0 else Interval(-size, 0.0)
            else: h = Interval(sign * size)

    """One step."""

    def _rough_enclosure(self, X: IVector, h: Interval) -> typing.Optional[IVector]:
        """Y with X + [0, h] f(Y) inside int Y; the returned set encloses x(t) for t between 0 and h."""
        H = Interval(min(h.lo, 0.0), max(h.hi, 0.0))
        fX = prc3bp.vector_field(lr_structs.State.from_ivector(X), self.params)
        Y = X + fX * H
        for _ in range(8):
            Y = Y.inflate(1.5, 1e-14 + 0.05 * Y.max_width())
            try: fY = prc3bp.vector_field(lr_structs.State.from_ivector(Y), self.params)
            except lr_errors.CollisionBox: return None
            Z = X + fY * H
            if Z.interior(Y): return Z
            Y = Y.hull(Z)
        return None

    def _step(self, S: LohnerSet, h: Interval) -> typing.Optional[LohnerSet]:
        p = self.options.taylor_order
        mu = self.params.mu
        X = S.hull()
        Y = self._rough_enclosure(X, h)
        if Y is None: return None

        try:
            tc = taylor_coefficients(IVector.point(S.center), p, mu)
            tX = taylor_coefficients(X, p, mu, variational=True)
            tY = taylor_coefficients(Y, p + 1, mu, variational=True)
        except lr_errors.DivisionByZeroInterval:
            return None
        hlo, hhi = _powers(h, p + 1)
        h_last = Interval(hlo[p + 1], hhi[p + 1])

        T_center = IVector(*_series_sum(tc.state_lo, tc.state_hi, hlo[:p + 1], hhi[:p + 1]))
        remainder = tY.state(p + 1) * h_last
        J = IMatrix(*_series_sum(tX.var_lo, tX.var_hi, hlo[:p + 1], hhi[:p + 1]))

        # DPhi(xi) for xi between 0 and h stays within I +- (exp(|h| L) - 1)
        lipschitz = lr_linalg.norm_inf(prc3bp.variational_field(lr_structs.State.from_ivector(Y), self.params))
        _, growth = rnd.exp(0.0, rnd.up(h.mag * lipschitz))
        delta = float(rnd.up(growth - 1.0))
        eye = np.eye(4)
        W = IMatrix(rnd.down(eye - delta), rnd.up(eye + delta))
        J_full = J + (tY.variational(p + 1) * h_last) @ W

        # state part
        z = T_center + remainder
        C_new = S.C
        if len(S.r0) > 0:
            JC = J @ IMatrix.point(S.C)
            C_new = JC.mid()
            z = z + (JC - C_new) @ S.r0
        JB = J @ IMatrix.point(S.B)
        B_new = lr_math.ordered_qr(JB.mid(), S.r.rad())
        center_new = z.mid()
        B_inv = lr_linalg.inverse_enclosure(B_new)
        r_new = (B_inv @ JB) @ S.r + B_inv @ (z - center_new)

        # derivative part
        JV = J_full @ IMatrix.point(S.Vm)
        Vm_new = JV.mid()
        JBv = J_full @ IMatrix.point(S.Bv)
        Bv_new = lr_math.ordered_qr(JBv.mid(), S.Ev.rad().max(axis=1))
        Bv_inv = lr_linalg.inverse_enclosure(Bv_new)
        Ev_new = (Bv_inv @ JBv) @ S.Ev + Bv_inv @ (JV - Vm_new)

        return LohnerSet(center_new, C_new, S.r0, B_new, r_new, Vm_new, Bv_new, Ev_new, S.time + h)


def flow_enclose(q: typing.Union[lr_structs.State, LohnerSet], T, params: lr_structs.ModelParams,
                 opts: typing.Optional[lr_structs.IntegratorOptions]=None) -> FlowEnclosure:
    """
    Enclosure of phi(t, q) and DPhi(t, q) for every t in T and q in the input.
    Raises StepFailure, CollisionBox or BlowUp when the integration cannot be certified.
    """
    engine = LohnerEngine(params=params, options=opts)
    return engine.flow(q, T)
