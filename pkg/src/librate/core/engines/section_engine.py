# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

"""
Poincare maps to {y = 0} with certified return times and derivative enclosures.

The crossing is bracketed in a time window [t1, t1 + 2 delta] around a
floating point estimate: y has opposite strict signs at both ends and
dy/dt = p_y - x excludes 0 on the swept enclosure. The hitting time is then
refined by interval Newton in time and the derivative of the section map
is corrected by

    DP = DPhi - (f / f_y) (e_y^T DPhi).
"""

from __future__ import annotations
import logging
import typing
import numpy as np

import librate.core.common.constants as lr_constants
import librate.core.common.errors as lr_errors
import librate.core.common.structs as lr_structs
from librate.core.ivl.interval import Interval
from librate.core.ivl.iarray import IVector, IMatrix
import librate.core.ivl.linalg as lr_linalg
import librate.core.model.prc3bp as prc3bp
from librate.core.engines.lohner_engine import LohnerEngine, LohnerSet
from librate.core.engines.point_engine import PointEngine, SECTION_INDICES


logger = logging.getLogger(__name__)


class SectionCrossing(typing.NamedTuple):
    section_id: lr_constants.SectionKind
    crossing_box: lr_structs.State
    return_time: Interval
    DP: IMatrix    # 4x4, section-corrected
    DPhi: IMatrix  # 4x4 flow derivative at the crossing
    lohner: LohnerSet

    def DP3(self) -> IMatrix:
        """Derivative in the section coordinates (x, p_x, p_y)."""
        idx = np.ix_(SECTION_INDICES, SECTION_INDICES)
        return IMatrix(self.DP.lo[idx], self.DP.hi[idx])


class CustomSection(typing.NamedTuple):
    """{y = 0} with x > 0 and p_x^2 < 2 (h + Omega(x, y)) at the energy h."""
    energy: Interval
    max_crossings: int = 8


class SectionEngine:
    """Rigorous section crossings built on a LohnerEngine, guided by a PointEngine."""

    def __init__(self, params: lr_structs.ModelParams, options: typing.Optional[lr_structs.IntegratorOptions]=None):
        self.params = params
        self.options = options or lr_structs.IntegratorOptions()
        self.lohner = LohnerEngine("lohner", params, self.options)
        self.point = PointEngine("point", params, self.options)

    def _y_sign(self, S: LohnerSet) -> int:
        y = S.hull()[1]
        if y.lo > 0.0: return 1
        if y.hi < 0.0: return -1
        return 0

    def _ydot(self, box: IVector) -> Interval:
        return box[3] - box[0]

    def cross(self, initial: typing.Union[lr_structs.State, LohnerSet], n_crossings: int,
              section_id: lr_constants.SectionKind=lr_constants.SectionKind.HALF_TURN) -> SectionCrossing:
        S0 = initial if isinstance(initial, LohnerSet) else LohnerSet.from_box(lr_structs.State.coerce(initial))
        estimate = self.point.crossing(S0.center, n_crossings)
        delta = self.options.crossing_window
        if estimate.time <= 2.0 * delta:
            raise lr_errors.NoTransversalCrossing("section error: crossing estimate %.3g lies inside the window" % estimate.time)

        S1 = self.lohner.advance(S0, estimate.time - delta)
        S_end = self.lohner.advance(S1, 2.0 * delta)
        s1, s2 = self._y_sign(S1), self._y_sign(S_end)
        if s1 == 0 or s2 == 0 or s1 == s2:
            raise lr_errors.NoTransversalCrossing("section error: y does not change sign across [%.12g, %.12g] (signs %d, %d)"
                                                  % (estimate.time - delta, estimate.time + delta, s1, s2))

        window = Interval(0.0, 2.0 * delta)
        for _ in range(2):
            swept = self.lohner.advance(S1, window).hull()
            ydot = self._ydot(swept)
            if ydot.mig == 0.0:
                raise lr_errors.NoTransversalCrossing("section error: dy/dt enclosure %r contains 0" % ydot)
            s_mid = window.mid
            y_mid = self.lohner.advance(S1, s_mid).hull()[1]
            newton = s_mid - y_mid / ydot
            refined = newton.intersect(window)
            if refined.is_empty:
                raise lr_errors.NoTransversalCrossing("section error: empty Newton refinement of the hitting time")
            window = refined

        hit = self.lohner.advance(S1, window)
        box = hit.hull()
        if not box[1].contains(0.0):
            raise lr_errors.NoTransversalCrossing("section error: crossing enclosure misses y = 0")
        box = box.with_component(1, Interval(0.0))
        crossing_state = lr_structs.State.from_ivector(box)

        f = prc3bp.vector_field(crossing_state, self.params)
        if f[1].mig == 0.0:
            raise lr_errors.NoTransversalCrossing("section error: f_y contains 0 at the crossing")
        DPhi = hit.deriv()
        DP = DPhi - lr_linalg.outer(f / f[1], DPhi.row(1))
        return_time = hit.time - S0.time
        logger.debug("section info: crossing %d at t=%r", n_crossings, return_time)
        return SectionCrossing(section_id, crossing_state, return_time, DP, DPhi, hit)

    def hit_custom(self, initial: typing.Union[lr_structs.State, LohnerSet], sigma: CustomSection) -> SectionCrossing:
        S0 = initial if isinstance(initial, LohnerSet) else LohnerSet.from_box(lr_structs.State.coerce(initial))
        h = sigma.energy.mid
        n_hit = None
        for k, c in enumerate(self.point.crossings(S0.center, sigma.max_crossings), start=1):
            x, y, px, _ = c.state
            om = float(prc3bp.omega(Interval(x), Interval(0.0), self.params).mid)
            if x > 0.0 and px * px < 2.0 * (h + om):
                n_hit = k
                break
        if n_hit is None:
            raise lr_errors.NoTransversalCrossing("section error: no estimated hit of the custom section in %d crossings" % sigma.max_crossings)

        crossing = self.cross(S0, n_hit, lr_constants.SectionKind.CUSTOM)
        q = crossing.crossing_box
        if q.x.lo <= 0.0:
            raise lr_errors.ConstraintUndecided("section error: crossing box x=%r is not certainly positive" % q.x)
        bound = 2.0 * (sigma.energy + prc3bp.omega(q.x, q.y, self.params))
        if not q.p_x.sqr().hi < bound.lo:
            raise lr_errors.ConstraintUndecided("section error: p_x^2 bound undecided (p_x=%r, 2(h + Omega)=%r)" % (q.p_x, bound))
        return crossing


def poincare_map(q: typing.Union[lr_structs.State, LohnerSet], section: lr_constants.SectionKind, n_crossings: int,
                 params: lr_structs.ModelParams, opts: typing.Optional[lr_structs.IntegratorOptions]=None) -> SectionCrossing:
    """
    The n-th crossing of {y = 0}: one for the half-turn map of S-symmetric orbits, two for the second return.
    Crossings are counted on the floating point estimate of the center trajectory.
    """
    return SectionEngine(params, opts).cross(q, n_crossings, section)


def hit_section_G(q: typing.Union[lr_structs.State, LohnerSet], sigma: CustomSection, params: lr_structs.ModelParams,
                  opts: typing.Optional[lr_structs.IntegratorOptions]=None) -> SectionCrossing:
    """First hit of {y = 0, x > 0, p_x^2 < 2 (h + Omega)}; raises ConstraintUndecided if membership is not certain."""
    return SectionEngine(params, opts).hit_custom(q, sigma)
