# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

"""
Existence, energy foliation and hyperbolicity of the planar Lyapunov family.

A family box is the parallelogram

    U = {(x, 0, 0, p_y) : x in I, p_y = a (x - x0) + iota, iota in J1}

in the section {y = 0, p_x = 0}. Points of U whose half-turn image has
p_x = 0 lie on S-symmetric periodic orbits; interval Newton in p_y at x0
together with a slope bound on U gives a curve p_y = kappa(x) over I.
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
from librate.core.engines.lohner_engine import LohnerSet
from librate.core.engines.point_engine import PointEngine
from librate.core.engines.section_engine import SectionEngine


logger = logging.getLogger(__name__)

FR = lr_constants.FailureReason
RECIPROCITY_SLACK = 0.03


class FamilyBox(typing.NamedTuple):
    x0: float
    I: Interval
    p_y0: float
    J0: Interval
    J1: Interval
    a_slope: float

    @classmethod
    def from_radii(cls, x0: float, p_y0: float, a_slope: float, r: float, j0_radius: float, j1_radius: float) -> FamilyBox:
        box = cls(x0, Interval.around(x0, r), p_y0, Interval.around(p_y0, j0_radius), Interval.around(p_y0, j1_radius), a_slope)
        return box.validate()

    def validate(self) -> FamilyBox:
        if not self.J0.subset(self.J1):
            raise lr_errors.DomainError("family box error: J0 must lie in J1")
        if not (self.I.contains(self.x0) and self.J0.contains(self.p_y0)):
            raise lr_errors.DomainError("family box error: centers must lie in I and J0")
        return self

    @property
    def center(self) -> np.ndarray:
        return np.array([self.x0, 0.0, 0.0, self.p_y0])

    def U0(self) -> LohnerSet:
        """{x0} x {0} x {0} x J0."""
        return LohnerSet.from_box(lr_structs.State(Interval(self.x0), Interval(0.0), Interval(0.0), self.J0))

    def U(self) -> LohnerSet:
        frame = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [self.a_slope, 1.0]])
        coeffs = IVector.from_intervals([self.I - self.x0, self.J1 - self.p_y0])
        return LohnerSet.from_parallelogram(IVector.point(self.center), frame, coeffs)

    def p_y_over(self, x: Interval) -> Interval:
        """p_y range of U above x."""
        return self.a_slope * (x - self.x0) + self.J1

    def U_hull(self) -> lr_structs.State:
        return lr_structs.State(self.I, Interval(0.0), Interval(0.0), self.p_y_over(self.I))

    def to_json(self) -> dict:
        return {"x0": repr(self.x0), "I": self.I.to_json(), "p_y0": repr(self.p_y0),
                "J0": self.J0.to_json(), "J1": self.J1.to_json(), "a_slope": repr(self.a_slope)}

    @classmethod
    def from_json(cls, data: dict) -> FamilyBox:
        return cls(float(data["x0"]), Interval.from_json(data["I"]), float(data["p_y0"]),
                   Interval.from_json(data["J0"]), Interval.from_json(data["J1"]), float(data["a_slope"]))


class FamilyCertificate(typing.NamedTuple):
    box: FamilyBox
    newton_set: Interval
    kappa_slope: Interval
    dH_dx: Interval
    verdict: lr_structs.Verdict
    half_turn_time: Interval = Interval.EMPTY

    @property
    def verified(self) -> bool:
        return self.verdict.verified

    def recheck(self) -> bool:
        """Re-evaluate the stored inclusion conditions."""
        if not self.verified: return True
        if self.newton_set.is_empty or not self.newton_set.subset(self.box.J0): return False
        return slope_condition(self.box, self.kappa_slope)

    def to_json(self) -> dict:
        return {"kind": lr_constants.CertificateKind.FAMILY.value, "box": self.box.to_json(),
                "newton_set": self.newton_set.to_json(), "kappa_slope": self.kappa_slope.to_json(),
                "dH_dx": self.dH_dx.to_json(), "half_turn_time": self.half_turn_time.to_json(),
                "verdict": self.verdict.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> FamilyCertificate:
        return cls(FamilyBox.from_json(data["box"]), Interval.from_json(data["newton_set"]),
                   Interval.from_json(data["kappa_slope"]), Interval.from_json(data["dH_dx"]),
                   lr_structs.Verdict.from_json(data["verdict"]), Interval.from_json(data["half_turn_time"]))


class HyperbolicityCertificate(typing.NamedTuple):
    A_row: IMatrix
    B_mat: IMatrix
    lambda1: Interval
    lambda2: Interval
    return_time: Interval
    verdict: lr_structs.Verdict

    @property
    def verified(self) -> bool:
        return self.verdict.verified

    def recheck(self) -> bool:
        if not self.verified: return True
        lam1, lam2, split = lr_linalg.eig2_real(self.B_mat)
        return split and abs(lam1).lo > 1.0 and abs(lam2).hi < 1.0 and reciprocal(lam1, lam2)

    def to_json(self) -> dict:
        return {"kind": lr_constants.CertificateKind.HYPERBOLICITY.value, "A_row": self.A_row.to_json(),
                "B_mat": self.B_mat.to_json(), "lambda1": self.lambda1.to_json(), "lambda2": self.lambda2.to_json(),
                "return_time": self.return_time.to_json(), "verdict": self.verdict.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> HyperbolicityCertificate:
        return cls(IMatrix.from_json(data["A_row"]), IMatrix.from_json(data["B_mat"]), Interval.from_json(data["lambda1"]),
                   Interval.from_json(data["lambda2"]), Interval.from_json(data["return_time"]),
                   lr_structs.Verdict.from_json(data["verdict"]))


def reciprocal(lam1: Interval, lam2: Interval, slack: float=RECIPROCITY_SLACK) -> bool:
    """lam1 * lam2 meets [1 - slack, 1 + slack]; the eigenvalues of the reduced return map come in pairs l, 1/l."""
    if lam1.is_empty or lam2.is_empty: return False
    return not (lam1 * lam2).intersect(Interval(1.0 - slack, 1.0 + slack)).is_empty


def slope_margin(box: FamilyBox) -> Interval:
    """(|J1| - |J0|) / |I| with |J1| bounded from below and |J0|, |I| from above."""
    return (Interval(box.J1.width_lower) - Interval(box.J0.width)) / Interval(box.I.width)


def slope_condition(box: FamilyBox, kappa_slope: Interval) -> bool:
    """|alpha - a| < (|J1| - |J0|) / |I| for every alpha in kappa_slope."""
    if kappa_slope.is_empty: return False
    if box.I.width == 0.0: return True
    deviation = abs(kappa_slope - box.a_slope)
    return deviation.hi < slope_margin(box).lo


def _failed_family(box: FamilyBox, reason: lr_constants.FailureReason, message: str,
                   newton_set: Interval=Interval.EMPTY, kappa_slope: Interval=Interval.EMPTY,
                   half_turn_time: Interval=Interval.EMPTY) -> FamilyCertificate:
    logger.info("family info: box at x0=%r failed (%s): %s", box.x0, reason.name, message)
    return FamilyCertificate(box, newton_set, kappa_slope, Interval.EMPTY, lr_structs.Verdict.failed(reason, message), half_turn_time)


def verify_family_box(box: FamilyBox, params: lr_structs.ModelParams,
                      opts: typing.Optional[lr_structs.IntegratorOptions]=None) -> FamilyCertificate:
    """
    Verified when N = p_y0 - pi_px P(x0, 0, 0, p_y0) / dP(U0)_{p_x p_y} lies in J0 and the slope
    alpha = -dP(U)_{p_x x} / dP(U)_{p_x p_y} stays within the margin of the box.
    """
    engine = SectionEngine(params, opts)
    try:
        at_center = engine.cross(lr_structs.State.point(*box.center), 1)
        on_U0 = engine.cross(box.U0(), 1)
    except lr_errors.PROOF_ERRORS as e:
        return _failed_family(box, FR.INTEGRATOR_ERROR, str(e))

    f0 = at_center.crossing_box.p_x
    outcome = lr_linalg.interval_newton(IVector.from_intervals([f0]), IMatrix.from_intervals([[on_U0.DP[2, 3]]]),
                                        IVector.from_intervals([box.J0]), [box.p_y0])
    newton_set = outcome.refined[0]
    if not outcome.proven:
        return _failed_family(box, FR.NEWTON_FAILED, "N=%r not inside J0=%r" % (newton_set, box.J0), newton_set)

    try:
        on_U = engine.cross(box.U(), 1)
    except lr_errors.PROOF_ERRORS as e:
        return _failed_family(box, FR.INTEGRATOR_ERROR, str(e), newton_set)

    d23 = on_U.DP[2, 3]
    if d23.mig == 0.0:
        return _failed_family(box, FR.SLOPE_FAILED, "dP(U)_23=%r contains 0" % d23, newton_set, half_turn_time=on_U.return_time)
    kappa_slope = -(on_U.DP[2, 0] / d23)
    if not slope_condition(box, kappa_slope):
        return _failed_family(box, FR.SLOPE_FAILED, "slope %r too far from a=%r" % (kappa_slope, box.a_slope),
                              newton_set, kappa_slope, on_U.return_time)

    cert = FamilyCertificate(box, newton_set, kappa_slope, Interval.EMPTY, lr_structs.Verdict.passed(), on_U.return_time)
    cert = cert._replace(dH_dx=energy_foliation(cert, params))
    logger.debug("family info: box at x0=%r verified, kappa'=%r", box.x0, kappa_slope)
    return cert


def energy_foliation(cert: FamilyCertificate, params: lr_structs.ModelParams) -> Interval:
    """Enclosure of d/dx H(q(x)) on I: dH/dx(U) + dH/dp_y(U) kappa'."""
    grad = prc3bp.hamiltonian_gradient(cert.box.U_hull(), params)
    return grad[0] + grad[3] * cert.kappa_slope


def endpoint_energies(box: FamilyBox, params: lr_structs.ModelParams) -> tuple[Interval, Interval]:
    """H over the vertical segments of U above both ends of I."""
    out = []
    for end in (Interval(box.I.lo), Interval(box.I.hi)):
        out.append(prc3bp.hamiltonian(lr_structs.State(end, Interval(0.0), Interval(0.0), box.p_y_over(end)), params))
    return out[0], out[1]


def verify_hyperbolicity(cert: FamilyCertificate, params: lr_structs.ModelParams,
                         opts: typing.Optional[lr_structs.IntegratorOptions]=None) -> HyperbolicityCertificate:
    """
    Eigenvalues of the second return map restricted to the energy level, parameterized by (p_x, p_y):
    B = (dP_21, dP_31)^T A + dP_{23 block}, with A = -(dH/dx)^-1 (dH/dp_x, dH/dp_y) over U.
    """
    empty_A, empty_B = IMatrix.zeros(1, 2), IMatrix.zeros(2)

    def failed(reason, message, A=empty_A, B=empty_B, l1=Interval.EMPTY, l2=Interval.EMPTY, t=Interval.EMPTY):
        logger.info("hyperbolicity info: box at x0=%r failed (%s): %s", cert.box.x0, reason.name, message)
        return HyperbolicityCertificate(A, B, l1, l2, t, lr_structs.Verdict.failed(reason, message))

    if not cert.verified:
        return failed(FR.PREREQUISITE_FAILED, "family certificate is not verified")

    grad = prc3bp.hamiltonian_gradient(cert.box.U_hull(), params)
    if grad[0].mig == 0.0:
        return failed(FR.ENERGY_DERIVATIVE_VANISHES, "dH/dx=%r contains 0 on U" % grad[0])
    A = IMatrix.from_intervals([[-(grad[2] / grad[0]), -(grad[3] / grad[0])]])

    try:
        second = SectionEngine(params, opts).cross(cert.box.U(), 2, lr_constants.SectionKind.FULL_TURN)
    except lr_errors.PROOF_ERRORS as e:
        return failed(FR.INTEGRATOR_ERROR, str(e), A)

    DP = second.DP
    column = IMatrix(DP.lo[2:4, 0:1], DP.hi[2:4, 0:1])
    block = IMatrix(DP.lo[2:4, 2:4], DP.hi[2:4, 2:4])
    B = column @ A + block
    lam1, lam2, split = lr_linalg.eig2_real(B)
    if not split:
        return failed(FR.EIG_SPLIT_FAILED, "eigenvalues of B are not certainly real and distinct", A, B, t=second.return_time)
    if not (abs(lam1).lo > 1.0 and abs(lam2).hi < 1.0):
        return failed(FR.EIG_SPLIT_FAILED, "no splitting |l1| > 1 > |l2| (l1=%r, l2=%r)" % (lam1, lam2), A, B, lam1, lam2, second.return_time)
    if not reciprocal(lam1, lam2):
        return failed(FR.RECIPROCITY_FAILED, "1 is not within %g of l1*l2=%r" % (RECIPROCITY_SLACK, lam1 * lam2), A, B, lam1, lam2, second.return_time)
    logger.debug("hyperbolicity info: box at x0=%r verified, l1=%r, l2=%r", cert.box.x0, lam1, lam2)
    return HyperbolicityCertificate(A, B, lam1, lam2, second.return_time, lr_structs.Verdict.passed())


"""Continuation."""

def check_chain(boxes: list[FamilyBox], min_overlap: float=0.005):
    """
    Consecutive I_i must overlap by at least min_overlap times the smaller radius.
    The default is half the overlap built by chain_abscissae.
    """
    for i in range(len(boxes) - 1):
        left, right = boxes[i].I, boxes[i + 1].I
        overlap = left.hi - right.lo
        radius = min(left.rad, right.rad)
        if right.lo < left.lo or overlap < min_overlap * radius:
            raise lr_errors.ChainGap("family error: boxes %d and %d overlap by %.3g < %.3g"
                                     % (i, i + 1, overlap, min_overlap * radius))


def family_boxes(seeds: list[tuple[float, float, float]], r: float, j0_radius: float, j1_radius: float) -> list[FamilyBox]:
    return [FamilyBox.from_radii(x, p_y, a, r, j0_radius, j1_radius) for x, p_y, a in seeds]


def continue_family(seeds: list[tuple[float, float, float]], r: float, j0_radius: float, j1_radius: float,
                    params: lr_structs.ModelParams, opts: typing.Optional[lr_structs.IntegratorOptions]=None,
                    map_fn: typing.Optional[typing.Callable]=None, progress_every: int=500) -> list[FamilyCertificate]:
    """
    Verify chained boxes I_i = x_i + [-r, r], J_k = p_y_i + [-j_k, j_k], k = 0, 1.
    map_fn: optional ordered map (e.g. a thread pool map); certificates are returned in seed order
    """
    boxes = family_boxes(seeds, r, j0_radius, j1_radius)
    check_chain(boxes)
    worker = lambda box: verify_family_box(box, params, opts)
    results = map_fn(worker, boxes) if map_fn is not None else map(worker, boxes)
    certs = []
    for i, cert in enumerate(results):
        certs.append(cert)
        if (i + 1) % progress_every == 0: logger.info("family info: %d of %d boxes done", i + 1, len(boxes))
    failed = [i for i, c in enumerate(certs) if not c.verified]
    if failed: logger.warning("family warning: %d of %d boxes failed (first index %d)", len(failed), len(certs), failed[0])
    return certs


def tube_radius(certs: list[FamilyCertificate], seeds: list[tuple[float, float, float]]) -> float:
    """
    Upper bound on |kappa(x) - l(x)| over all certified boxes, where l joins the seeds (x_i, p_y_i)
    linearly. Both bounds are linear between breakpoints so endpoints of the pieces suffice.
    """
    xs = np.array([s[0] for s in seeds])
    ps = np.array([s[1] for s in seeds])
    if len(xs) < 2: raise lr_errors.DomainError("tube_radius error: need at least two seeds")

    def interpolant(x: Interval) -> Interval:
        k = int(np.clip(np.searchsorted(xs, x.mid) - 1, 0, len(xs) - 2))
        x_k, p_k = float(xs[k]), float(ps[k])
        slope = (Interval(float(ps[k + 1])) - p_k) / (Interval(float(xs[k + 1])) - x_k)
        return slope * (x - x_k) + p_k

    worst = 0.0
    for cert in certs:
        if not cert.verified:
            raise lr_errors.DomainError("tube_radius error: box at x0=%r is not verified" % cert.box.x0)
        I = cert.box.I
        knots = [I.lo] + [x for x in xs if I.lo < x < I.hi] + [I.hi]
        for x in map(float, knots):
            gap = cert.box.p_y_over(Interval(x)) - interpolant(Interval(x))
            worst = max(worst, gap.mag)
    return worst


"""Non-rigorous seeds."""

def shoot_seed(x: float, p_y_guess: float, params: lr_structs.ModelParams,
               opts: typing.Optional[lr_structs.IntegratorOptions]=None, tol: float=1e-15, max_iter: int=30) -> tuple[float, float]:
    """
    Newton on p_y so that the half-turn image of (x, 0, 0, p_y) has p_x = 0.
    return: (p_y, a) with a = -dP_21 / dP_23 the slope of the family at x
    """
    engine = PointEngine("point", params, opts)
    p_y = p_y_guess
    for _ in range(max_iter):
        c = engine.crossing(np.array([x, 0.0, 0.0, p_y]), 1)
        step = c.state[2] / c.DP[2, 3]
        p_y -= step
        if abs(step) < tol: break
    else:
        raise lr_errors.IsolationFailed("seed error: shooting at x=%r did not converge" % x)
    c = engine.crossing(np.array([x, 0.0, 0.0, p_y]), 1)
    return p_y, float(-c.DP[2, 0] / c.DP[2, 3])


def generate_seeds(x_values: typing.Sequence[float], p_y_guess: float, params: lr_structs.ModelParams,
                   opts: typing.Optional[lr_structs.IntegratorOptions]=None) -> list[tuple[float, float, float]]:
    """Seeds (x_i, p_y_i, a_i) continued from p_y_guess along x_values (linear predictor)."""
    seeds = []
    guess = p_y_guess
    for i, x in enumerate(x_values):
        if i >= 1: guess = seeds[-1][1] + seeds[-1][2] * (x - seeds[-1][0])
        p_y, a = shoot_seed(float(x), guess, params, opts)
        seeds.append((float(x), p_y, a))
    return seeds


def chain_abscissae(center: float, count: int, r: float, overlap: float=0.01) -> np.ndarray:
    """count abscissae centred on center, spaced so consecutive [x - r, x + r] overlap by overlap * r."""
    spacing = (2.0 - overlap) * r
    return center + spacing * (np.arange(count) - 0.5 * (count - 1))
