# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

"""
Transversal intersection of the unstable and stable manifolds of a Lyapunov
orbit on the section {y = 0, x > 0, p_x^2 < 2 (h + Omega)}.

G maps local coordinates to the first hit of the section. If p_x of G over
the left edge of B_E is negative and over the right edge positive, the
unstable curve crosses p_x = 0 and meets its S-mirror, the stable curve.
Positive slope of the unstable curve in (x, p_x) makes the crossing
transversal.
"""

from __future__ import annotations
import hashlib
import json
import logging
import math
import typing
import numpy as np

import librate.core.common.constants as lr_constants
import librate.core.common.errors as lr_errors
import librate.core.common.structs as lr_structs
from librate.core.ivl.interval import Interval
from librate.core.ivl.iarray import IVector, IMatrix
import librate.core.model.prc3bp as prc3bp
from librate.core.engines.section_engine import CustomSection, SectionCrossing, SectionEngine
from librate.core.proofs.lyapunov_family import FamilyCertificate, HyperbolicityCertificate
from librate.core.proofs.param_method import Chart, FiberCertificate, chart_set, psi_jacobian


logger = logging.getLogger(__name__)

FR = lr_constants.FailureReason
PI = Interval(float(np.nextafter(math.pi, -np.inf)), float(np.nextafter(math.pi, np.inf)))


class SectionProbe(typing.NamedTuple):
    x_l: float
    x_m: float
    x_r: float
    B_c: IVector  # central box, 3 components
    alpha: float

    @classmethod
    def around(cls, x_m: float, half_width: float, B_c: IVector, alpha: float) -> SectionProbe:
        return cls(x_m - half_width, x_m, x_m + half_width, B_c, alpha).validate()

    def validate(self) -> SectionProbe:
        if not self.x_l < self.x_r:
            raise lr_errors.DomainError("probe error: expected x_l < x_r, got %r, %r" % (self.x_l, self.x_r))
        if len(self.B_c) != 3:
            raise lr_errors.DomainError("probe error: B_c must have 3 components")
        return self

    def B_E(self) -> IVector:
        return IVector.from_intervals([Interval(self.x_l, self.x_r)] + list(self.B_c))

    def edge(self, x: float) -> IVector:
        return IVector.from_intervals([Interval(x)] + list(self.B_c))

    def slabs(self, n: int) -> list[IVector]:
        e = np.linspace(self.x_l, self.x_r, n + 1)
        return [IVector.from_intervals([Interval(float(e[i]), float(e[i + 1]))] + list(self.B_c)) for i in range(n)]

    def fan(self, sign: float) -> IVector:
        """V+ (sign = 1) or V- (sign = -1)."""
        r = Interval(self.alpha).sqrt().hi
        return IVector.from_intervals([Interval(sign)] + [Interval(-r, r)] * 3)

    def to_json(self) -> dict:
        return {"x_l": repr(self.x_l), "x_m": repr(self.x_m), "x_r": repr(self.x_r),
                "B_c": self.B_c.to_json(), "alpha": repr(self.alpha)}

    @classmethod
    def from_json(cls, data: dict) -> SectionProbe:
        return cls(float(data["x_l"]), float(data["x_m"]), float(data["x_r"]), IVector.from_json(data["B_c"]), float(data["alpha"]))


class IntersectionCertificate(typing.NamedTuple):
    probe: SectionProbe
    left_image: typing.Optional[lr_structs.State]
    right_image: typing.Optional[lr_structs.State]
    slope_a: Interval
    angle_deg: Interval
    hashes: dict
    verdict: lr_structs.Verdict

    @property
    def verified(self) -> bool:
        return self.verdict.verified

    @property
    def stable_slope(self) -> Interval:
        return -self.slope_a

    def recheck(self) -> bool:
        if not self.verified: return True
        return self.left_image.p_x.hi < 0.0 < self.right_image.p_x.lo and self.slope_a.lo > 0.0

    def to_json(self) -> dict:
        image = lambda s: None if s is None else s.to_json()
        return {"kind": lr_constants.CertificateKind.TRANSVERSAL.value, "probe": self.probe.to_json(),
                "left_image": image(self.left_image), "right_image": image(self.right_image),
                "slope_a": self.slope_a.to_json(), "angle_deg": self.angle_deg.to_json(),
                "hashes": self.hashes, "verdict": self.verdict.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> IntersectionCertificate:
        image = lambda d: None if d is None else lr_structs.State.from_json(d)
        return cls(SectionProbe.from_json(data["probe"]), image(data["left_image"]), image(data["right_image"]),
                   Interval.from_json(data["slope_a"]), Interval.from_json(data["angle_deg"]), dict(data["hashes"]),
                   lr_structs.Verdict.from_json(data["verdict"]))


def content_hash(data: dict) -> str:
    """sha256 of canonical JSON."""
    text = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def central_box(fiber_cert: FiberCertificate, x_r: float) -> IVector:
    """B_c containing pi_y of the fiber enclosure over x <= x_r."""
    r = fiber_cert.y_reach(x_r)
    return IVector(np.full(3, -r), np.full(3, r))


def family_energy(family_cert: FamilyCertificate, params: lr_structs.ModelParams) -> Interval:
    """Energies of all orbits of the family box."""
    return prc3bp.hamiltonian(family_cert.box.U_hull(), params)


def stable_counterpart(state: lr_structs.State) -> lr_structs.State:
    """Crossing of the stable manifold mirrored from an unstable one."""
    return prc3bp.symmetry_S(state)


def _hit(chart: Chart, B: IVector, sigma: CustomSection, engine: SectionEngine) -> SectionCrossing:
    return engine.hit_custom(chart_set(chart, B), sigma)


def check_crossing(probe: SectionProbe, chart: Chart, params: lr_structs.ModelParams,
                   opts: typing.Optional[lr_structs.IntegratorOptions]=None,
                   energy: typing.Optional[Interval]=None) -> tuple[lr_structs.State, lr_structs.State, bool]:
    """
    p_x of G(B_E^l) < 0 < p_x of G(B_E^r).
    Raises SignUndecided when an edge image straddles p_x = 0.
    """
    probe = probe.validate()
    engine = SectionEngine(params, opts)
    sigma = CustomSection(energy if energy is not None else prc3bp.hamiltonian(chart.state, params))
    left = _hit(chart, probe.edge(probe.x_l), sigma, engine).crossing_box
    right = _hit(chart, probe.edge(probe.x_r), sigma, engine).crossing_box
    for name, image in (("left", left), ("right", right)):
        if image.p_x.contains(0.0):
            raise lr_errors.SignUndecided("transversal error: p_x of the %s edge image %r contains 0" % (name, image.p_x))
    passed = left.p_x.hi < 0.0 and right.p_x.lo > 0.0
    logger.info("transversal info: edge images p_x %r | %r, crossing %s", left.p_x, right.p_x, "found" if passed else "not found")
    return left, right, passed


def section_derivative(probe: SectionProbe, chart: Chart, params: lr_structs.ModelParams,
                       opts: typing.Optional[lr_structs.IntegratorOptions]=None, n_sub: int=100,
                       energy: typing.Optional[Interval]=None,
                       map_fn: typing.Optional[typing.Callable]=None) -> IMatrix:
    """Hull over n_sub slabs of B_E of DG = DP C Dpsi, reduced in slab order."""
    sigma = CustomSection(energy if energy is not None else prc3bp.hamiltonian(chart.state, params))

    def worker(B_j: IVector) -> IMatrix:
        crossing = _hit(chart, B_j, sigma, SectionEngine(params, opts))
        return crossing.DP @ (IMatrix.point(chart.C) @ psi_jacobian(chart, B_j))

    slabs = probe.slabs(n_sub)
    parts = list(map_fn(worker, slabs)) if map_fn is not None else [worker(B_j) for B_j in slabs]
    hull = parts[0]
    for D in parts[1:]: hull = hull.hull(D)
    return hull


def fan_slope(DG: IMatrix, probe: SectionProbe) -> tuple[Interval, bool]:
    """
    a = [pi_px DG V+ / pi_x DG V+] hull [pi_px DG V- / pi_x DG V-], and whether both fans
    keep strict signs in x and p_x (positive along V+, negative along V-).
    """
    plus, minus = DG @ probe.fan(1.0), DG @ probe.fan(-1.0)
    if plus[0].mig == 0.0 or minus[0].mig == 0.0:
        raise lr_errors.DenominatorZero("transversal error: pi_x DG V contains 0 (%r, %r)" % (plus[0], minus[0]))
    a = (plus[2] / plus[0]).hull(minus[2] / minus[0])
    signs = plus[0].lo > 0.0 and plus[2].lo > 0.0 and minus[0].hi < 0.0 and minus[2].hi < 0.0
    return a, signs


def slope_bound(probe: SectionProbe, chart: Chart, params: lr_structs.ModelParams,
                opts: typing.Optional[lr_structs.IntegratorOptions]=None, n_sub: int=100,
                energy: typing.Optional[Interval]=None, map_fn: typing.Optional[typing.Callable]=None) -> Interval:
    """Slope of the unstable curve in (x, p_x); the stable curve has slope -a."""
    DG = section_derivative(probe, chart, params, opts, n_sub, energy, map_fn)
    return fan_slope(DG, probe)[0]


def intersection_angle(a: Interval) -> Interval:
    """Acute angle in degrees between lines of slopes a and -a, i.e. arctan|2a / (1 - a^2)|."""
    phi = 2.0 * abs(a).atan()
    half = PI / 2.0
    if phi.lo >= half.hi: acute = PI - phi
    elif phi.hi <= half.lo: acute = phi
    else: acute = Interval(min(phi.lo, (PI - phi).lo), half.hi)
    return acute * 180.0 / PI


def certify_transversal(probe: SectionProbe, chart: Chart, fiber_cert: FiberCertificate, family_cert: FamilyCertificate,
                        hyperbolicity_cert: typing.Optional[HyperbolicityCertificate], params: lr_structs.ModelParams,
                        opts: typing.Optional[lr_structs.IntegratorOptions]=None, n_sub: int=100,
                        map_fn: typing.Optional[typing.Callable]=None) -> IntersectionCertificate:
    """
    Verified when the edge images straddle p_x = 0 with certain signs and the fan slope over
    n_sub slabs of B_E is positive. The family, hyperbolicity and fiber certificates must all
    be verified; a missing one is a prerequisite failure.
    """
    hashes = {"chart": content_hash(chart.to_json()), "probe": content_hash(probe.to_json()),
              "family": content_hash(family_cert.to_json())}

    def failed(reason, message, left=None, right=None, a=Interval.EMPTY):
        logger.info("transversal info: failed (%s): %s", reason.name, message)
        return IntersectionCertificate(probe, left, right, a, Interval.EMPTY, hashes, lr_structs.Verdict.failed(reason, message))

    prerequisites = [("family", family_cert), ("hyperbolicity", hyperbolicity_cert), ("fiber", fiber_cert)]
    for name, cert in prerequisites:
        if cert is None: return failed(FR.PREREQUISITE_FAILED, "no %s certificate" % name)
        if not cert.verified: return failed(FR.PREREQUISITE_FAILED, "%s certificate is not verified" % name)
    if fiber_cert.local.x_hi < probe.x_r:
        return failed(FR.PREREQUISITE_FAILED, "fiber enclosure ends at x=%r before x_r=%r" % (fiber_cert.local.x_hi, probe.x_r))
    if not fiber_cert.local.B0[0].hi < probe.x_l:
        return failed(FR.PREREQUISITE_FAILED, "pi_x B0 is not below x_l")
    if not central_box(fiber_cert, probe.x_r).subset(probe.B_c):
        return failed(FR.PREREQUISITE_FAILED, "B_c does not contain the fiber enclosure")

    energy = family_energy(family_cert, params)
    try:
        left, right, passed = check_crossing(probe, chart, params, opts, energy)
    except lr_errors.SignUndecided as e:
        return failed(FR.SIGN_UNDECIDED, str(e))
    except lr_errors.PROOF_ERRORS as e:
        return failed(FR.INTEGRATOR_ERROR, str(e))
    if not passed:
        return failed(FR.SIGN_UNDECIDED, "edge images lie on the same side of p_x = 0", left, right)

    try:
        DG = section_derivative(probe, chart, params, opts, n_sub, energy, map_fn)
        a, signs = fan_slope(DG, probe)
    except lr_errors.DenominatorZero as e:
        return failed(FR.SLOPE_NOT_POSITIVE, str(e), left, right)
    except lr_errors.PROOF_ERRORS as e:
        return failed(FR.INTEGRATOR_ERROR, str(e), left, right)
    if not (a.lo > 0.0 and signs):
        return failed(FR.SLOPE_NOT_POSITIVE, "slope %r is not positive" % a, left, right, a)

    angle = intersection_angle(a)
    logger.info("transversal info: verified with slope %r and angle %r deg", a, angle)
    return IntersectionCertificate(probe, left, right, a, angle, hashes, lr_structs.Verdict.passed())
