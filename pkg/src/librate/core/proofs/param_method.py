# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

"""
Local coordinates around a saddle-center fixed point of the period map and
rigorous bounds for the local map F = psi^-1 o Phi~_T o psi.

A chart is (q0, C, K, lambda, T): physical points are q = C psi(v) + q0 with

    psi_0(x, y) = K_0(x) - (y_1 K_1'(x) + y_2 K_2'(x) + y_3 K_3'(x))
    psi_i(x, y) = K_i(x) + y_i K_0'(x),    i = 1, 2, 3,

where K is an approximate solution of Phi~_T(K(x)) = K(lambda x). Images of F
are obtained by interval Newton on

    G(tau, v1, v2) = Phi_tau(C psi(v1) + q0) - (C psi(lambda(v2)) + q0),

so psi is never inverted.
"""

from __future__ import annotations
import logging
import typing
import numpy as np
import numpy.polynomial.polynomial as npoly

import librate.core.common.constants as lr_constants
import librate.core.common.errors as lr_errors
import librate.core.common.math as lr_math
import librate.core.common.structs as lr_structs
from librate.core.ivl.interval import Interval
from librate.core.ivl.iarray import IVector, IMatrix
import librate.core.ivl.linalg as lr_linalg
import librate.core.model.prc3bp as prc3bp
from librate.core.engines.lohner_engine import LohnerEngine, LohnerSet
from librate.core.engines.point_engine import PointEngine
from librate.core.engines.section_engine import SectionEngine
from librate.core.proofs.cone_verifier import ConeForm, ConeCertificate, certify_unstable_disc
from librate.core.proofs.lyapunov_family import FamilyCertificate


logger = logging.getLogger(__name__)

MAX_INFLATIONS = 5


"""Interval polynomials (ascending coefficients)."""

def _horner(coeffs: list[Interval], x: Interval) -> Interval:
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]): acc = acc * x + c
    return acc

def _derivative(coeffs: list[Interval]) -> list[Interval]:
    if len(coeffs) <= 1: return [Interval(0.0)]
    return [Interval(float(k)) * coeffs[k] for k in range(1, len(coeffs))]


class Chart:
    """Local chart (q0, C, K, lambda, T) of the period map."""

    def __init__(self, q0: np.ndarray, C: np.ndarray, K: np.ndarray, lambda_scale: float, T: Interval):
        """
        q0:           base point (x0, 0, 0, p_y0)
        C:            4x4 matrix to approximate real Jordan coordinates
        K:            4 x (d + 1) ascending coefficients of K_0 .. K_3
        lambda_scale: approximate unstable eigenvalue
        T:            enclosure of the periods of the orbits covered by the chart
        """
        self.q0 = np.asarray(q0, dtype=np.float64)
        self.C = np.asarray(C, dtype=np.float64)
        self.K = np.asarray(K, dtype=np.float64)
        self.lambda_scale = float(lambda_scale)
        self.T = T
        if self.C.shape != (4, 4) or self.K.ndim != 2 or self.K.shape[0] != 4:
            raise lr_errors.DomainError("chart error: expected a 4x4 matrix C and 4 polynomials K")
        if not lr_math.is_well_conditioned(self.C):
            raise lr_errors.SingularEnclosure("chart error: C is numerically singular")
        if np.any(self.K[:, 0] != 0.0) or np.any(self.K[1:, 1] != 0.0):
            raise lr_errors.DomainError("chart error: K_0 must vanish at 0 and K_1..K_3 must start at degree 2")
        self.C_inv = lr_linalg.inverse_enclosure(self.C)
        self._k = [[Interval(c) for c in row] for row in self.K]
        self._dk = [_derivative(p) for p in self._k]
        self._ddk = [_derivative(p) for p in self._dk]

    @property
    def degree(self) -> int:
        return self.K.shape[1] - 1

    @property
    def scale(self) -> float:
        return float(self.K[0, 1])

    @property
    def state(self) -> lr_structs.State:
        return lr_structs.State.point(*self.q0)

    def to_json(self) -> dict:
        return {"q0": [repr(float(v)) for v in self.q0],
                "C": [[repr(float(v)) for v in row] for row in self.C],
                "K": [[repr(float(v)) for v in row] for row in self.K],
                "lambda": repr(self.lambda_scale), "T": self.T.to_json()}

    @classmethod
    def from_json(cls, data: dict, params: typing.Optional[lr_structs.ModelParams]=None,
                  opts: typing.Optional[lr_structs.IntegratorOptions]=None) -> Chart:
        """A missing "lambda" is estimated from the floating point monodromy at q0."""
        q0 = np.array([float(v) for v in data["q0"]])
        C = np.array([[float(v) for v in row] for row in data["C"]])
        K = np.array([[float(v) for v in row] for row in data["K"]])
        T = Interval.from_json(data["T"])
        lam = data.get("lambda")
        if lam is None:
            stm = PointEngine("point", params, opts).flow(q0, T.mid)[1]
            lam = _unstable_eigen(stm)[0]
        return cls(q0, C, K, float(lam), T)


def _unstable_eigen(stm: np.ndarray) -> tuple[float, np.ndarray]:
    """Largest real eigenvalue and its eigenvector; raises EigenFailure unless it is real and > 1."""
    values, vectors = np.linalg.eig(stm)
    k = int(np.argmax(np.abs(values)))
    lam = values[k]
    if abs(lam.imag) > 1e-9 * abs(lam) or lam.real <= 1.0:
        raise lr_errors.EigenFailure("chart error: dominant eigenvalue %r is not real and expanding" % lam)
    return float(lam.real), np.real(vectors[:, k])


"""psi and its derivative."""

def psi_eval(chart: Chart, v: IVector) -> IVector:
    x, ys = v[0], [v[1], v[2], v[3]]
    dk0 = _horner(chart._dk[0], x)
    out0 = _horner(chart._k[0], x)
    for i in range(3): out0 = out0 - ys[i] * _horner(chart._dk[i + 1], x)
    rest = [_horner(chart._k[i + 1], x) + ys[i] * dk0 for i in range(3)]
    return IVector.from_intervals([out0] + rest)


def psi_jacobian(chart: Chart, box: IVector) -> IMatrix:
    x, ys = box[0], [box[1], box[2], box[3]]
    dk = [_horner(chart._dk[i], x) for i in range(4)]
    ddk = [_horner(chart._ddk[i], x) for i in range(4)]
    zero = Interval(0.0)
    row0 = dk[0]
    for i in range(3): row0 = row0 - ys[i] * ddk[i + 1]
    rows = [[row0, -dk[1], -dk[2], -dk[3]]]
    for i in range(3):
        row = [dk[i + 1] + ys[i] * ddk[0], zero, zero, zero]
        row[i + 1] = dk[0]
        rows.append(row)
    return IMatrix.from_intervals(rows)


def psi_float(chart: Chart, v: np.ndarray) -> np.ndarray:
    x, y = v[0], v[1:]
    dk = [npoly.polyval(x, npoly.polyder(chart.K[i])) for i in range(4)]
    out = np.array([npoly.polyval(x, chart.K[i]) for i in range(4)])
    out[0] -= float(np.dot(y, dk[1:]))
    out[1:] += y * dk[0]
    return out


def psi_jacobian_float(chart: Chart, v: np.ndarray) -> np.ndarray:
    x, y = v[0], v[1:]
    dk = np.array([npoly.polyval(x, npoly.polyder(chart.K[i])) for i in range(4)])
    ddk = np.array([npoly.polyval(x, npoly.polyder(chart.K[i], 2)) for i in range(4)])
    J = np.zeros((4, 4))
    J[0, 0] = dk[0] - float(np.dot(y, ddk[1:]))
    J[0, 1:] = -dk[1:]
    for i in range(3):
        J[i + 1, 0] = dk[i + 1] + y[i] * ddk[0]
        J[i + 1, i + 1] = dk[0]
    return J


def to_physical(chart: Chart, v: IVector) -> IVector:
    """C psi(v) + q0."""
    return IMatrix.point(chart.C) @ psi_eval(chart, v) + chart.q0


def chart_set(chart: Chart, U: IVector) -> LohnerSet:
    """
    Lohner set containing C psi(U) + q0, built by the mean value form around the center v of U:
    C psi(v) + q0 + Cm (U - v) + (C Dpsi(U) - Cm)(U - v), with Cm the midpoint of C Dpsi(v).
    """
    v = IVector.point(U.mid())
    delta = U - U.mid()
    CD = IMatrix.point(chart.C) @ psi_jacobian(chart, U)
    frame = (IMatrix.point(chart.C) @ psi_jacobian(chart, v)).mid()
    center = to_physical(chart, v) + (CD - frame) @ delta
    return LohnerSet.from_parallelogram(center, frame, delta)


def _scale_x(v: IVector, factor) -> IVector:
    return v.with_component(0, v[0] * factor)


"""Fixed point set B0."""

def family_frame(a_slope: float) -> np.ndarray:
    """A with (x, 0, 0, kappa(x)) - q in A (I - x0, 0, 0, J1 - p_y0)."""
    A = np.eye(4)
    A[3, 0] = a_slope
    return A


def enclose_B0(chart: Chart, family_cert: FamilyCertificate, R: typing.Optional[np.ndarray]=None,
               B: typing.Optional[IVector]=None) -> IVector:
    """
    Enclosure of psi^-1(C^-1((x, 0, 0, kappa(x)) - q0)) for x in I, from interval Newton on
    G_w(p) = A^-1 C psi(R p) - w at p = 0. Returns R M, where M is the Newton image.
    B: candidate for p; built by epsilon inflation when omitted
    """
    box = family_cert.box
    A = family_frame(box.a_slope)
    A_inv = family_frame(-box.a_slope)
    if R is None: R = np.linalg.solve(chart.scale * chart.C, A)  # Dpsi(0)^-1 C^-1 A
    offset = IVector.point(box.center) - chart.q0
    w = IMatrix.point(A_inv) @ offset + IVector.from_intervals([box.I - box.x0, 0.0, 0.0, box.J1 - box.p_y0])

    def newton(candidate: IVector) -> IVector:
        DG = IMatrix.point(A_inv) @ (IMatrix.point(chart.C) @ (psi_jacobian(chart, IMatrix.point(R) @ candidate) @ IMatrix.point(R)))
        return lr_linalg.solve_linear(DG, w)

    fixed_candidate = B is not None
    if B is None:
        B = w.hull(np.zeros(4)).inflate(1.1, 1e-3 * float(np.max(w.rad())))
    for attempt in range(1 if fixed_candidate else MAX_INFLATIONS + 1):
        if not B.contains(np.zeros(4)):
            raise lr_errors.DomainError("enclose_B0 error: candidate must contain 0")
        try:
            M = newton(B)
        except lr_errors.SingularEnclosure as e:
            raise lr_errors.InclusionFailed("enclose_B0 error: %s" % e) from e
        if M.subset(B):
            B0 = IMatrix.point(R) @ M
            logger.debug("param info: B0 radii %s after %d inflations", B0.rad().tolist(), attempt)
            return B0
        B = B.hull(M).inflate(2.0)
    raise lr_errors.InclusionFailed("enclose_B0 error: Newton image not inside the candidate box")


"""Images and derivatives of the local map."""

class FImage(typing.NamedTuple):
    U1: IVector
    U2: IVector
    image: IVector  # lambda(U2), contains F(U1)
    transported: IMatrix  # C^-1 DPhi_T(C psi(U1) + q0) C Dpsi(U1)


def _estimate_image(chart: Chart, v1: np.ndarray, params: lr_structs.ModelParams,
                    opts: typing.Optional[lr_structs.IntegratorOptions]) -> np.ndarray:
    """Floating point v2 with C psi(lambda(v2)) + q0 = Phi_T(C psi(v1) + q0)."""
    target, _ = PointEngine("point", params, opts).flow(chart.C @ psi_float(chart, v1) + chart.q0, chart.T.mid, with_stm=False)
    rhs = np.linalg.solve(chart.C, target - chart.q0)
    w = np.array(v1, dtype=np.float64)
    w[0] *= chart.lambda_scale
    for _ in range(20):
        step = np.linalg.solve(psi_jacobian_float(chart, w), psi_float(chart, w) - rhs)
        w = w - step
        if np.max(np.abs(step)) <= 1e-16 * max(1.0, np.max(np.abs(w))): break
    w[0] /= chart.lambda_scale
    return w


def F_image(chart: Chart, U1: IVector, U2_candidate: typing.Optional[IVector], params: lr_structs.ModelParams,
            opts: typing.Optional[lr_structs.IntegratorOptions]=None) -> FImage:
    """
    Certify F(U1) in lambda(U2) by the mean value form of the Newton operator
        N = v0 + L^-1 Dpsi(lambda U2)^-1 C^-1 [G(T, v1, v0) + DPhi_T C Dpsi(U1) (U1 - v1)],
    L = diag(lambda, 1, 1, 1), so the expansion of DPhi cancels against L^-1.
    U2_candidate: checked as given; when None a candidate is grown from the floating point image
    """
    engine = LohnerEngine("lohner", params, opts)
    v1 = U1.mid()
    lam = Interval(chart.lambda_scale)

    at_v1 = engine.flow(to_physical(chart, IVector.point(v1)), chart.T).state_out.to_ivector()
    on_U1 = engine.flow(chart_set(chart, U1), chart.T).deriv_out
    transported = chart.C_inv @ (on_U1 @ (IMatrix.point(chart.C) @ psi_jacobian(chart, U1)))
    delta = U1 - v1

    def newton(U2: IVector, v0: np.ndarray) -> IVector:
        J = psi_jacobian(chart, _scale_x(U2, lam))
        G = at_v1 - to_physical(chart, _scale_x(IVector.point(v0), lam))
        rhs = chart.C_inv @ G + transported @ delta
        step = lr_linalg.solve_linear(J, rhs)
        return IVector.point(v0) + _scale_x(step, 1.0 / lam)

    if U2_candidate is not None:
        U2 = U2_candidate
        v0 = U2.mid()
        attempts = 1
    else:
        v0 = _estimate_image(chart, v1, params, opts)
        U2 = IVector.point(v0).inflate(1.0, 1e-3 * float(np.max(np.abs(v0))) + 1e-300)
        attempts = MAX_INFLATIONS + 1

    for attempt in range(attempts):
        try:
            N = newton(U2, v0)
        except (lr_errors.SingularEnclosure, lr_errors.DivisionByZeroInterval) as e:
            raise lr_errors.InclusionFailed("F_image error: %s" % e) from e
        if N.subset(U2):
            return FImage(U1, U2, _scale_x(U2, lam), transported)
        U2 = U2.hull(N).inflate(2.0)
    raise lr_errors.InclusionFailed("F_image error: Newton image not inside the candidate after %d attempts" % attempts)


def DF_enclose(chart: Chart, B_i: IVector, F_of_Bi: IVector, params: lr_structs.ModelParams,
               opts: typing.Optional[lr_structs.IntegratorOptions]=None,
               transported: typing.Optional[IMatrix]=None) -> IMatrix:
    """
    [Dpsi(F(B))]^-1 [C^-1] [DPhi_T(C psi(B) + q0)] C [Dpsi(B)], with the inverse applied as a linear solve.
    transported: the last four factors, when already computed by F_image
    """
    if transported is None:
        DPhi = LohnerEngine("lohner", params, opts).flow(chart_set(chart, B_i), chart.T).deriv_out
        transported = chart.C_inv @ (DPhi @ (IMatrix.point(chart.C) @ psi_jacobian(chart, B_i)))
    return lr_linalg.solve_linear(psi_jacobian(chart, F_of_Bi), transported)


"""Local box B and fibers."""

class LocalBox(typing.NamedTuple):
    """Union over v in B0 of the cones Q+(v), cut to x in [x_lo, x_hi] and split into N slabs along x."""
    B0: IVector
    x_lo: float
    x_hi: float
    alpha: float
    N: int

    def validate(self) -> LocalBox:
        if not self.x_lo < self.x_hi:
            raise lr_errors.DomainError("local box error: expected x_lo < x_hi")
        if self.N < 1 or not self.alpha > 0.0:
            raise lr_errors.DomainError("local box error: N >= 1 and alpha > 0 required")
        if not self.B0.contains(np.zeros(4)):
            raise lr_errors.DomainError("local box error: B0 must contain 0")
        return self

    def _reach(self, x: float) -> float:
        """Upper bound of the chord of max |x - v_x| over v in B0, on [x_lo, x_hi], evaluated at x."""
        bx = self.B0[0]
        d_lo = rnd_up(max(self.x_lo - bx.lo, bx.hi - self.x_lo))
        d_hi = rnd_up(max(self.x_hi - bx.lo, bx.hi - self.x_hi))
        t = (Interval(x) - self.x_lo) / (Interval(self.x_hi) - self.x_lo)
        chord = d_lo + t * (Interval(d_hi) - d_lo)
        return max(float(chord.hi), rnd_up(max(x - bx.lo, bx.hi - x)))

    def edges(self) -> np.ndarray:
        return np.linspace(self.x_lo, self.x_hi, self.N + 1)

    def slab(self, i: int) -> IVector:
        """
        Box covering the part of the convex hull of B above [e_i, e_{i+1}]. The y radius grows
        linearly in x so its maximum over a slab is attained at an edge.
        """
        e = self.edges()
        lo, hi = float(e[i]), float(e[i + 1])
        reach = max(self._reach(lo), self._reach(hi))
        spread = Interval(self.alpha).sqrt() * reach
        ys = [self.B0[j] + Interval(-spread.hi, spread.hi) for j in (1, 2, 3)]
        return IVector.from_intervals([Interval(lo, hi)] + ys)

    def boxes(self) -> list[IVector]:
        return [self.slab(i) for i in range(self.N)]

    def to_json(self) -> dict:
        return {"B0": self.B0.to_json(), "x_lo": repr(self.x_lo), "x_hi": repr(self.x_hi),
                "alpha": repr(self.alpha), "N": self.N}

    @classmethod
    def from_json(cls, data: dict) -> LocalBox:
        return cls(IVector.from_json(data["B0"]), float(data["x_lo"]), float(data["x_hi"]), float(data["alpha"]), int(data["N"]))


def rnd_up(x: float) -> float:
    return float(np.nextafter(x, np.inf))


def local_box(B0: IVector, x_lo: float, x_hi: float, alpha: float, N: int) -> LocalBox:
    return LocalBox(B0, float(x_lo), float(x_hi), float(alpha), int(N)).validate()


class FiberImages(typing.NamedTuple):
    images: list[FImage]
    DF: list[IMatrix]
    DF_hull: IMatrix


def _fiber_task(chart: Chart, B_i: IVector, params, opts) -> tuple[FImage, IMatrix]:
    img = F_image(chart, B_i, None, params, opts)
    return img, DF_enclose(chart, B_i, img.image, params, opts, img.transported)


def fiber_images(chart: Chart, lbox: LocalBox, params: lr_structs.ModelParams,
                 opts: typing.Optional[lr_structs.IntegratorOptions]=None,
                 map_fn: typing.Optional[typing.Callable]=None, progress_every: int=50) -> FiberImages:
    """F_image and DF_enclose on every slab; the hull is reduced in slab order."""
    boxes = lbox.boxes()
    worker = lambda B_i: _fiber_task(chart, B_i, params, opts)
    if map_fn is not None:
        results = list(map_fn(worker, boxes))
    else:
        results = []
        for i, B_i in enumerate(boxes):
            results.append(worker(B_i))
            if (i + 1) % progress_every == 0: logger.info("param info: %d of %d slabs done", i + 1, len(boxes))
    images = [r[0] for r in results]
    DFs = [r[1] for r in results]
    hull = DFs[0]
    for D in DFs[1:]: hull = hull.hull(D)
    return FiberImages(images, DFs, hull)


def fiber_boxes(chart: Chart, lbox: LocalBox) -> list[IVector]:
    """Physical boxes C psi(B_i) + q0 covering the fiber enclosure."""
    return [to_physical(chart, B_i) for B_i in lbox.boxes()]


class FiberCertificate(typing.NamedTuple):
    local: LocalBox
    DF_hull: IMatrix
    cone: typing.Optional[ConeCertificate]
    verdict: lr_structs.Verdict

    @property
    def verified(self) -> bool:
        return self.verdict.verified

    def recheck(self) -> bool:
        if not self.verified: return True
        cone = certify_unstable_disc(self.DF_hull, ConeForm(self.local.alpha), self.cone.m)
        return cone.verified

    def y_reach(self, x: float) -> float:
        """Bound on |y| of the fiber enclosure above x, in local coordinates."""
        bx = self.local.B0[0]
        y = max(self.local.B0[j].mag for j in (1, 2, 3))
        return rnd_up(y + float((Interval(self.local.alpha).sqrt() * max(x - bx.lo, bx.hi - x, 0.0)).hi))

    def to_json(self) -> dict:
        return {"kind": lr_constants.CertificateKind.FIBER.value, "local": self.local.to_json(),
                "DF_hull": self.DF_hull.to_json(), "cone": None if self.cone is None else self.cone.to_json(),
                "verdict": self.verdict.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> FiberCertificate:
        cone = None if data.get("cone") is None else ConeCertificate.from_json(data["cone"])
        return cls(LocalBox.from_json(data["local"]), IMatrix.from_json(data["DF_hull"]), cone,
                   lr_structs.Verdict.from_json(data["verdict"]))


def certify_fibers(chart: Chart, family_cert: FamilyCertificate, x_lo: float, x_hi: float, alpha: float, N: int, m: float,
                   params: lr_structs.ModelParams, opts: typing.Optional[lr_structs.IntegratorOptions]=None,
                   map_fn: typing.Optional[typing.Callable]=None) -> FiberCertificate:
    """B0, the slabs of B, the hull of DF over them and the cone conditions on that hull."""
    FR = lr_constants.FailureReason

    def failed(reason, message, lbox=None, hull=None):
        logger.info("param info: fiber certificate failed (%s): %s", reason.name, message)
        lbox = lbox or LocalBox(IVector.zeros(4), x_lo, x_hi, alpha, N)
        return FiberCertificate(lbox, hull if hull is not None else IMatrix.zeros(4), None, lr_structs.Verdict.failed(reason, message))

    if not family_cert.verified:
        return failed(FR.PREREQUISITE_FAILED, "family certificate is not verified")
    try:
        B0 = enclose_B0(chart, family_cert)
        lbox = local_box(B0, x_lo, x_hi, alpha, N)
        result = fiber_images(chart, lbox, params, opts, map_fn)
    except lr_errors.InclusionFailed as e:
        return failed(FR.INCLUSION_FAILED, str(e))
    except lr_errors.PROOF_ERRORS as e:
        return failed(FR.INTEGRATOR_ERROR, str(e))
    try:
        cone = certify_unstable_disc(result.DF_hull, ConeForm(alpha), m)
    except lr_errors.BadBlockStructure as e:
        return failed(FR.CC1_FAILED, str(e), lbox, result.DF_hull)
    return FiberCertificate(lbox, result.DF_hull, cone, cone.verdict)


"""Chart construction and checks."""

def chart_self_test(chart: Chart, params: lr_structs.ModelParams, opts: typing.Optional[lr_structs.IntegratorOptions]=None,
                    tol: float=1e-2) -> tuple[bool, IMatrix]:
    """C^-1 DPhi_T(q0) C should be close to real Jordan form: first row and column small off the diagonal."""
    DPhi = LohnerEngine("lohner", params, opts).flow(chart.state, chart.T).deriv_out
    J = chart.C_inv @ (DPhi @ IMatrix.point(chart.C))
    Jm = J.mid()
    scale = abs(Jm[0, 0])
    off = max(np.max(np.abs(Jm[0, 1:])), np.max(np.abs(Jm[1:, 0])))
    return bool(off <= tol * scale), J


def jordan_frame(stm: np.ndarray, f: np.ndarray, a_slope: float) -> tuple[np.ndarray, float]:
    """
    C with columns: unstable eigenvector (p_x = 1), its mirror -S v_u, the field f (p_x = -1)
    and the family tangent (-1/a, 0, 0, -1).
    """
    lam, v_u = _unstable_eigen(stm)
    v_u = lr_math.normalize_component(v_u, 2, 1.0)
    v_s = -(prc3bp.S_MATRIX @ v_u)
    f = lr_math.normalize_component(f, 2, -1.0)
    tangent = np.array([-1.0 / a_slope, 0.0, 0.0, -1.0])
    return np.column_stack([v_u, v_s, f, tangent]), lam


def fit_chart(family_cert: FamilyCertificate, params: lr_structs.ModelParams, order: int=4, scale: float=0.1,
              period: typing.Optional[Interval]=None, opts: typing.Optional[lr_structs.IntegratorOptions]=None) -> Chart:
    """
    Floating point chart at q0 = (x0, 0, 0, mid N): Jordan frame from the monodromy and K solving
    Phi~_T(K(x)) = K(lambda x) order by order, K_1 = (scale, 0, 0, 0).
    period: enclosure of the periods over the family box; the rigorous second return time over U when omitted
    """
    if order < 1: raise lr_errors.DomainError("fit_chart error: order must be >= 1")
    box = family_cert.box
    q0 = np.array([box.x0, 0.0, 0.0, family_cert.newton_set.mid])
    point = PointEngine("point", params, opts)
    if period is None:
        period = SectionEngine(params, opts).cross(box.U(), 2, lr_constants.SectionKind.FULL_TURN).return_time
    tau = point.crossing(q0, 2).time
    _, stm = point.flow(q0, tau)
    C, lam = jordan_frame(stm, prc3bp.field_float(q0, params.mu), box.a_slope)
    C_inv = np.linalg.inv(C)
    J = C_inv @ stm @ C
    mus = np.linalg.eigvals(J)

    K = np.zeros((4, order + 1))
    K[0, 1] = scale
    for k in range(2, order + 1):
        divisors = np.abs(lam ** k - mus)
        if np.min(divisors) <= 1e-12 * lam ** k:
            raise lr_errors.ResonanceDivisionFailure("fit_chart error: lambda^%d is resonant with spec(DPhi)" % k)
        curve = np.zeros((4, k + 1))
        curve[:, :k] = (C @ K[:, :k])
        curve[:, 0] += q0
        jet = point.jet_flow(curve, tau)
        K[:, k] = np.linalg.solve(lam ** k * np.eye(4) - J, C_inv @ jet[:, k])
    logger.info("param info: fitted chart of degree %d, lambda=%.10g, tau=%.12g", order, lam, tau)
    return Chart(q0, C, K, lam, period)


def cohomology_residual(chart: Chart, x: float, params: lr_structs.ModelParams,
                        opts: typing.Optional[lr_structs.IntegratorOptions]=None) -> float:
    """|Phi~_T(K(x)) - K(lambda x)| at one point, in floating point."""
    q = chart.C @ np.array([npoly.polyval(x, chart.K[i]) for i in range(4)]) + chart.q0
    image, _ = PointEngine("point", params, opts).flow(q, chart.T.mid, with_stm=False)
    local = np.linalg.solve(chart.C, image - chart.q0)
    target = np.array([npoly.polyval(chart.lambda_scale * x, chart.K[i]) for i in range(4)])
    return float(np.max(np.abs(local - target)))
