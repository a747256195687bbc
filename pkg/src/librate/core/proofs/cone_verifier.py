# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

"""
Cone conditions for a map with one expanding direction.

With Q(x, y) = alpha x^2 - |y|^2 and A an interval enclosure of DF over a
convex set B, the two matrix tests below imply

    cc1: Q(F(v1) - F(v2)) > 0 whenever Q(v1 - v2) >= 0, v1 != v2
    cc2: |F(v1) - F(v2)| > m |v1 - v2| on the same cone,

so the unstable set of a fixed point in B is the graph of a sqrt(alpha)-Lipschitz
function over the expanding coordinate.
"""

from __future__ import annotations
import logging
import math
import typing
import numpy as np

import librate.core.common.constants as lr_constants
import librate.core.common.errors as lr_errors
import librate.core.common.structs as lr_structs
from librate.core.ivl.interval import Interval
from librate.core.ivl.iarray import IVector, IMatrix
import librate.core.ivl.linalg as lr_linalg


logger = logging.getLogger(__name__)


class ConeForm(typing.NamedTuple):
    alpha: float
    dim_c: int = 3
    dim_u: int = 1

    def validate(self) -> ConeForm:
        if not self.alpha > 0.0:
            raise lr_errors.DomainError("cone error: alpha must be positive, got %r" % self.alpha)
        if self.dim_u != 1:
            raise lr_errors.DomainError("cone error: only one expanding direction is supported")
        return self

    @property
    def dim(self) -> int:
        return self.dim_u + self.dim_c

    @property
    def C_Q(self) -> np.ndarray:
        return np.diag([self.alpha] + [-1.0] * self.dim_c)

    def Q(self, v: np.ndarray) -> float:
        v = np.asarray(v, dtype=np.float64)
        return float(v @ self.C_Q @ v)

    @property
    def lipschitz(self) -> float:
        return math.sqrt(self.alpha)


class ConeCheck(typing.NamedTuple):
    passed: bool
    margin: float  # lower bound of lhs - rhs of the tested inequality

    def to_json(self) -> dict:
        return {"passed": self.passed, "margin": repr(self.margin)}

    @classmethod
    def from_json(cls, data: dict) -> ConeCheck:
        return cls(bool(data["passed"]), float(data["margin"]))


class ConeCertificate(typing.NamedTuple):
    m: float
    alpha: float
    cc1: ConeCheck  # Q increase
    cc2: ConeCheck  # expansion by m
    lipschitz: float
    verdict: lr_structs.Verdict

    @property
    def verified(self) -> bool:
        return self.verdict.verified

    def to_json(self) -> dict:
        return {"m": repr(self.m), "alpha": repr(self.alpha), "cc1": self.cc1.to_json(), "cc2": self.cc2.to_json(),
                "lipschitz": repr(self.lipschitz), "verdict": self.verdict.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> ConeCertificate:
        return cls(float(data["m"]), float(data["alpha"]), ConeCheck.from_json(data["cc1"]), ConeCheck.from_json(data["cc2"]),
                   float(data["lipschitz"]), lr_structs.Verdict.from_json(data["verdict"]))


def _check_blocks(A: IMatrix, cone: ConeForm):
    if A.shape != (cone.dim, cone.dim):
        raise lr_errors.BadBlockStructure("cone error: expected a %dx%d matrix, got %s" % (cone.dim, cone.dim, A.shape))


def tail_norm(tail: IVector) -> float:
    """Upper bound of the Euclidean norm over every member of tail."""
    if len(tail) == 0: return 0.0
    return tail.norm2().hi


def check_expansion(A_enclosure: IMatrix, cone: ConeForm, m: float) -> ConeCheck:
    """(a11 - eps sqrt(alpha)) / sqrt(1 + alpha) > m, with eps bounding the first-row tail."""
    cone = cone.validate()
    _check_blocks(A_enclosure, cone)
    a11 = A_enclosure[0, 0]
    eps = tail_norm(IVector(A_enclosure.lo[0, 1:], A_enclosure.hi[0, 1:]))
    root_alpha = Interval(cone.alpha).sqrt()
    lhs = (Interval(a11.lo) - eps * root_alpha) / (1.0 + Interval(cone.alpha)).sqrt()
    margin = float((lhs - m).lo)
    passed = bool(a11.lo > 0.0 and margin > 0.0)
    logger.debug("cone info: expansion check a11=%r eps=%.3g margin=%.6g", a11, eps, margin)
    return ConeCheck(passed, margin)


def quadratic_image(A_enclosure: IMatrix, cone: ConeForm) -> IMatrix:
    """Symmetrized enclosure of A^T C_Q A."""
    D = A_enclosure.T @ (IMatrix.point(cone.C_Q) @ A_enclosure)
    return D.hull(D.T)


def check_Q_increase(A_enclosure: IMatrix, cone: ConeForm) -> ConeCheck:
    """
    With D = A^T C_Q A = [[d11, eps^T], [eps, B]] and inf spec(B) >= -M:
    d11 - 2 eps > M alpha.
    """
    cone = cone.validate()
    _check_blocks(A_enclosure, cone)
    D = quadratic_image(A_enclosure, cone)
    d11 = D[0, 0]
    eps = tail_norm(IVector(D.lo[0, 1:], D.hi[0, 1:]))
    M = lr_linalg.spectral_shift(lr_linalg.gershgorin_min_eig(IMatrix(D.lo[1:, 1:], D.hi[1:, 1:])))
    lhs = Interval(d11.lo) - 2.0 * Interval(eps)
    margin = float((lhs - M * Interval(cone.alpha)).lo)
    passed = bool(d11.lo > 0.0 and margin > 0.0)
    logger.debug("cone info: Q increase check d11=%r eps=%.3g M=%.6g margin=%.6g", d11, eps, M, margin)
    return ConeCheck(passed, margin)


def certify_unstable_disc(DF_enclosure: IMatrix, cone: ConeForm, m: float) -> ConeCertificate:
    """
    Both cone conditions on DF(B). A verified certificate states that the unstable set
    of the fixed point in B is a graph over the expanding coordinate with slope at most sqrt(alpha).
    """
    if not m > 1.0:
        raise lr_errors.DomainError("cone error: expansion constant must satisfy m > 1, got %r" % m)
    cone = cone.validate()
    cc1 = check_Q_increase(DF_enclosure, cone)
    cc2 = check_expansion(DF_enclosure, cone, m)
    if not cc1.passed:
        verdict = lr_structs.Verdict.failed(lr_constants.FailureReason.CC1_FAILED, "Q increase margin %.6g" % cc1.margin)
    elif not cc2.passed:
        verdict = lr_structs.Verdict.failed(lr_constants.FailureReason.CC2_FAILED, "expansion margin %.6g" % cc2.margin)
    else:
        verdict = lr_structs.Verdict.passed()
    if not verdict.verified: logger.info("cone info: %s", verdict.message)
    return ConeCertificate(m, cone.alpha, cc1, cc2, cone.lipschitz, verdict)
