# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

"""
Interval linear algebra: preconditioned linear solves, the interval Newton
operator, real eigenvalue enclosures of 2x2 matrices and Gershgorin bounds.
"""

import typing
import numpy as np

import librate.core.common.constants as lr_constants
import librate.core.common.errors as lr_errors
import librate.core.ivl.rounding as rnd
from librate.core.ivl.interval import Interval
from librate.core.ivl.iarray import IVector, IMatrix


class NewtonOutcome(typing.NamedTuple):
    status: lr_constants.NewtonStatus
    refined: IVector

    @property
    def proven(self) -> bool:
        return self.status == lr_constants.NewtonStatus.UNIQUE_ZERO_PROVEN


def _gauss(mlo: np.ndarray, mhi: np.ndarray, blo: np.ndarray, bhi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Interval Gaussian elimination with pivoting on the largest mignitude; b is n x k."""
    n = mlo.shape[0]
    mlo, mhi, blo, bhi = mlo.copy(), mhi.copy(), blo.copy(), bhi.copy()

    for col in range(n):
        mig = np.where(rnd.contains_zero(mlo[col:, col], mhi[col:, col]), 0.0,
                       np.minimum(np.abs(mlo[col:, col]), np.abs(mhi[col:, col])))
        p = col + int(np.argmax(mig))
        if mig[p - col] <= 0.0:
            raise lr_errors.SingularEnclosure("solve_linear error: pivot interval contains zero in column %d" % col)
        if p != col:
            for arr in (mlo, mhi, blo, bhi): arr[[col, p]] = arr[[p, col]]

        for r in range(col + 1, n):
            flo, fhi = rnd.div(mlo[r, col], mhi[r, col], mlo[col, col], mhi[col, col])
            plo, phi = rnd.mul(flo, fhi, mlo[col, col + 1:], mhi[col, col + 1:])
            mlo[r, col + 1:], mhi[r, col + 1:] = rnd.sub(mlo[r, col + 1:], mhi[r, col + 1:], plo, phi)
            plo, phi = rnd.mul(flo, fhi, blo[col], bhi[col])
            blo[r], bhi[r] = rnd.sub(blo[r], bhi[r], plo, phi)
            mlo[r, col], mhi[r, col] = 0.0, 0.0

    xlo = np.zeros_like(blo)
    xhi = np.zeros_like(bhi)
    for i in reversed(range(n)):
        slo, shi = blo[i], bhi[i]
        if i + 1 < n:
            plo, phi = rnd.mul(mlo[i, i + 1:, None], mhi[i, i + 1:, None], xlo[i + 1:], xhi[i + 1:])
            plo, phi = rnd.sum_bounds(plo, phi, axis=0)
            slo, shi = rnd.sub(slo, shi, plo, phi)
        xlo[i], xhi[i] = rnd.div(slo, shi, mlo[i, i], mhi[i, i])
    return xlo, xhi


def solve_linear(A: IMatrix, b: typing.Union[IVector, IMatrix]) -> typing.Union[IVector, IMatrix]:
    """
    Enclosure of {A^-1 b : A in A, b in b}.
    A is preconditioned by the floating point inverse of its midpoint before
    interval Gaussian elimination. b may carry several right-hand sides as columns.
    """
    n = A.shape[0]
    if A.shape != (n, n):
        raise lr_errors.DomainError("solve_linear error: matrix must be square, got %s" % (A.shape,))
    if b.shape[0] != n:
        raise lr_errors.DomainError("solve_linear error: right-hand side has %d rows, expected %d" % (b.shape[0], n))

    try:
        R = np.linalg.inv(A.mid())
    except np.linalg.LinAlgError as e:
        raise lr_errors.SingularEnclosure("solve_linear error: midpoint matrix is singular") from e
    if not np.all(np.isfinite(R)):
        raise lr_errors.SingularEnclosure("solve_linear error: midpoint inverse is not finite")

    RA = IMatrix.point(R) @ A
    Rb = IMatrix.point(R) @ b
    blo, bhi = (Rb.lo[:, None], Rb.hi[:, None]) if isinstance(b, IVector) else (Rb.lo, Rb.hi)
    xlo, xhi = _gauss(RA.lo, RA.hi, blo, bhi)
    if isinstance(b, IVector): return IVector(xlo[:, 0], xhi[:, 0])
    return IMatrix(xlo, xhi)


def inverse_enclosure(A: typing.Union[IMatrix, np.ndarray]) -> IMatrix:
    """Interval matrix containing the inverse of every member of A."""
    if not isinstance(A, IMatrix): A = IMatrix.point(A)
    return solve_linear(A, IMatrix.identity(A.shape[0]))


def interval_newton(f_at_point: IVector, Df_on_box: IMatrix, X: IVector, x0) -> NewtonOutcome:
    """
    N(x0, X) = x0 - [Df(X)]^-1 f(x0).
    N inside X proves a unique zero of f in X; a possibly singular Jacobian
    enclosure makes the outcome inconclusive.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    if not X.contains(x0):
        raise lr_errors.DomainError("interval_newton error: x0 must lie in X")
    try:
        step = solve_linear(Df_on_box, f_at_point)
    except lr_errors.SingularEnclosure:
        return NewtonOutcome(lr_constants.NewtonStatus.INCONCLUSIVE, X)
    N = IVector.point(x0) - step
    status = lr_constants.NewtonStatus.UNIQUE_ZERO_PROVEN if N.subset(X) else lr_constants.NewtonStatus.INCONCLUSIVE
    return NewtonOutcome(status, N)


def eig2_real(B: IMatrix) -> tuple[Interval, Interval, bool]:
    """
    Eigenvalue enclosures of every member of a 2x2 interval matrix, provided the
    discriminant tr^2 - 4 det is positive on the whole enclosure.
    lambda1 is the root of larger magnitude; lambda2 is additionally intersected
    with det / lambda1.
    """
    if B.shape != (2, 2):
        raise lr_errors.DomainError("eig2_real error: expected a 2x2 matrix, got %s" % (B.shape,))
    b11, b12, b21, b22 = B[0, 0], B[0, 1], B[1, 0], B[1, 1]
    tr = b11 + b22
    det = b11 * b22 - b12 * b21
    disc = tr.sqr() - 4.0 * det
    if disc.lo <= 0.0: return Interval.EMPTY, Interval.EMPTY, False

    root = disc.sqrt()
    if tr.hi <= 0.0: lam1, lam2 = (tr - root) / 2.0, (tr + root) / 2.0
    else: lam1, lam2 = (tr + root) / 2.0, (tr - root) / 2.0

    if tr.lo >= 0.0 or tr.hi <= 0.0:
        if lam1.mig > 0.0:
            meet = lam2.intersect(det / lam1)
            if not meet.is_empty: lam2 = meet
    return lam1, lam2, True


def gershgorin_min_eig(Bsym: IMatrix) -> float:
    """
    Lower bound l with inf spec(B) >= l for every symmetric member B of Bsym,
    from Gershgorin disks: min_i (b_ii - sum_{j != i} |b_ij|).
    """
    k = Bsym.shape[0]
    if Bsym.shape != (k, k):
        raise lr_errors.DomainError("gershgorin_min_eig error: matrix must be square")
    mag = Bsym.mag()
    off = mag - np.diag(np.diag(mag))
    _, radius = rnd.sum_bounds(np.zeros_like(off), off, axis=1)
    bounds = rnd.down(np.diag(Bsym.lo) - radius)
    return float(np.min(bounds))


def spectral_shift(lower_bound: float) -> float:
    """The constant M >= 0 with y^T B y >= -M |y|^2 given inf spec(B) >= lower_bound."""
    return max(-lower_bound, 0.0)


def det(A: IMatrix) -> Interval:
    """Cofactor expansion along the first row; intended for n <= 4."""
    n = A.shape[0]
    if n == 1: return A[0, 0]
    if n == 2: return A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    total = Interval(0.0)
    for j in range(n):
        keep = [c for c in range(n) if c != j]
        minor = IMatrix(A.lo[1:, keep], A.hi[1:, keep])
        term = A[0, j] * det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def norm_inf(A: IMatrix) -> float:
    """Upper bound of the max-row-sum norm over all members."""
    _, rows = rnd.sum_bounds(np.zeros_like(A.lo), A.mag(), axis=1)
    return float(np.max(rows))


def outer(a: IVector, b: IVector) -> IMatrix:
    return IMatrix(*rnd.mul(a.lo[:, None], a.hi[:, None], b.lo[None, :], b.hi[None, :]))
