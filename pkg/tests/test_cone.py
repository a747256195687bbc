# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

"""Tests for the cone conditions on interval enclosures of a derivative."""

import math
import os
import sys

import numpy as np
import pytest

# Add src to Python path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

import librate.core.common.constants as lr_constants
import librate.core.common.errors as lr_errors
import librate.core.proofs.cone_verifier as cone_verifier
from librate.core.ivl.iarray import IMatrix


def thicken(A: np.ndarray, radius: float=1e-9) -> IMatrix:
    A = np.asarray(A, dtype=np.float64)
    return IMatrix(A - radius, A + radius)


def rotation_block(t: float) -> np.ndarray:
    return np.array([[math.cos(t), -math.sin(t), 0.0], [math.sin(t), math.cos(t), 0.0], [0.0, 0.0, 1.0]])


class TestConeForm:

    def test_quadratic_form(self):
        """Q(x, y) = alpha x^2 - |y|^2."""
        cone = cone_verifier.ConeForm(0.25)
        assert cone.Q([2.0, 0.0, 0.0, 0.0]) == pytest.approx(1.0)
        assert cone.Q([2.0, 1.0, 0.0, 0.0]) == pytest.approx(0.0)
        assert cone.Q([0.0, 0.0, 0.0, 1.0]) == pytest.approx(-1.0)
        assert cone.lipschitz == pytest.approx(0.5)
        assert cone.dim == 4

    def test_invalid_cone(self):
        """Non-positive alpha and several expanding directions are rejected."""
        with pytest.raises(lr_errors.DomainError):
            cone_verifier.ConeForm(0.0).validate()
        with pytest.raises(lr_errors.DomainError):
            cone_verifier.ConeForm(0.1, dim_c=2, dim_u=2).validate()


class TestConeConditions:
    """Toy saddles with known outcomes."""

    def test_toy_saddle_passes(self):
        """diag(2, 1/2, 1/2, 1/2) satisfies both conditions with m = 1.2."""
        A = thicken(np.diag([2.0, 0.5, 0.5, 0.5]))
        cert = cone_verifier.certify_unstable_disc(A, cone_verifier.ConeForm(0.01), 1.2)
        assert cert.verified
        assert cert.cc1.passed and cert.cc2.passed
        assert cert.cc1.margin > 0.03
        assert cert.lipschitz == pytest.approx(0.1)

    def test_weak_expansion_fails_cc2(self):
        """An expanding rate below m keeps the Q increase but fails the expansion test."""
        A = thicken(np.diag([1.1, 0.5, 0.5, 0.5]))
        cert = cone_verifier.certify_unstable_disc(A, cone_verifier.ConeForm(0.01), 1.2)
        assert not cert.verified
        assert cert.cc1.passed
        assert cert.verdict.reason == lr_constants.FailureReason.CC2_FAILED

    def test_contracting_direction_fails_cc1(self):
        """Swapped rates break the Q increase."""
        A = thicken(np.diag([0.5, 2.0, 2.0, 2.0]))
        cert = cone_verifier.certify_unstable_disc(A, cone_verifier.ConeForm(0.01), 1.2)
        assert not cert.verified
        assert cert.verdict.reason == lr_constants.FailureReason.CC1_FAILED

    def test_strong_unstable_with_rotating_centre(self):
        """An expanding rate near 1466 over a rotating central block passes with m = 1000."""
        A = np.zeros((4, 4))
        A[0, 0] = 1466.0
        A[0, 1:] = [1e-3, -2e-3, 5e-4]
        A[1:, 0] = [1e-4, 2e-4, -1e-4]
        A[1:, 1:] = rotation_block(0.3)
        cert = cone_verifier.certify_unstable_disc(thicken(A, 1e-8), cone_verifier.ConeForm(2.56e-6), 1000.0)
        assert cert.verified
        assert cert.cc2.margin > 400.0
        assert cert.lipschitz == pytest.approx(1.6e-3)

    def test_dominant_centre_fails(self):
        """A central block stronger than the expanding rate breaks the Q increase."""
        A = np.zeros((4, 4))
        A[0, 0] = 3.0
        A[1:, 1:] = 4.0 * np.eye(3)
        check = cone_verifier.check_Q_increase(thicken(A), cone_verifier.ConeForm(0.1))
        assert not check.passed
        assert check.margin < 0.0

    def test_expansion_margin_value(self):
        """With a diagonal enclosure the expansion margin is a11/sqrt(1 + alpha) - m."""
        A = thicken(np.diag([5.0, 0.1, 0.1, 0.1]), 0.0)
        check = cone_verifier.check_expansion(A, cone_verifier.ConeForm(0.44), 2.0)
        assert check.passed
        assert check.margin == pytest.approx(5.0 / 1.2 - 2.0, rel=1e-12)

    def test_wide_enclosure_is_inconclusive(self):
        """Widening the coupling entries eventually breaks the Q increase."""
        A = np.diag([2.0, 0.5, 0.5, 0.5])
        tight = cone_verifier.check_Q_increase(thicken(A, 1e-6), cone_verifier.ConeForm(0.01))
        loose = cone_verifier.check_Q_increase(thicken(A, 0.2), cone_verifier.ConeForm(0.01))
        assert tight.passed
        assert not loose.passed

    def test_Q_increase_margin_value(self):
        """The margin is d11 - 2 eps - M alpha with eps the full first-row coupling of D."""
        A = np.diag([2.0, 0.5, 0.5, 0.5])
        A[0, 1] = 2.0
        strong = cone_verifier.check_Q_increase(thicken(A, 0.0), cone_verifier.ConeForm(0.01))
        assert not strong.passed
        assert strong.margin == pytest.approx(0.04 - 0.08 - 0.0025, rel=1e-9)
        A[0, 1] = 0.5
        weak = cone_verifier.check_Q_increase(thicken(A, 0.0), cone_verifier.ConeForm(0.01))
        assert weak.passed
        assert weak.margin == pytest.approx(0.04 - 0.02 - 0.0025, rel=1e-9)

    def test_expansion_constant_must_exceed_one(self):
        """m <= 1 is a domain error."""
        A = thicken(np.diag([2.0, 0.5, 0.5, 0.5]))
        for m in (1.0, 0.5):
            with pytest.raises(lr_errors.DomainError):
                cone_verifier.certify_unstable_disc(A, cone_verifier.ConeForm(0.01), m)

    def test_wrong_block_structure(self):
        """A 3x3 enclosure does not match a one plus three splitting."""
        with pytest.raises(lr_errors.BadBlockStructure):
            cone_verifier.certify_unstable_disc(thicken(np.eye(3) * 2.0), cone_verifier.ConeForm(0.01), 1.2)

    def test_certificate_json(self):
        """The certificate survives serialization with its verdict."""
        A = thicken(np.diag([1.1, 0.5, 0.5, 0.5]))
        cert = cone_verifier.certify_unstable_disc(A, cone_verifier.ConeForm(0.01), 1.2)
        back = cone_verifier.ConeCertificate.from_json(cert.to_json())
        assert back == cert
