# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

"""Tests for the section probe, the fan slope, the intersection angle and the transversal prerequisites."""

import json
import math
import os
import sys

import numpy as np
import pytest

# Add src to Python path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

import librate.core.common.constants as lr_constants
import librate.core.common.errors as lr_errors
import librate.core.common.structs as lr_structs
import librate.core.ivl.linalg as lr_linalg
import librate.core.model.prc3bp as prc3bp
import librate.core.proofs.param_method as param_method
import librate.core.proofs.transversality as transversality
from librate.core.ivl.interval import Interval
from librate.core.ivl.iarray import IVector, IMatrix
from librate.core.proofs.cone_verifier import ConeForm, certify_unstable_disc
from librate.core.proofs.lyapunov_family import FamilyBox, FamilyCertificate, HyperbolicityCertificate

import librate_samples


PARAMS = lr_structs.ModelParams(0.0009537)
X0, P_Y0, A_SLOPE = -0.9510055339445208, -0.836804179646973, -4.506866203376769
X_M = 4.461867506615821e-6


def small_box(r: float) -> IVector:
    return IVector(np.full(3, -r), np.full(3, r))


@pytest.fixture(scope="module")
def chart():
    with open(os.path.join(os.path.dirname(librate_samples.__file__), "oterma_chart.json")) as f:
        data = json.load(f)
    data["lambda"] = "1466.0"
    return param_method.Chart.from_json(data)


@pytest.fixture
def family_cert():
    box = FamilyBox.from_radii(X0, P_Y0, A_SLOPE, 1e-9, 1e-13, 1e-12)
    return FamilyCertificate(box, Interval.around(P_Y0, 1e-14), Interval.around(A_SLOPE, 1e-4), Interval.around(0.03, 1e-6),
                             lr_structs.Verdict.passed())


@pytest.fixture
def hyper_cert():
    B = IMatrix.point(np.array([[4.0, 1.0], [0.0, 0.25]]))
    lam1, lam2, _ = lr_linalg.eig2_real(B)
    return HyperbolicityCertificate(IMatrix.zeros(1, 2), B, lam1, lam2, Interval(3.06), lr_structs.Verdict.passed())


@pytest.fixture
def fiber_cert():
    A = np.zeros((4, 4))
    A[0, 0] = 1466.0
    A[1:, 1:] = np.eye(3)
    hull = IMatrix(A - 1e-8, A + 1e-8)
    cone = certify_unstable_disc(hull, ConeForm(2.56e-6), 1000.0)
    lbox = param_method.local_box(IVector(np.full(4, -1e-12), np.full(4, 1e-12)), -1e-11, 4.5e-6, 2.56e-6, 20)
    return param_method.FiberCertificate(lbox, hull, cone, cone.verdict)


class TestSectionProbe:

    def test_around(self):
        """A probe around x_m has edges at x_m -/+ half_width."""
        probe = transversality.SectionProbe.around(X_M, 1e-11, small_box(1e-8), 2.56e-6)
        assert probe.x_l == X_M - 1e-11 and probe.x_r == X_M + 1e-11
        assert probe.B_E()[0] == Interval(probe.x_l, probe.x_r)
        assert probe.edge(probe.x_l)[0] == Interval(probe.x_l)
        assert len(probe.B_E()) == 4

    def test_invalid_probe(self):
        """Reversed edges and a B_c of the wrong size are rejected."""
        with pytest.raises(lr_errors.DomainError):
            transversality.SectionProbe.around(X_M, -1e-11, small_box(1e-8), 2.56e-6)
        with pytest.raises(lr_errors.DomainError):
            transversality.SectionProbe(0.0, 0.5, 1.0, IVector.zeros(2), 0.1).validate()

    def test_slabs_tile_the_probe(self):
        """Slabs cover [x_l, x_r] without gaps and keep B_c."""
        probe = transversality.SectionProbe.around(X_M, 1e-11, small_box(1e-8), 2.56e-6)
        slabs = probe.slabs(7)
        assert slabs[0][0].lo == probe.x_l and slabs[-1][0].hi == probe.x_r
        for left, right in zip(slabs, slabs[1:]):
            assert left[0].hi == right[0].lo
        assert all(s[1] == Interval(-1e-8, 1e-8) for s in slabs)

    def test_fans(self):
        """V+ and V- have x component +/-1 and y components within sqrt(alpha)."""
        probe = transversality.SectionProbe(0.0, 0.5, 1.0, small_box(1.0), 0.01)
        plus, minus = probe.fan(1.0), probe.fan(-1.0)
        assert plus[0] == Interval(1.0) and minus[0] == Interval(-1.0)
        assert plus[1].hi >= 0.1 and plus[1].hi < 0.1 + 1e-15

    def test_probe_json(self):
        """Probes reload with identical content hashes."""
        probe = transversality.SectionProbe.around(X_M, 1e-11, small_box(1e-8), 2.56e-6)
        back = transversality.SectionProbe.from_json(json.loads(json.dumps(probe.to_json())))
        assert transversality.content_hash(back.to_json()) == transversality.content_hash(probe.to_json())


class TestFanSlope:

    PROBE = transversality.SectionProbe(0.0, 0.5, 1.0, small_box(1.0), 0.01)

    def test_shear_gives_positive_slope(self):
        """p_x = 2 x on both fans: slope 2 with strict signs."""
        DG = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [2.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]])
        a, signs = transversality.fan_slope(IMatrix.point(DG), self.PROBE)
        assert signs
        assert a.contains(2.0) and a.width < 1e-12

    def test_identity_has_no_sign(self):
        """Under the identity p_x of a fan straddles 0."""
        a, signs = transversality.fan_slope(IMatrix.identity(4), self.PROBE)
        assert not signs
        assert a.contains(0.0)

    def test_x_component_through_zero(self):
        """A fan whose x image contains 0 has no slope."""
        DG = np.eye(4)
        DG[0, 1] = 1e3
        with pytest.raises(lr_errors.DenominatorZero):
            transversality.fan_slope(IMatrix.point(DG), self.PROBE)


class TestIntersectionAngle:

    def test_reference_slope(self):
        """Slope near 1.771 meets its mirror at close to 58.9 degrees."""
        angle = transversality.intersection_angle(Interval(1.7695, 1.7725))
        assert angle.lo > 58.85 and angle.hi < 58.95

    def test_shallow_slope(self):
        """For small slopes the angle is 2 arctan(a)."""
        angle = transversality.intersection_angle(Interval(0.1))
        assert angle.inflate(1.0, 1e-12).contains(math.degrees(2.0 * math.atan(0.1)))
        assert angle.width < 1e-10

    def test_right_angle_straddle(self):
        """Slopes around 1 give an angle range reaching 90 degrees."""
        angle = transversality.intersection_angle(Interval(0.9, 1.1))
        assert angle.hi >= 90.0
        assert angle.lo < 90.0

    def test_sign_of_slope_is_irrelevant(self):
        """a and -a describe the same pair of lines."""
        plus = transversality.intersection_angle(Interval(1.7695, 1.7725))
        minus = transversality.intersection_angle(Interval(-1.7725, -1.7695))
        assert plus == minus


class TestCertificates:

    def test_content_hash_is_canonical(self):
        """Key order does not change the hash; content does."""
        h1 = transversality.content_hash({"a": 1, "b": [1, 2]})
        h2 = transversality.content_hash({"b": [1, 2], "a": 1})
        assert h1 == h2 and len(h1) == 64
        assert transversality.content_hash({"a": 2, "b": [1, 2]}) != h1

    def test_stable_counterpart(self):
        """The stable crossing is the S-mirror of the unstable one."""
        q = lr_structs.State(Interval(0.5), Interval(0.0), Interval(-0.01, 0.02), Interval(1.2))
        mirrored = transversality.stable_counterpart(q)
        assert mirrored.p_x == Interval(-0.02, 0.01)
        assert mirrored.x == q.x and mirrored.p_y == q.p_y

    def test_central_box(self, fiber_cert):
        """B_c contains every y reached by the fiber enclosure up to x_r."""
        B_c = transversality.central_box(fiber_cert, 4.5e-6)
        r = math.sqrt(2.56e-6) * 4.5e-6
        assert B_c[0].hi >= r and B_c[0].lo <= -r
        assert B_c[0].hi < 2.0 * r

    def test_family_energy(self, family_cert):
        """The section energy encloses H at the anchor."""
        h = transversality.family_energy(family_cert, PARAMS)
        assert h.contains(prc3bp.hamiltonian_float(np.array([X0, 0.0, 0.0, P_Y0]), PARAMS.mu))

    def test_recheck(self):
        """A verified certificate rechecks from its stored edge images and slope."""
        probe = transversality.SectionProbe.around(X_M, 1e-11, small_box(1e-8), 2.56e-6)
        left = lr_structs.State(Interval(0.5), Interval(0.0), Interval(-2e-9, -1e-9), Interval(1.2))
        right = lr_structs.State(Interval(0.5), Interval(0.0), Interval(1e-9, 2e-9), Interval(1.2))
        a = Interval(1.7695, 1.7725)
        cert = transversality.IntersectionCertificate(probe, left, right, a, transversality.intersection_angle(a), {},
                                                      lr_structs.Verdict.passed())
        back = transversality.IntersectionCertificate.from_json(json.loads(json.dumps(cert.to_json())))
        assert back.recheck()
        assert back.stable_slope == -a
        assert not cert._replace(right_image=left).recheck()


class TestPrerequisites:
    """certify_transversal refuses to integrate when an input certificate does not fit."""

    def probe(self, fiber_cert, x_m=X_M, r=None):
        B_c = transversality.central_box(fiber_cert, x_m + 1e-11) if r is None else small_box(r)
        return transversality.SectionProbe.around(x_m, 1e-11, B_c, 2.56e-6)

    def test_unverified_family(self, chart, fiber_cert, family_cert, hyper_cert):
        """An unverified family certificate is a prerequisite failure."""
        family = family_cert._replace(verdict=lr_structs.Verdict.failed(lr_constants.FailureReason.SLOPE_FAILED))
        cert = transversality.certify_transversal(self.probe(fiber_cert), chart, fiber_cert, family, hyper_cert, PARAMS)
        assert cert.verdict.reason == lr_constants.FailureReason.PREREQUISITE_FAILED
        assert set(cert.hashes) == {"chart", "probe", "family"}

    def test_probe_beyond_fibers(self, chart, fiber_cert, family_cert, hyper_cert):
        """x_r beyond the fiber enclosure is a prerequisite failure."""
        cert = transversality.certify_transversal(self.probe(fiber_cert, x_m=5e-6), chart, fiber_cert, family_cert, hyper_cert, PARAMS)
        assert cert.verdict.reason == lr_constants.FailureReason.PREREQUISITE_FAILED
        assert "before x_r" in cert.verdict.message

    def test_central_box_too_small(self, chart, fiber_cert, family_cert, hyper_cert):
        """A B_c that misses part of the fiber enclosure is a prerequisite failure."""
        cert = transversality.certify_transversal(self.probe(fiber_cert, r=1e-12), chart, fiber_cert, family_cert, hyper_cert, PARAMS)
        assert cert.verdict.reason == lr_constants.FailureReason.PREREQUISITE_FAILED
        assert "B_c" in cert.verdict.message

    def test_unverified_hyperbolicity(self, chart, fiber_cert, family_cert, hyper_cert):
        """The hyperbolicity certificate must be verified."""
        hyper = hyper_cert._replace(verdict=lr_structs.Verdict.failed(lr_constants.FailureReason.EIG_SPLIT_FAILED))
        cert = transversality.certify_transversal(self.probe(fiber_cert), chart, fiber_cert, family_cert, hyper, PARAMS)
        assert cert.verdict.reason == lr_constants.FailureReason.PREREQUISITE_FAILED
        assert "hyperbolicity" in cert.verdict.message

    def test_missing_hyperbolicity(self, chart, fiber_cert, family_cert):
        """Without a hyperbolicity certificate nothing is integrated."""
        cert = transversality.certify_transversal(self.probe(fiber_cert), chart, fiber_cert, family_cert, None, PARAMS)
        assert not cert.verified
        assert cert.verdict.reason == lr_constants.FailureReason.PREREQUISITE_FAILED
        assert cert.verdict.message == "no hyperbolicity certificate"
        assert cert.left_image is None and cert.right_image is None


@pytest.mark.slow
class TestDeskProbe:
    """One probe around x_m with the published chart, integrated to the custom section."""

    def probe(self, fiber_cert) -> transversality.SectionProbe:
        B_c = transversality.central_box(fiber_cert, X_M + 1e-11)
        return transversality.SectionProbe.around(X_M, 1e-11, B_c, fiber_cert.local.alpha)

    def test_edges_straddle_zero(self, chart, fiber_cert, family_cert):
        """p_x of the left edge image is negative and of the right edge image positive."""
        energy = transversality.family_energy(family_cert, PARAMS)
        left, right, passed = transversality.check_crossing(self.probe(fiber_cert), chart, PARAMS, energy=energy)
        assert passed
        assert left.p_x.hi < 0.0 < right.p_x.lo
        assert left.y == Interval(0.0) and right.y == Interval(0.0)
        assert left.x.lo > 0.0 and right.x.lo > 0.0

    def test_probe_is_verified(self, chart, fiber_cert, family_cert, hyper_cert):
        """The probe is certified with a positive slope over 100 slabs."""
        cert = transversality.certify_transversal(self.probe(fiber_cert), chart, fiber_cert, family_cert, hyper_cert, PARAMS, n_sub=100)
        assert cert.verified, cert.verdict.message
        assert cert.slope_a.lo > 0.0
        assert cert.slope_a.width <= 0.2
        assert cert.recheck()
        assert 0.0 < cert.angle_deg.lo and cert.angle_deg.hi < 90.0 + 1e-9
