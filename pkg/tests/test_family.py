# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

"""Tests for family boxes, their certificates, chaining and the continuation helpers."""

import json
import os
import sys

import mpmath
import numpy as np
import pytest

# Add src to Python path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

import librate.core.common.constants as lr_constants
import librate.core.common.errors as lr_errors
import librate.core.common.structs as lr_structs
import librate.core.ivl.linalg as lr_linalg
import librate.core.model.prc3bp as prc3bp
import librate.core.proofs.lyapunov_family as lyapunov_family
from librate.core.ivl.interval import Interval
from librate.core.ivl.iarray import IMatrix
from librate.core.proofs.lyapunov_family import FamilyBox, FamilyCertificate, HyperbolicityCertificate


PARAMS = lr_structs.ModelParams(0.0009537)
X0, P_Y0, A_SLOPE = -0.9510055339445208, -0.836804179646973, -4.506866203376769


def anchor_box() -> FamilyBox:
    return FamilyBox.from_radii(X0, P_Y0, A_SLOPE, 1e-9, 1e-13, 1e-12)


def certified(box: FamilyBox, kappa_slope: Interval=None) -> FamilyCertificate:
    kappa = kappa_slope if kappa_slope is not None else Interval.around(box.a_slope, 1e-4)
    return FamilyCertificate(box, Interval.around(box.p_y0, 1e-14), kappa, Interval.EMPTY, lr_structs.Verdict.passed())


class TestFamilyBox:

    def test_from_radii(self):
        """Radii give symmetric intervals around the centres."""
        box = anchor_box()
        assert box.I.contains(X0 - 1e-9) and box.I.contains(X0 + 1e-9)
        assert box.J0.subset(box.J1)
        assert box.J1.rad == pytest.approx(1e-12, rel=1e-3)

    def test_validation(self):
        """J0 wider than J1 is rejected."""
        with pytest.raises(lr_errors.DomainError):
            FamilyBox.from_radii(X0, P_Y0, A_SLOPE, 1e-9, 1e-11, 1e-12)

    def test_parallelogram(self):
        """U follows the slope a: p_y over the right end of I is shifted by a r."""
        box = anchor_box()
        right = box.p_y_over(Interval(X0 + 1e-9))
        assert right.contains(P_Y0 + A_SLOPE * 1e-9)
        assert right.rad == pytest.approx(1e-12, rel=1e-3)
        hull = box.U_hull()
        assert hull.y == Interval(0.0) and hull.p_x == Interval(0.0)
        assert hull.p_y.contains(P_Y0 - A_SLOPE * 1e-9)

    def test_json(self):
        """Boxes reload unchanged."""
        box = anchor_box()
        assert FamilyBox.from_json(json.loads(json.dumps(box.to_json()))) == box


class TestSlopeCondition:

    def test_margin(self):
        """The margin is (|J1| - |J0|) / |I| = 9e-4 for the anchor radii."""
        box = anchor_box()
        assert lyapunov_family.slope_condition(box, Interval.around(A_SLOPE, 5e-4))
        assert not lyapunov_family.slope_condition(box, Interval.around(A_SLOPE, 1e-3))
        assert not lyapunov_family.slope_condition(box, Interval(A_SLOPE + 1e-3))

    def test_margin_is_a_lower_bound(self):
        """The computed margin never exceeds the exact (|J1| - |J0|) / |I|."""
        rng = np.random.default_rng(5)
        with mpmath.workprec(200):
            for r, j0, j1 in zip(rng.uniform(1e-10, 1e-8, 30), rng.uniform(1e-14, 1e-13, 30), rng.uniform(2e-13, 1e-11, 30)):
                box = FamilyBox.from_radii(X0, P_Y0, A_SLOPE, float(r), float(j0), float(j1))
                width = lambda v: mpmath.mpf(v.hi) - mpmath.mpf(v.lo)
                exact = (width(box.J1) - width(box.J0)) / width(box.I)
                assert lyapunov_family.slope_margin(box).lo <= exact

    def test_empty_slope(self):
        """An empty slope enclosure never satisfies the condition."""
        assert not lyapunov_family.slope_condition(anchor_box(), Interval.EMPTY)


class TestFamilyCertificate:

    def test_recheck(self):
        """Stored inclusions re-verify; a Newton set leaving J0 does not."""
        cert = certified(anchor_box())
        assert cert.recheck()
        assert not cert._replace(newton_set=Interval.around(P_Y0 + 1e-12, 1e-14)).recheck()
        assert not cert._replace(kappa_slope=Interval(A_SLOPE + 1e-2)).recheck()

    def test_failed_certificate_rechecks(self):
        """Failed certificates claim nothing, so the recheck has nothing to refute."""
        cert = certified(anchor_box())._replace(verdict=lr_structs.Verdict.failed(lr_constants.FailureReason.NEWTON_FAILED, "x"))
        assert not cert.verified
        assert cert.recheck()

    def test_json(self):
        """Certificates reload with verdict and empty fields."""
        cert = certified(anchor_box())
        data = json.loads(json.dumps(cert.to_json()))
        assert data["kind"] == "family"
        assert data["half_turn_time"] == {"empty": True}
        back = FamilyCertificate.from_json(data)
        assert back == cert

    def test_energy_foliation(self):
        """dH/dx along the family does not vanish at the anchor."""
        dh = lyapunov_family.energy_foliation(certified(anchor_box()), PARAMS)
        assert not dh.contains(0.0)

    def test_endpoint_energies(self):
        """End energies enclose H at the parallelogram corners."""
        box = anchor_box()
        left, right = lyapunov_family.endpoint_energies(box, PARAMS)
        for x, h in ((box.I.lo, left), (box.I.hi, right)):
            q = np.array([x, 0.0, 0.0, P_Y0 + A_SLOPE * (x - X0)])
            assert h.inflate(1.0, 1e-15).contains(prc3bp.hamiltonian_float(q, PARAMS.mu))


class TestHyperbolicityCertificate:

    def certificate(self, B: np.ndarray) -> HyperbolicityCertificate:
        lam1, lam2, _ = lr_linalg.eig2_real(IMatrix.point(B))
        return HyperbolicityCertificate(IMatrix.zeros(1, 2), IMatrix.point(B), lam1, lam2, Interval(3.06),
                                        lr_structs.Verdict.passed())

    def test_recheck_saddle(self):
        """A saddle B re-verifies; a contraction does not."""
        assert self.certificate(np.array([[4.0, 1.0], [0.0, 0.25]])).recheck()
        assert not self.certificate(np.array([[0.5, 0.0], [0.0, 0.25]])).recheck()

    def test_reciprocity(self):
        """l1 * l2 must lie within 3% of 1; a saddle with l1 * l2 = 0.75 does not re-verify."""
        assert lyapunov_family.reciprocal(Interval(4.0), Interval(0.255))
        assert not lyapunov_family.reciprocal(Interval(3.0), Interval(0.25))
        assert not lyapunov_family.reciprocal(Interval.EMPTY, Interval(0.25))
        assert not self.certificate(np.array([[3.0, 1.0], [0.0, 0.25]])).recheck()

    def test_json(self):
        """The certificate reloads and keeps its eigenvalue enclosures."""
        cert = self.certificate(np.array([[4.0, 1.0], [0.0, 0.25]]))
        back = HyperbolicityCertificate.from_json(json.loads(json.dumps(cert.to_json())))
        assert back.lambda1 == cert.lambda1 and back.recheck()

    def test_prerequisite(self):
        """An unverified family certificate is not integrated."""
        cert = certified(anchor_box())._replace(verdict=lr_structs.Verdict.failed(lr_constants.FailureReason.SLOPE_FAILED))
        hyper = lyapunov_family.verify_hyperbolicity(cert, PARAMS)
        assert hyper.verdict.reason == lr_constants.FailureReason.PREREQUISITE_FAILED


class TestChain:

    def test_abscissae_spacing(self):
        """Consecutive abscissae are (2 - overlap) r apart around the centre."""
        xs = lyapunov_family.chain_abscissae(-0.95, 5, 1e-6, 0.01)
        np.testing.assert_allclose(np.diff(xs), 1.99e-6, rtol=1e-9)
        assert xs[2] == pytest.approx(-0.95)

    def test_built_chain_passes(self):
        """Boxes on the built abscissae form a chain."""
        xs = lyapunov_family.chain_abscissae(X0, 101, 1e-9)
        boxes = lyapunov_family.family_boxes([(x, P_Y0, A_SLOPE) for x in xs], 1e-9, 1e-13, 1e-12)
        lyapunov_family.check_chain(boxes)

    def test_gap(self):
        """Boxes further apart than 2r leave a gap."""
        boxes = lyapunov_family.family_boxes([(0.0, 1.0, 1.0), (2.1, 1.0, 1.0)], 1.0, 1e-3, 1e-2)
        with pytest.raises(lr_errors.ChainGap):
            lyapunov_family.check_chain(boxes)

    def test_disorder(self):
        """Boxes must be ordered by x."""
        boxes = lyapunov_family.family_boxes([(1.0, 1.0, 1.0), (0.0, 1.0, 1.0)], 1.0, 1e-3, 1e-2)
        with pytest.raises(lr_errors.ChainGap):
            lyapunov_family.check_chain(boxes)

    def test_continue_rejects_gaps_before_integrating(self):
        """continue_family checks the chain first."""
        with pytest.raises(lr_errors.ChainGap):
            lyapunov_family.continue_family([(0.0, 1.0, 1.0), (5.0, 1.0, 1.0)], 1.0, 1e-3, 1e-2, PARAMS)


class TestTubeRadius:

    SEEDS = [(x, 2.0 * x + 1.0, 2.0) for x in (0.0, 0.199, 0.398, 0.597)]

    def test_straight_family(self):
        """Boxes along a straight seed line deviate from it by the J1 radius."""
        boxes = lyapunov_family.family_boxes(self.SEEDS, 0.1, 1e-4, 1e-3)
        tube = lyapunov_family.tube_radius([certified(b) for b in boxes], self.SEEDS)
        assert 1e-3 <= tube < 1.001e-3

    def test_unverified_box(self):
        """Unverified boxes have no tube."""
        boxes = lyapunov_family.family_boxes(self.SEEDS, 0.1, 1e-4, 1e-3)
        certs = [certified(b) for b in boxes]
        certs[1] = certs[1]._replace(verdict=lr_structs.Verdict.failed(lr_constants.FailureReason.NEWTON_FAILED))
        with pytest.raises(lr_errors.DomainError):
            lyapunov_family.tube_radius(certs, self.SEEDS)

    def test_single_seed(self):
        """A single seed does not define a polyline."""
        with pytest.raises(lr_errors.DomainError):
            lyapunov_family.tube_radius([], self.SEEDS[:1])


@pytest.mark.slow
class TestAnchorOrbit:
    """Integrates the anchor orbit of the comet family."""

    def test_shoot_seed(self):
        """Shooting from the anchor guess reproduces p_y0 and the family slope."""
        p_y, a = lyapunov_family.shoot_seed(X0, P_Y0 + 1e-7, PARAMS)
        assert p_y == pytest.approx(P_Y0, abs=1e-10)
        assert a == pytest.approx(A_SLOPE, rel=1e-4)

    def test_verify_anchor_box(self):
        """The anchor family box is verified with a slope inside the margin."""
        cert = lyapunov_family.verify_family_box(anchor_box(), PARAMS)
        assert cert.verified, cert.verdict.message
        assert cert.newton_set.subset(cert.box.J0)
        assert cert.recheck()
        assert 1.5294 < cert.half_turn_time.lo and cert.half_turn_time.hi < 1.5295
