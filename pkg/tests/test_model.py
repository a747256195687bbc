# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

"""Tests for the restricted three-body model: Hamiltonian, field, symmetry, Hill region, libration points."""

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
import librate.core.model.prc3bp as prc3bp
from librate.core.ivl.interval import Interval


PARAMS = lr_structs.ModelParams(0.0009537)
ANCHOR = np.array([-0.9510055339445208, 0.0, 0.0, -0.836804179646973])


@pytest.fixture(scope="module")
def lpoints():
    return prc3bp.libration_points(PARAMS)


class TestModelParams:

    def test_mu_range(self):
        """mu outside (0, 1/2) is a configuration error."""
        for mu in (0.0, 0.5, -0.1, 0.7):
            with pytest.raises(lr_errors.ConfigError):
                lr_structs.ModelParams(mu).validate()
        assert lr_structs.ModelParams(0.25).validate().mu == 0.25


class TestHamiltonian:
    """Interval evaluations against the float formulas."""

    def test_hamiltonian_encloses_float(self):
        """H on a point box contains the float evaluation."""
        rng = np.random.default_rng(7)
        for _ in range(20):
            q = ANCHOR + rng.uniform(-0.01, 0.01, 4)
            box = lr_structs.State.point(*q)
            assert prc3bp.hamiltonian(box, PARAMS).contains(prc3bp.hamiltonian_float(q, PARAMS.mu))

    def test_anchor_energy(self):
        """The anchor orbit lies at the comet energy level close to -1.515."""
        h = prc3bp.hamiltonian(lr_structs.State.point(*ANCHOR), PARAMS)
        assert abs(h.mid + 1.515) < 1e-3

    def test_vector_field_encloses_float(self):
        """The interval field contains the float field at sampled points."""
        rng = np.random.default_rng(11)
        for _ in range(20):
            q = ANCHOR + rng.uniform(-0.01, 0.01, 4)
            field = prc3bp.vector_field(lr_structs.State.point(*q), PARAMS)
            assert field.contains(prc3bp.field_float(q, PARAMS.mu))

    def test_field_is_symplectic_gradient(self):
        """x' = dH/dp_x, p_x' = -dH/dx on a point box."""
        q = lr_structs.State.point(*ANCHOR)
        grad = prc3bp.hamiltonian_gradient(q, PARAMS)
        field = prc3bp.vector_field(q, PARAMS)
        assert field[0].intersect(grad[2]) != Interval.EMPTY
        assert field[1].intersect(grad[3]) != Interval.EMPTY
        assert field[2].intersect(-grad[0]) != Interval.EMPTY
        assert field[3].intersect(-grad[1]) != Interval.EMPTY

    def test_variational_matches_jacobian(self):
        """The interval Jacobian encloses the float Jacobian of the field."""
        q = ANCHOR + np.array([0.0, 0.01, 0.002, 0.0])
        J = prc3bp.variational_field(lr_structs.State.point(*q), PARAMS)
        assert J.contains(prc3bp.jacobian_float(q, PARAMS.mu))

    def test_hamiltonian_conserved_direction(self):
        """grad H is orthogonal to the field (H is a first integral)."""
        q = ANCHOR + np.array([0.003, 0.02, -0.01, 0.004])
        box = lr_structs.State.point(*q)
        dot = prc3bp.hamiltonian_gradient(box, PARAMS).dot(prc3bp.vector_field(box, PARAMS))
        assert dot.contains(0.0)
        assert dot.mag < 1e-12

    def test_collision_box(self):
        """Boxes reaching the collision threshold of a primary are rejected."""
        near_small = lr_structs.State(Interval(-1.0 + PARAMS.mu - 1e-5, -1.0 + PARAMS.mu + 1e-5), Interval(0.0),
                                      Interval(0.0), Interval(0.0))
        with pytest.raises(lr_errors.CollisionBox):
            prc3bp.hamiltonian(near_small, PARAMS)
        with pytest.raises(lr_errors.CollisionBox):
            prc3bp.omega(Interval(PARAMS.mu), Interval(-1e-3, 1e-3), PARAMS)


class TestSymmetry:

    def test_reversing_symmetry(self):
        """S preserves H and reverses the field: f(S q) = -S f(q)."""
        q = ANCHOR + np.array([0.001, 0.03, 0.01, 0.0])
        box = lr_structs.State.point(*q)
        mirrored = prc3bp.symmetry_S(box)
        assert prc3bp.hamiltonian(mirrored, PARAMS).contains(prc3bp.hamiltonian_float(q, PARAMS.mu))
        f = prc3bp.field_float(q, PARAMS.mu)
        f_mirrored = prc3bp.field_float(prc3bp.S_MATRIX @ q, PARAMS.mu)
        np.testing.assert_allclose(f_mirrored, -prc3bp.S_MATRIX @ f, atol=1e-12)

    def test_symmetry_is_involution(self):
        """S applied twice is the identity."""
        box = lr_structs.State(Interval(-0.95, -0.94), Interval(0.1, 0.2), Interval(-0.01, 0.02), Interval(-0.9, -0.8))
        assert prc3bp.symmetry_S(prc3bp.symmetry_S(box)) == box


class TestHillRegion:

    H = lr_structs.EnergyLevel(Interval(-1.515))

    def test_forbidden_near_triangular_point(self):
        """A small cell around L4 is outside the Hill region at the comet energy."""
        x, y = PARAMS.mu - 0.5, math.sqrt(3.0) / 2.0
        region = prc3bp.hill_region_test(Interval.around(x, 1e-3), Interval.around(y, 1e-3), self.H, PARAMS)
        assert region == lr_constants.HillRegion.OUTSIDE

    def test_allowed_near_large_primary(self):
        """A cell at distance 0.5 from the large primary is inside."""
        region = prc3bp.hill_region_test(Interval.around(0.0, 1e-3), Interval.around(0.5, 1e-3), self.H, PARAMS)
        assert region == lr_constants.HillRegion.INSIDE

    def test_wide_cell_is_boundary(self):
        """A cell straddling the zero-velocity curve is undecided."""
        region = prc3bp.hill_region_test(Interval(-0.5, 0.0), Interval(0.3, 0.9), self.H, PARAMS)
        assert region == lr_constants.HillRegion.BOUNDARY

    def test_grid_rows(self):
        """The grid has one row per cell with the region value in the last column."""
        rows = prc3bp.hill_grid(self.H, (-1.5, 1.5), (-1.0, 1.0), 6, 4, PARAMS)
        assert len(rows) == 24
        assert {r[4] for r in rows} <= {1, 0, -1}
        assert rows[0][:4] == (-1.5, -1.0, -1.0, -0.5)


class TestLibrationPoints:

    def test_ordering(self, lpoints):
        """L1 lies beyond the small primary, L2 between the primaries, L3 beyond the large one."""
        mu = PARAMS.mu
        assert lpoints["L1"].x.hi < -1.0 + mu
        assert -1.0 + mu < lpoints["L2"].x.lo and lpoints["L2"].x.hi < mu
        assert lpoints["L3"].x.lo > mu

    def test_tight_equilibria(self, lpoints):
        """Each enclosure is narrow and the field vanishes on it."""
        for name, q in lpoints.items():
            assert q.x.width < 1e-9, name
            assert q.y == Interval(0.0) and q.p_x == Interval(0.0)
            assert prc3bp.vector_field(q, PARAMS).contains(np.zeros(4)), name

    def test_neck_distances(self, lpoints):
        """The points next to the small primary sit at roughly the Hill radius (mu/3)^(1/3)."""
        mu = PARAMS.mu
        hill = (mu / 3.0) ** (1.0 / 3.0)
        for name in ("L1", "L2"):
            distance = abs(lpoints[name].x.mid - (-1.0 + mu))
            assert 0.8 * hill < distance < 1.2 * hill, name

    def test_energy_ordering(self):
        """H(L2) < H(L1) < H(L3) and the comet level lies above both neck energies."""
        energies = prc3bp.libration_energies(PARAMS)
        assert energies["L2"].hi < energies["L1"].lo < energies["L1"].hi < energies["L3"].lo
        assert energies["L1"].hi < -1.515
