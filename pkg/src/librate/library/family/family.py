# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

import logging

import numpy as np

import librate.core.common.constants as lr_constants
import librate.core.common.errors as lr_errors
import librate.core.common.structs as lr_structs
import librate.core.interface.blackboard as blackboard
import librate.core.interface.envg_interface as envg_interface
import librate.core.proofs.lyapunov_family as lyapunov_family

import librate.core.classes.stage_base as stage_base
import librate.core.classes.stage_decoder as stage_decoder


logger = logging.getLogger(__name__)


class FamilyDecoder(stage_decoder.Decoder):

    name = "family"

    def __init__(self, configs: dict):
        super().__init__(configs)

    def decode(self, encoded_params: dict, board: blackboard.Blackboard) -> lr_structs.Status:
        section = self.sectionFor(encoded_params)
        try:
            self.x0 = self.number(section, "x0")
            self.p_y0 = self.number(section, "p_y0")
            self.a_slope = self.number(section, "a_slope")
            self.r = self.number(section, "r", 1e-9)
            self.j0_radius = self.number(section, "j0_radius", 1e-13)
            self.j1_radius = self.number(section, "j1_radius", 1e-12)
            self.count = self.integer(section, "count", 1)
            self.center = self.number(section, "center", self.x0)
            self.overlap = self.number(section, "overlap", 0.01)
        except lr_errors.ConfigError as e:
            return self.fail(str(e))
        self.seed_oracle = bool(section.get("seed_oracle", self.count > 1))

        if not (self.r > 0.0 and 0.0 < self.j0_radius < self.j1_radius):
            return self.fail("expected r > 0 and 0 < j0_radius < j1_radius")
        if not (0.0 < self.overlap < 1.0):
            return self.fail("overlap must lie in (0, 1), got %r" % self.overlap)
        if self.count > 1 and not self.seed_oracle:
            return self.fail("a chain of %d boxes needs seed_oracle" % self.count)

        self.decoded = True
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def asConfig(self) -> dict:
        return {
            "x0": self.x0, "p_y0": self.p_y0, "a_slope": self.a_slope,
            "r": self.r, "j0_radius": self.j0_radius, "j1_radius": self.j1_radius,
            "count": self.count, "center": self.center, "overlap": self.overlap, "seed_oracle": self.seed_oracle
        }


class Family(stage_base.Stage):
    """
    Verifies a chain of family boxes. The box centred at (x0, p_y0) with slope a_slope is
    the anchor consumed by the chart, fiber and transversal stages.
    """

    kind = lr_constants.CertificateKind.FAMILY
    tube = None

    def __init__(self, configs: dict):
        super().__init__(configs)

    def init(self, envg: envg_interface.EngineInterface, stage_params: dict, board: blackboard.Blackboard) -> lr_structs.Status:
        self.stage_params = stage_params
        self.seeds = []
        self.tube = None
        if stage_params["count"] == 1:
            self.abscissae = np.array([stage_params["x0"]])
        else:
            self.abscissae = lyapunov_family.chain_abscissae(stage_params["center"], stage_params["count"],
                                                             stage_params["r"], stage_params["overlap"])
        anchor = int(np.argmin(np.abs(self.abscissae - stage_params["x0"])))
        self.inputs = {**stage_params, "mu": envg.params.mu, "anchor": anchor}
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def run(self, envg: envg_interface.EngineInterface) -> lr_structs.Status:
        p = self.stage_params
        try:
            self.seeds = self.timed(self.generateSeeds, envg)
            self.certificates = self.timed(lyapunov_family.continue_family, self.seeds, p["r"], p["j0_radius"], p["j1_radius"],
                                           envg.params, envg.options, envg.mapFunction())
        except lr_errors.LibrateError as e:
            msg = "family stage error: %s" % e
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.OTHER, msg)

        if len(self.seeds) > 1 and self.verified():
            self.tube = lyapunov_family.tube_radius(self.certificates, self.seeds)
            logger.info("family info: certified curve within %.3g of the seed polyline", self.tube)
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def generateSeeds(self, envg: envg_interface.EngineInterface) -> list[tuple[float, float, float]]:
        """Shoots outwards from the anchor; the anchor keeps the configured data when it sits exactly at x0."""
        p = self.stage_params
        k = self.inputs["anchor"]
        pinned = self.abscissae[k] == p["x0"]
        if not p["seed_oracle"]:
            return [(p["x0"], p["p_y0"], p["a_slope"])]

        right = lyapunov_family.generate_seeds(self.abscissae[k:], p["p_y0"], envg.params, envg.options)
        left = lyapunov_family.generate_seeds(self.abscissae[:k][::-1], p["p_y0"], envg.params, envg.options) if k > 0 else []
        seeds = left[::-1] + right
        if pinned: seeds[k] = (p["x0"], p["p_y0"], p["a_slope"])
        logger.info("family info: %d seeds over [%.12g, %.12g]", len(seeds), seeds[0][0], seeds[-1][0])
        return seeds

    def onFinish(self, envg: envg_interface.EngineInterface, board: blackboard.Blackboard) -> lr_structs.Status:
        board.setBoardVariable(blackboard.FAMILY_CERTIFICATES, self.certificates)
        board.setBoardVariable(blackboard.FAMILY_SEEDS, [(c.box.x0, c.box.p_y0, c.box.a_slope) for c in self.certificates])
        board.setBoardVariable(blackboard.FAMILY_ANCHOR, self.certificates[self.inputs["anchor"]])
        if self.tube is not None: board.setBoardVariable(blackboard.FAMILY_TUBE_RADIUS, self.tube)
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)
