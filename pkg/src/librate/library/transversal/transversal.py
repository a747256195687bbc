# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

import logging

import numpy as np

import librate.core.common.constants as lr_constants
import librate.core.common.errors as lr_errors
import librate.core.common.structs as lr_structs
from librate.core.ivl.iarray import IVector
import librate.core.interface.blackboard as blackboard
import librate.core.interface.envg_interface as envg_interface
import librate.core.proofs.transversality as transversality

import librate.core.classes.stage_base as stage_base
import librate.core.classes.stage_decoder as stage_decoder
import librate.library.fibers.fibers as fibers


logger = logging.getLogger(__name__)


class TransversalDecoder(stage_decoder.Decoder):

    name = "transversal"

    def __init__(self, configs: dict):
        super().__init__(configs)

    def decode(self, encoded_params: dict, board: blackboard.Blackboard) -> lr_structs.Status:
        section = self.sectionFor(encoded_params)
        try:
            self.x_m = self.number(section, "x_m")
            self.half_width = self.number(section, "half_width", 1e-11)
            self.n_sub = self.integer(section, "n_sub", 100)
            self.B_c_radius = self.number(section, "B_c_radius") if "B_c_radius" in section else None
        except lr_errors.ConfigError as e:
            return self.fail(str(e))
        if not self.half_width > 0.0:
            return self.fail("half_width must be positive")
        if self.B_c_radius is not None and not self.B_c_radius > 0.0:
            return self.fail("B_c_radius must be positive")
        chart = encoded_params.get("chart", {})
        self.chart_params = {k: chart[k] for k in ("source", "order", "scale") if k in chart}
        self.decoded = True
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def fillRuntimeParameters(self, encoded_params: dict, board: blackboard.Blackboard, envg: envg_interface.EngineInterface) -> lr_structs.Status:
        for key in (blackboard.FAMILY_ANCHOR, blackboard.HYPERBOLICITY_ANCHOR, blackboard.FIBER_CERTIFICATE):
            if not board.hasBoardVariable(key):
                msg = "transversal stage error: no %s on the blackboard" % key
                return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.MISSING_CERTIFICATE, msg)
        self.anchor = board.getBoardVariable(blackboard.FAMILY_ANCHOR)
        self.fiber = board.getBoardVariable(blackboard.FIBER_CERTIFICATE)
        self.hyperbolicity = board.getBoardVariable(blackboard.HYPERBOLICITY_ANCHOR)
        self.chart = board.getBoardVariable(blackboard.CHART)
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def asConfig(self) -> dict:
        return {"x_m": self.x_m, "half_width": self.half_width, "n_sub": self.n_sub, "B_c_radius": self.B_c_radius,
                "chart_params": self.chart_params, "chart": self.chart, "anchor": self.anchor, "fiber": self.fiber,
                "hyperbolicity": self.hyperbolicity}


class Transversal(stage_base.Stage):
    """Crossing of p_x = 0 by the unstable curve on the section and its slope there."""

    kind = lr_constants.CertificateKind.TRANSVERSAL

    def __init__(self, configs: dict):
        super().__init__(configs)

    def init(self, envg: envg_interface.EngineInterface, stage_params: dict, board: blackboard.Blackboard) -> lr_structs.Status:
        self.stage_params = stage_params
        fiber = stage_params["fiber"]
        x_r = stage_params["x_m"] + stage_params["half_width"]
        if stage_params["B_c_radius"] is None:
            B_c = transversality.central_box(fiber, x_r)
        else:
            r = stage_params["B_c_radius"]
            B_c = IVector(np.full(3, -r), np.full(3, r))
        try:
            self.probe = transversality.SectionProbe.around(stage_params["x_m"], stage_params["half_width"], B_c, fiber.local.alpha)
        except lr_errors.DomainError as e:
            msg = "transversal stage error: %s" % e
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.CONFIG_ERROR, msg)
        self.inputs = {"x_m": stage_params["x_m"], "half_width": stage_params["half_width"], "n_sub": stage_params["n_sub"],
                       "mu": envg.params.mu, "B_c_radius": float(B_c.hi[0])}
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def run(self, envg: envg_interface.EngineInterface) -> lr_structs.Status:
        p = self.stage_params
        chart = p["chart"]
        try:
            if chart is None: chart = self.timed(fibers.load_chart, p["chart_params"], p["anchor"], envg)
        except lr_errors.LibrateError as e:
            msg = "transversal stage error: %s" % e
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.OTHER, msg)

        cert = self.timed(transversality.certify_transversal, self.probe, chart, p["fiber"], p["anchor"], p["hyperbolicity"],
                          envg.params, envg.options, p["n_sub"], envg.mapFunction())
        if cert.verified:
            mirror = transversality.stable_counterpart(cert.right_image)
            logger.info("transversal info: stable crossing box p_x %r, stable slope %r", mirror.p_x, cert.stable_slope)
        self.certificates = [cert]
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def onFinish(self, envg: envg_interface.EngineInterface, board: blackboard.Blackboard) -> lr_structs.Status:
        board.setBoardVariable(blackboard.TRANSVERSAL_CERTIFICATE, self.certificates[0])
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)
