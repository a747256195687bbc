# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

import json
import logging
import os

import librate.core.common.constants as lr_constants
import librate.core.common.errors as lr_errors
import librate.core.common.structs as lr_structs
import librate.core.interface.blackboard as blackboard
import librate.core.interface.envg_interface as envg_interface
import librate.core.proofs.param_method as param_method
from librate.core.proofs.lyapunov_family import FamilyCertificate
from librate.core.proofs.transversality import content_hash

import librate.core.classes.stage_base as stage_base
import librate.core.classes.stage_decoder as stage_decoder

import librate_samples


logger = logging.getLogger(__name__)

PUBLISHED_CHART = os.path.join(os.path.dirname(librate_samples.__file__), "oterma_chart.json")


def load_chart(chart_params: dict, anchor: FamilyCertificate, envg: envg_interface.EngineInterface) -> param_method.Chart:
    """
    chart_params: {"source": path | "fit", "order": int, "scale": float}
    The published chart is used when no source is given.
    """
    source = chart_params.get("source", PUBLISHED_CHART)
    if source == "fit":
        return param_method.fit_chart(anchor, envg.params, chart_params.get("order", 4), chart_params.get("scale", 0.1),
                                      opts=envg.options)
    try:
        with open(source) as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise lr_errors.ConfigError("chart error: could not read %s (%s)" % (source, e))
    return param_method.Chart.from_json(data, envg.params, envg.options)


class FibersDecoder(stage_decoder.Decoder):

    name = "fibers"

    def __init__(self, configs: dict):
        super().__init__(configs)

    def decode(self, encoded_params: dict, board: blackboard.Blackboard) -> lr_structs.Status:
        section = self.sectionFor(encoded_params)
        try:
            self.x_lo = self.number(section, "x_lo", -1e-11)
            self.x_hi = self.number(section, "x_hi")
            self.alpha = self.number(section, "alpha", 2.56e-6)
            self.N = self.integer(section, "N", 150)
            self.m = self.number(section, "m", 1000.0)
        except lr_errors.ConfigError as e:
            return self.fail(str(e))
        if not self.x_lo < self.x_hi:
            return self.fail("expected x_lo < x_hi")
        if not self.alpha > 0.0:
            return self.fail("alpha must be positive")
        if not self.m > 1.0:
            return self.fail("m must be > 1")

        chart = encoded_params.get("chart", {})
        self.chart_params = {k: chart[k] for k in ("source", "order", "scale") if k in chart}
        if self.chart_params.get("source") == "fit" and self.chart_params.get("order", 4) < 1:
            return self.fail("chart.order must be >= 1")

        self.decoded = True
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def fillRuntimeParameters(self, encoded_params: dict, board: blackboard.Blackboard, envg: envg_interface.EngineInterface) -> lr_structs.Status:
        if not board.hasBoardVariable(blackboard.FAMILY_ANCHOR):
            msg = "fibers stage error: no family anchor certificate on the blackboard"
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.MISSING_CERTIFICATE, msg)
        self.anchor = board.getBoardVariable(blackboard.FAMILY_ANCHOR)
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def asConfig(self) -> dict:
        return {"x_lo": self.x_lo, "x_hi": self.x_hi, "alpha": self.alpha, "N": self.N, "m": self.m,
                "chart": self.chart_params, "anchor": self.anchor}


class Fibers(stage_base.Stage):
    """Chart, fixed-point box B0, slab images and the cone conditions on the hull of DF(B)."""

    kind = lr_constants.CertificateKind.FIBER
    chart: param_method.Chart = None

    def __init__(self, configs: dict):
        super().__init__(configs)
        self.self_test = configs.get("chart_self_test", True)

    def init(self, envg: envg_interface.EngineInterface, stage_params: dict, board: blackboard.Blackboard) -> lr_structs.Status:
        self.stage_params = stage_params
        self.inputs = {k: stage_params[k] for k in ("x_lo", "x_hi", "alpha", "N", "m")}
        self.inputs["mu"] = envg.params.mu
        self.inputs["family"] = content_hash(stage_params["anchor"].to_json())
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def run(self, envg: envg_interface.EngineInterface) -> lr_structs.Status:
        p = self.stage_params
        try:
            self.chart = self.timed(load_chart, p["chart"], p["anchor"], envg)
            if self.self_test:
                jordan_like, _ = self.timed(param_method.chart_self_test, self.chart, envg.params, envg.options)
                if not jordan_like: logger.warning("fibers warning: C^-1 DPhi C is far from real Jordan form")
                residual = param_method.cohomology_residual(self.chart, p["x_hi"], envg.params, envg.options)
                logger.info("fibers info: chart residual %.3g at x_hi", residual)
        except lr_errors.LibrateError as e:
            msg = "fibers stage error: %s" % e
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.OTHER, msg)
        self.inputs["chart"] = self.chart.to_json()

        cert = self.timed(param_method.certify_fibers, self.chart, p["anchor"], p["x_lo"], p["x_hi"], p["alpha"], p["N"], p["m"],
                          envg.params, envg.options, envg.mapFunction())
        self.certificates = [cert]
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def onFinish(self, envg: envg_interface.EngineInterface, board: blackboard.Blackboard) -> lr_structs.Status:
        if self.chart is None: self.chart = param_method.Chart.from_json(self.inputs["chart"])
        board.setBoardVariable(blackboard.CHART, self.chart)
        board.setBoardVariable(blackboard.FIBER_CERTIFICATE, self.certificates[0])
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)
