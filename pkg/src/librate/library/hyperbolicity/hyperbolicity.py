# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

import logging

import librate.core.common.constants as lr_constants
import librate.core.common.structs as lr_structs
import librate.core.interface.blackboard as blackboard
import librate.core.interface.envg_interface as envg_interface
import librate.core.proofs.lyapunov_family as lyapunov_family

import librate.core.classes.stage_base as stage_base
import librate.core.classes.stage_decoder as stage_decoder


logger = logging.getLogger(__name__)

SCOPES = ("all", "anchor")


class HyperbolicityDecoder(stage_decoder.Decoder):

    name = "hyperbolicity"

    def __init__(self, configs: dict):
        super().__init__(configs)

    def decode(self, encoded_params: dict, board: blackboard.Blackboard) -> lr_structs.Status:
        section = self.sectionFor(encoded_params)
        self.scope = section.get("scope", "all")
        if self.scope not in SCOPES:
            return self.fail("scope must be one of %s, got %r" % (", ".join(SCOPES), self.scope))
        self.decoded = True
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def fillRuntimeParameters(self, encoded_params: dict, board: blackboard.Blackboard, envg: envg_interface.EngineInterface) -> lr_structs.Status:
        if not board.hasBoardVariable(blackboard.FAMILY_CERTIFICATES):
            msg = "hyperbolicity stage error: no family certificates on the blackboard"
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.MISSING_CERTIFICATE, msg)
        self.family = board.getBoardVariable(blackboard.FAMILY_CERTIFICATES)
        self.anchor = board.getBoardVariable(blackboard.FAMILY_ANCHOR)
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def asConfig(self) -> dict:
        return {"scope": self.scope, "family": self.family, "anchor": self.anchor}


class Hyperbolicity(stage_base.Stage):

    kind = lr_constants.CertificateKind.HYPERBOLICITY

    def __init__(self, configs: dict):
        super().__init__(configs)

    def init(self, envg: envg_interface.EngineInterface, stage_params: dict, board: blackboard.Blackboard) -> lr_structs.Status:
        if stage_params["scope"] == "anchor":
            self.family = [stage_params["anchor"]]
            self.anchor_index = 0
        else:
            self.family = list(stage_params["family"])
            self.anchor_index = next((i for i, c in enumerate(self.family) if c is stage_params["anchor"]), 0)
        self.inputs = {"scope": stage_params["scope"], "mu": envg.params.mu, "anchor": self.anchor_index,
                       "family_x0": [repr(c.box.x0) for c in self.family]}
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def run(self, envg: envg_interface.EngineInterface) -> lr_structs.Status:
        self.certificates = self.timed(self.verifyAll, envg)
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def verifyAll(self, envg: envg_interface.EngineInterface) -> list[lyapunov_family.HyperbolicityCertificate]:
        worker = lambda cert: lyapunov_family.verify_hyperbolicity(cert, envg.params, envg.options)
        map_fn = envg.mapFunction()
        certs = list(map_fn(worker, self.family)) if map_fn is not None else [worker(c) for c in self.family]
        logger.info("hyperbolicity info: %d of %d family boxes verified", sum(c.verified for c in certs), len(certs))
        return certs

    def onFinish(self, envg: envg_interface.EngineInterface, board: blackboard.Blackboard) -> lr_structs.Status:
        board.setBoardVariable(blackboard.HYPERBOLICITY_CERTIFICATES, self.certificates)
        board.setBoardVariable(blackboard.HYPERBOLICITY_ANCHOR, self.certificates[self.inputs["anchor"]])
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)
