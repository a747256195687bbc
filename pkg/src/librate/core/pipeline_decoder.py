# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

import asyncio
import logging

import librate.core.common.constants as lr_constants
import librate.core.common.structs as lr_structs
import librate.core.engines.data_engine as data_engine
import librate.core.interface.blackboard as blackboard
import librate.core.interface.config_loader as config_loader
import librate.core.interface.envg_interface as envg_interface
import librate.core.interface.stage_interface as stage_interface


logger = logging.getLogger(__name__)

PREREQUISITES = {
    "family": [],
    "hyperbolicity": ["family"],
    "fibers": ["family"],
    "transversal": ["family", "hyperbolicity", "fibers"],
}


def order_stages(stages: list[str]) -> list[str]:
    """Unique stage names in dependency order."""
    return [name for name in lr_constants.PIPELINE_ORDER if name in stages]


def stages_through(stage: str) -> list[str]:
    """The stage and every stage before it."""
    return lr_constants.PIPELINE_ORDER[:lr_constants.PIPELINE_ORDER.index(stage) + 1]


class PipelineDecoder:

    def __init__(self):

        # logging
        self.log_last_executed_stage = ""
        self.results: list[tuple[str, lr_structs.Status]] = []

    async def runPipeline(self, stages: list[str], loader: config_loader.ConfigLoader,
                          board: blackboard.Blackboard, rsi: stage_interface.StageInterface,
                          envg: envg_interface.EngineInterface) -> lr_structs.Status:
        """
        Runs the stages in dependency order; the first failure stops every later stage.
        Prerequisites outside the list are restored from the stored certificate streams
        before any stage runs.
        """

        self.log_last_executed_stage = ""
        self.results = []

        ordered = order_stages(stages)
        if len(ordered) == 0:
            logger.info("pipeline info: empty pipeline, nothing to do")
            return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

        restored: set[str] = set()
        for name in ordered:
            for prerequisite in PREREQUISITES[name]:
                if prerequisite in ordered or prerequisite in restored: continue
                status = self.restoreStage(prerequisite, board, rsi, envg)
                rsi.cleanup()
                if status.status != lr_constants.StatusFlags.SUCCESS:
                    return self._stageFailure(name, status)
                restored.add(prerequisite)

        for name in ordered:
            task = asyncio.create_task(self.runStage(name, loader, board, rsi, envg))
            status = await task
            rsi.cleanup()
            self.results.append((name, status))
            if status.status != lr_constants.StatusFlags.SUCCESS:
                return self._stageFailure(name, status)

        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    async def runStage(self, name: str, loader: config_loader.ConfigLoader,
                       board: blackboard.Blackboard, rsi: stage_interface.StageInterface,
                       envg: envg_interface.EngineInterface) -> lr_structs.Status:

        logger.info("pipeline info: running stage %s", name)
        self.log_last_executed_stage = name

        status = rsi.setDecoder(name)
        if status.status != lr_constants.StatusFlags.SUCCESS: return status

        status = rsi.setStage(name)
        if status.status != lr_constants.StatusFlags.SUCCESS: return status

        status = rsi.runDecoder(loader.encodedParams(name), board, envg)
        if status.status != lr_constants.StatusFlags.SUCCESS: return status

        task = asyncio.create_task(rsi.runStage(envg, board))
        return await task

    def restoreStage(self, name: str, board: blackboard.Blackboard, rsi: stage_interface.StageInterface,
                     envg: envg_interface.EngineInterface) -> lr_structs.Status:
        """Publish stored certificates of a stage after re-checking each of them."""

        status = rsi.setDecoder(name)
        if status.status != lr_constants.StatusFlags.SUCCESS: return status
        status = rsi.setStage(name)
        if status.status != lr_constants.StatusFlags.SUCCESS: return status

        stage = rsi.stage
        status, records = envg.data_env.getData(stage.kind.value)
        if status.status != lr_constants.StatusFlags.SUCCESS: return status
        if len(records) == 0:
            msg = "pipeline error: the stored %s stream is empty" % name
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.MISSING_CERTIFICATE, msg)

        records = sorted(records, key=lambda r: r.get("index", 0))
        certificates = [data_engine.decode_certificate(r) for r in records]
        for index, cert in enumerate(certificates):
            if not cert.recheck():
                msg = "pipeline error: stored %s certificate %d does not re-verify" % (name, index)
                return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.PROOF_FAILURE, msg)
        if not all(c.verified for c in certificates):
            msg = "pipeline error: stored %s certificates are not all verified" % name
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.PROOF_FAILURE, msg)

        stage.certificates = certificates
        stage.inputs = records[0].get("inputs", {})
        logger.info("pipeline info: restored %d %s certificates from %s", len(certificates), name, envg.data_env.directory)
        return stage.onFinish(envg, board)

    def _stageFailure(self, name: str, status: lr_structs.Status) -> lr_structs.Status:
        msg = status.message if status.message.startswith(name) else "%s: %s" % (name, status.message)
        logger.error("pipeline error: stage %s", msg)
        return lr_structs.Status(lr_constants.StatusFlags.FAILED, status.reason, msg)
