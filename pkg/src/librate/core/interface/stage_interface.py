# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

import asyncio
import importlib
import logging

import librate.core.common.constants as lr_constants
import librate.core.common.structs as lr_structs

import librate.core.classes.stage_base as stage_base
import librate.core.classes.stage_decoder as stage_decoder
import librate.core.interface.blackboard as blackboard
import librate.core.interface.envg_interface as envg_interface


logger = logging.getLogger(__name__)


class StageInterface:
    """
    Class loading a stage and its decoder from the library and running them.
    """

    stage: stage_base.Stage = None
    decoder: stage_decoder.Decoder = None
    library: dict = None
    stage_name: str = ""

    def __init__(self):
        pass

    def init(self, library: dict) -> lr_structs.Status:

        if len(library.keys()) == 0:
            msg = "stage_interface error: library list cannot be empty!"
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.CONFIG_ERROR, msg)

        self.library = library
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def setDecoder(self, stage_name: str) -> lr_structs.Status:

        if self.library is None:
            msg = "stage_interface error: stage library is empty! must call a successful init()!"
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.CONFIG_ERROR, msg)

        if stage_name not in self.library:
            msg = "stage_interface error: could not find stage %s in library" % stage_name
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.CONFIG_ERROR, msg)

        if "decoder" not in self.library[stage_name]:
            msg = "stage_interface error: stage %s missing an essential field 'decoder'" % stage_name
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.CONFIG_ERROR, msg)

        configs = self.library[stage_name].get("decoder_configs", {})
        self.decoder = self._instantiate(self.library[stage_name]["decoder"], configs)
        self.stage_name = stage_name
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def setStage(self, stage_name: str) -> lr_structs.Status:

        if self.library is None:
            msg = "stage_interface error: stage library is empty! must call a successful init()!"
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.CONFIG_ERROR, msg)

        # setDecoder() called before setStage() so stage_name must exist in self.library

        if "src" not in self.library[stage_name]:
            msg = "stage_interface error: stage %s missing an essential field 'src'" % stage_name
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.CONFIG_ERROR, msg)

        configs = self.library[stage_name].get("src_configs", {})
        self.stage = self._instantiate(self.library[stage_name]["src"], configs)
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def runDecoder(self, encoded_params: dict, board: blackboard.Blackboard, envg: envg_interface.EngineInterface) -> lr_structs.Status:

        if self.decoder is None:
            msg = "stage_interface error: tried to run decoder before being set!"
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, message=msg)

        status = self.decoder.decode(encoded_params, board)
        if status.status != lr_constants.StatusFlags.SUCCESS: return status

        return self.decoder.fillRuntimeParameters(encoded_params, board, envg)

    async def runStage(self, envg: envg_interface.EngineInterface, board: blackboard.Blackboard) -> lr_structs.Status:
        """
        Runs init, the blocking verification in an executor thread, persistence and onFinish.
        Returns FAILED with PROOF_FAILURE when any certificate of the stage is not verified;
        the certificates are stored and published either way.
        """

        if (self.stage is None) or (self.decoder is None):
            msg = "stage_interface error: tried to run stage before setup!"
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, message=msg)

        if not self.decoder.isReadyForExecution():
            msg = "stage_interface error: flag indicates decoder has not yet been decoded! \
                  make sure Decoder class sets decoded to True on decode() call"
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, message=msg)

        stage_params = self.decoder.asConfig()

        status = self.stage.init(envg, stage_params, board)
        if status.status != lr_constants.StatusFlags.SUCCESS: return status

        loop = asyncio.get_running_loop()
        status = await loop.run_in_executor(None, self.stage.run, envg)
        if status.status != lr_constants.StatusFlags.SUCCESS: return status

        status = self.stage.persist(envg)
        if status.status != lr_constants.StatusFlags.SUCCESS: return status

        status = self.stage.onFinish(envg, board)
        if status.status != lr_constants.StatusFlags.SUCCESS: return status

        if not self.stage.verified():
            failed = [c for c in self.stage.certificates if not c.verified]
            first = failed[0].verdict if failed else None
            msg = "%s stage: %d of %d certificates failed" % (self.stage_name, len(failed), len(self.stage.certificates))
            if first is not None: msg += " (first: %s, %s)" % (first.reason.name, first.message)
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.PROOF_FAILURE, msg)

        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def cleanup(self):

        self.stage = None
        self.decoder = None
        self.stage_name = ""

    def _instantiate(self, dotted_path: str, configs: dict):
        module_path = '.'.join(dotted_path.split('.')[:-1])
        class_name = dotted_path.split('.')[-1]
        module = importlib.import_module(module_path)
        return getattr(module, class_name)(configs)
