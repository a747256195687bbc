# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

import logging
import time
import typing
from abc import abstractmethod, ABC

import librate.core.common.constants as lr_constants
import librate.core.common.structs as lr_structs
import librate.core.engines.data_engine as data_engine
import librate.core.interface.blackboard as blackboard
import librate.core.interface.envg_interface as envg_interface


logger = logging.getLogger(__name__)


class StageAbstract(ABC):
    """
    A template class for one proof stage of the pipeline.
    """

    configs: dict = {}
    kind: lr_constants.CertificateKind

    certificates: list
    inputs: dict
    elapsed: float = 0.0

    def __init__(self, configs: dict):
        """
        Please use init() to do any initiation.
        """
        self.configs = configs
        self.certificates = []
        self.inputs = {}
        self.elapsed = 0.0

    @abstractmethod
    def init(self, envg: envg_interface.EngineInterface, stage_params: dict, board: blackboard.Blackboard) -> lr_structs.Status:
        """
        Init the stage.
        envg:         model parameters, integrator options and engines
        stage_params: decoded stage parameters
        board:        upstream certificates

        return: success status
        """
        pass

    @abstractmethod
    def run(self, envg: envg_interface.EngineInterface) -> lr_structs.Status:
        """
        The verification work. Blocking; called from an executor thread.
        Fill self.certificates in a deterministic order.
        envg: model parameters, integrator options and engines

        return: success status (a failed certificate is not a failed run)
        """
        pass

    @abstractmethod
    def onFinish(self, envg: envg_interface.EngineInterface, board: blackboard.Blackboard) -> lr_structs.Status:
        """
        Save the certificates to the blackboard for downstream stages.
        envg:  access to the data engine
        board: the blackboard to save the certificates to

        return: success status
        """
        pass

    def verified(self) -> bool:
        return len(self.certificates) > 0 and all(c.verified for c in self.certificates)

    def persist(self, envg: envg_interface.EngineInterface) -> lr_structs.Status:
        """Write every certificate as one record of this stage's stream, then the timing sidecar."""
        for index, cert in enumerate(self.certificates):
            status = envg.data_env.updateData(self.kind.value, data_engine.certificate_record(self.kind, index, cert, self.inputs))
            if status.status != lr_constants.StatusFlags.SUCCESS: return status
        verified = sum(1 for c in self.certificates if c.verified)
        return envg.data_env.writeSidecar(self.kind.value, {
            "elapsed_seconds": self.elapsed, "threads": envg.threads,
            "certificates": len(self.certificates), "verified": verified,
            "finished": time.strftime("%Y-%m-%dT%H:%M:%S", time.localtime())})


"""
Use below class to use default implementations of abstract methods.
"""

class Stage(StageAbstract):

    def __init__(self, configs: dict):
        super().__init__(configs)

    def timed(self, fn: typing.Callable, *args):
        """Call fn, adding its wall time to the stage total."""
        start = time.perf_counter()
        result = fn(*args)
        duration = time.perf_counter() - start
        self.elapsed += duration
        logger.info("stage info: %s.%s finished in %.1f s", self.kind.value, getattr(fn, "__name__", "step"), duration)
        return result
