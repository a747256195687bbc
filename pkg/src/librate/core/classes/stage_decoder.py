# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

import copy
import logging
import numbers
from abc import abstractmethod, ABC

import librate.core.common.constants as lr_constants
import librate.core.common.errors as lr_errors
import librate.core.common.structs as lr_structs
import librate.core.interface.blackboard as blackboard
import librate.core.interface.envg_interface as envg_interface


logger = logging.getLogger(__name__)


class DecoderAbstract(ABC):

    decoded: bool = False
    configs: dict = {}
    name: str = "stage"

    def __init__(self, configs: dict):
        self.configs = configs

    @abstractmethod
    def decode(self, encoded_params: dict, board: blackboard.Blackboard) -> lr_structs.Status:
        """
        Parameter decoding independent of upstream results.
        encoded_params: {"params": the stage config section, "long_run": bool, "config_dir": str}
        board:          the blackboard holding upstream certificates

        return: success status
        """
        pass

    @abstractmethod
    def fillRuntimeParameters(self, encoded_params: dict, board: blackboard.Blackboard, envg: envg_interface.EngineInterface) -> lr_structs.Status:
        """
        Parameter decoding which depends on upstream certificates.
        encoded_params: as in decode()
        board:          the blackboard to read upstream certificates from
        envg:           model parameters, integrator options and engines

        return: success status
        """
        logger.debug("%s decoder info: fillRuntimeParameters not implemented, assuming no runtime parameters", self.name)
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    @abstractmethod
    def asConfig(self) -> dict:
        """
        Return the parameters in a format that can be loaded by the stage module.

        return: parameters
        """
        pass

    def isReadyForExecution(self) -> bool:
        return self.decoded

    def sectionFor(self, encoded_params: dict) -> dict:
        """The stage section with its 'long_run' block merged in when the run is a long run."""
        section = copy.deepcopy(encoded_params.get("params", {}))
        long_block = section.pop("long_run", {})
        if encoded_params.get("long_run", False): section.update(long_block)
        return section

    def fail(self, message: str) -> lr_structs.Status:
        return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.CONFIG_ERROR,
                                 "%s stage error: %s" % (self.name, message))

    def number(self, section: dict, key: str, default=None) -> float:
        value = section.get(key, default)
        if value is None or isinstance(value, bool) or not isinstance(value, numbers.Real):
            raise lr_errors.ConfigError("'%s' must be a number, got %r" % (key, value))
        return float(value)

    def integer(self, section: dict, key: str, default=None, minimum: int=1) -> int:
        value = section.get(key, default)
        if value is None or isinstance(value, bool) or not isinstance(value, numbers.Integral):
            raise lr_errors.ConfigError("'%s' must be an integer, got %r" % (key, value))
        if value < minimum:
            raise lr_errors.ConfigError("'%s' must be >= %d, got %d" % (key, minimum, value))
        return int(value)


"""Use below class to use default implementations of abstract methods."""
class Decoder(DecoderAbstract):

    def __init__(self, configs: dict):
        super().__init__(configs)

    def fillRuntimeParameters(self, encoded_params: dict, board: blackboard.Blackboard, envg: envg_interface.EngineInterface) -> lr_structs.Status:
        return super().fillRuntimeParameters(encoded_params, board, envg)
