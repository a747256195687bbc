# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

from __future__ import annotations
from abc import abstractmethod, ABC
import typing

import librate.core.common.constants as lr_constants
import librate.core.common.errors as lr_errors
import librate.core.common.structs as lr_structs


class EngineBase(ABC):
    """
    Base class for engines used by the proof stages.
    """

    class_id: str

    def __init__(self, class_id: str):
        """
        class_id: group identifier (assigned field, used in log messages only)
        """
        self.class_id = class_id

    @abstractmethod
    async def init(self, general_config: dict, engine_config: dict) -> lr_structs.Status:
        """
        Initiation rule of the engine.
        general_config: run-wide settings (mu, threads, ...)
        engine_config:  configurations specific to this engine

        return: whether initiation was successful or not
        """
        pass

    @abstractmethod
    async def close(self) -> lr_structs.Status:
        """
        Closing rule of the engine.

        return: whether close was successful or not
        """
        pass


class FlowEngineBase(EngineBase):
    """
    Base class for engines which propagate states of the PRC3BP.
    """

    params: lr_structs.ModelParams
    options: lr_structs.IntegratorOptions

    def __init__(self, class_id: str, params: typing.Optional[lr_structs.ModelParams]=None,
                 options: typing.Optional[lr_structs.IntegratorOptions]=None):
        super().__init__(class_id)
        self.configure(params or lr_structs.ModelParams(), options or lr_structs.IntegratorOptions())

    def configure(self, params: lr_structs.ModelParams, options: lr_structs.IntegratorOptions):
        self.params = params.validate()
        self.options = options.validate()

    async def init(self, general_config: dict, engine_config: dict) -> lr_structs.Status:
        try:
            self.configure(lr_structs.ModelParams(general_config.get("mu", lr_constants.DEFAULT_MU)),
                           lr_structs.IntegratorOptions.from_config(engine_config))
        except (lr_errors.ConfigError, TypeError) as e:
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.CONFIG_ERROR, str(e))
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    @abstractmethod
    def flow(self, initial, T):
        """
        Propagate an initial condition.
        initial: the starting point or set
        T:       time (or time interval) to flow for, may be negative

        return: engine-specific flow result
        """
        pass

    async def close(self) -> lr_structs.Status:
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)


class DataEngineBase(EngineBase):
    """
    Base class for engines which access the certificate storage.
    """

    def __init__(self, class_id: str):
        super().__init__(class_id)

    @abstractmethod
    def load(self, general_config: dict, engine_config: dict) -> lr_structs.Status:
        """
        Load stored records.
        general_config: run-wide settings
        engine_config:  configurations specific to this engine (e.g., output directory)

        return: whether loading was successful or not
        """
        pass

    @abstractmethod
    def getData(self, cmd: str) -> tuple[lr_structs.Status, list[dict]]:
        """
        Get stored records.
        cmd: the record stream to read (a certificate kind)

        return: success status and records
        """
        pass

    @abstractmethod
    def updateData(self, cmd: str, data: dict) -> lr_structs.Status:
        """
        Append a record to a stream.
        cmd:  the record stream (a certificate kind)
        data: the serialized record

        return: whether update was success or not
        """
        pass

    @abstractmethod
    def save(self) -> tuple[lr_structs.Status, dict]:
        """
        Flush records to storage.

        return: success status and the paths written
        """
        pass
