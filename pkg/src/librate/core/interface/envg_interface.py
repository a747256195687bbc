# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

import asyncio
import concurrent.futures
import importlib
import logging
import typing

import librate.core.common.constants as lr_constants
import librate.core.common.errors as lr_errors
import librate.core.common.structs as lr_structs
import librate.core.engines.engine_base as engine_base


logger = logging.getLogger(__name__)

DEFAULT_DATA_ENGINE = "librate.core.engines.data_engine.JsonLinesDataEngine"


class EngineInterface:
    """
    Run-wide numerical settings and engines shared by the proof stages.
    """

    params: lr_structs.ModelParams = None
    options: lr_structs.IntegratorOptions = None

    data_env: engine_base.DataEngineBase = None

    threads: int = 1
    pool: typing.Optional[concurrent.futures.ThreadPoolExecutor] = None

    def __init__(self):
        pass

    async def init(self, general_config: dict, envg_config: dict) -> lr_structs.Status:
        """
        general_config: run-wide settings (mu, threads)
        envg_config:    {"integrator": {...}, "output": {...}}
        """

        # cleanup in case an earlier configuration is still loaded
        if self.data_env is not None or self.pool is not None:
            status = await self.close()
            if status.status != lr_constants.StatusFlags.SUCCESS: return status

        try:
            self.params = lr_structs.ModelParams(general_config.get("mu", lr_constants.DEFAULT_MU)).validate()
            self.options = lr_structs.IntegratorOptions.from_config(envg_config.get("integrator", {})).validate()
        except lr_errors.ConfigError as e:
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.CONFIG_ERROR, str(e))

        self.threads = int(general_config.get("threads", 1))
        if self.threads < 1:
            msg = "envg config error: threads must be >= 1, got %d" % self.threads
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.CONFIG_ERROR, msg)
        if self.threads > 1:
            self.pool = concurrent.futures.ThreadPoolExecutor(max_workers=self.threads, thread_name_prefix="librate")

        output_config = envg_config.get("output", {})
        status, self.data_env = self._getEngine("data", output_config.get("engine", DEFAULT_DATA_ENGINE))
        if status.status != lr_constants.StatusFlags.SUCCESS: return status
        status = await self.data_env.init(general_config, output_config)
        if status.status != lr_constants.StatusFlags.SUCCESS: return status

        logger.info("envg info: mu=%r, taylor order %d, %d thread(s)", self.params.mu, self.options.taylor_order, self.threads)
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def mapFunction(self) -> typing.Optional[typing.Callable]:
        """Ordered map over subdivision tasks, or None to run them in the calling thread."""
        if self.pool is None: return None
        return self.pool.map

    async def close(self) -> lr_structs.Status:
        status = lr_structs.Status(lr_constants.StatusFlags.SUCCESS)
        if self.data_env is not None:
            status = await self.data_env.close()
            self.data_env = None
        if self.pool is not None:
            await asyncio.get_running_loop().run_in_executor(None, self.pool.shutdown)
            self.pool = None
        return status

    def _getEngine(self, engine_name: str, dotted_path: str) -> tuple[lr_structs.Status, typing.Optional[engine_base.EngineBase]]:
        engine_module = ".".join(dotted_path.split(".")[0:-1])
        engine_class = dotted_path.split(".")[-1]
        try:
            module = importlib.import_module(engine_module)
            engine = getattr(module, engine_class)(engine_name)
        except (ImportError, AttributeError) as e:
            msg = "envg config error: could not load %s engine %s (%s)" % (engine_name, dotted_path, e)
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.CONFIG_ERROR, msg), None
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS), engine
