# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

"""
librate prove [family|hyperbolicity|fibers|transversal] --config <path> [--long-run] [--threads N]
librate plot --what {hill,family,slopes,fibers,section} --out <dir> --config <path>
librate recheck --config <path>

Exit code 0 only when every requested certificate is verified, 1 for a failed proof or a
missing certificate, 2 for configuration errors.
"""

import argparse
import asyncio
import logging
import typing

import librate.core.common.constants as lr_constants
import librate.core.common.logs as lr_logs
import librate.core.common.structs as lr_structs
import librate.core.interface.blackboard as blackboard
import librate.core.interface.config_loader as config_loader
import librate.core.interface.envg_interface as envg_interface
import librate.core.interface.plot_export as plot_export
import librate.core.interface.stage_interface as stage_interface
import librate.core.pipeline_decoder as pipeline_decoder


logger = logging.getLogger("librate.runner")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def exit_code(status: lr_structs.Status) -> int:
    if status.status == lr_constants.StatusFlags.SUCCESS: return EXIT_OK
    if status.reason == lr_constants.StatusReason.CONFIG_ERROR: return EXIT_CONFIG
    return EXIT_FAILED


async def setup(config_path: str, overrides: typing.Optional[dict]=None,
                log_level: typing.Optional[str]=None) -> tuple[lr_structs.Status, config_loader.ConfigLoader, envg_interface.EngineInterface]:
    """Load the configuration, reconfigure logging from it and init the engines."""
    cfl = config_loader.ConfigLoader()
    envg = envg_interface.EngineInterface()
    status = cfl.loadConfigFile(config_path, overrides)
    if status.status != lr_constants.StatusFlags.SUCCESS: return status, cfl, envg

    lr_logs.setup_logging(log_level or cfl.general_config.get("log_level"), cfl.envg_config["output"].get("log_file"))
    status = await envg.init(cfl.general_config, cfl.envg_config)
    return status, cfl, envg


async def prove_mode(config_path: str, stage: typing.Optional[str], long_run: bool, threads: typing.Optional[int],
                     log_level: typing.Optional[str]=None) -> int:

    overrides = {}
    if long_run: overrides["long_run"] = True
    if threads is not None: overrides["threads"] = threads

    status, cfl, envg = await setup(config_path, overrides, log_level)
    if status.status != lr_constants.StatusFlags.SUCCESS:
        logger.error(status.message)
        await envg.close()
        return exit_code(status)

    rsi = stage_interface.StageInterface()
    status = rsi.init(cfl.library_config)
    if status.status != lr_constants.StatusFlags.SUCCESS:
        logger.error(status.message)
        await envg.close()
        return exit_code(status)

    stages = pipeline_decoder.stages_through(stage) if stage is not None else cfl.pipeline
    board = blackboard.Blackboard()
    psd = pipeline_decoder.PipelineDecoder()
    run_pipeline = asyncio.create_task(psd.runPipeline(stages, cfl, board, rsi, envg))
    status = await run_pipeline

    _, paths = envg.data_env.save()
    for kind, path in paths.items(): logger.info("runner info: %s certificates in %s", kind, path)
    await envg.close()

    if status.status == lr_constants.StatusFlags.SUCCESS:
        logger.info("runner info: all requested certificates verified (%s)", ", ".join(n for n, _ in psd.results) or "no stages")
    else:
        logger.error("runner error: %s", status.message)
    return exit_code(status)


async def plot_mode(config_path: str, what: str, out_dir: str, h: typing.Optional[float]=None,
                    log_level: typing.Optional[str]=None) -> int:

    status, cfl, envg = await setup(config_path, None, log_level)
    if status.status != lr_constants.StatusFlags.SUCCESS:
        logger.error(status.message)
        await envg.close()
        return exit_code(status)

    exporter = plot_export.PlotExporter(envg.data_env, envg.params)
    status, path = await asyncio.get_running_loop().run_in_executor(None, exporter.export, what, out_dir, h)
    await envg.close()
    if status.status != lr_constants.StatusFlags.SUCCESS:
        logger.error(status.message)
        return exit_code(status)
    logger.info("runner info: wrote %s", path)
    return EXIT_OK


async def recheck_mode(config_path: str, log_level: typing.Optional[str]=None) -> int:
    """Reload every stored certificate and re-evaluate its inclusion conditions."""

    status, cfl, envg = await setup(config_path, None, log_level)
    if status.status != lr_constants.StatusFlags.SUCCESS:
        logger.error(status.message)
        await envg.close()
        return exit_code(status)

    code, found = EXIT_OK, 0
    for kind in lr_constants.CertificateKind:
        status, certs = envg.data_env.certificates(kind)
        if status.status != lr_constants.StatusFlags.SUCCESS: continue
        found += len(certs)
        bad = [i for i, c in enumerate(certs) if not (c.verified and c.recheck())]
        if bad:
            logger.error("runner error: %d of %d %s certificates fail the recheck (first index %d)", len(bad), len(certs), kind.value, bad[0])
            code = EXIT_FAILED
        else:
            logger.info("runner info: %d %s certificates re-verified", len(certs), kind.value)
    await envg.close()
    if found == 0:
        logger.error("runner error: no stored certificates")
        return EXIT_FAILED
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="librate", description="Validated numerics for the planar restricted three-body problem")
    parser.add_argument("--log-level", default=None, help="overrides log_level of the config and LIBRATE_LOG_LEVEL")
    commands = parser.add_subparsers(dest="command", required=True)

    prove = commands.add_parser("prove", help="run the proof pipeline up to a stage (or the config pipeline)")
    prove.add_argument("stage", nargs="?", choices=lr_constants.PIPELINE_ORDER, default=None)
    prove.add_argument("--config", required=True, help="JSON run configuration")
    prove.add_argument("--long-run", action="store_true", help="use the long_run blocks of the stage sections")
    prove.add_argument("--threads", type=int, default=None, help="worker threads for subdivision tasks")

    plot = commands.add_parser("plot", help="write CSV data for a plot kind from stored certificates")
    plot.add_argument("--what", required=True, choices=plot_export.PLOT_KINDS)
    plot.add_argument("--out", required=True, help="output directory")
    plot.add_argument("--config", required=True, help="JSON run configuration naming the certificate directory")
    plot.add_argument("--h", type=float, default=None, help="energy level of the hill plot")

    recheck = commands.add_parser("recheck", help="re-verify stored certificates")
    recheck.add_argument("--config", required=True, help="JSON run configuration naming the certificate directory")
    return parser


def main(argv: typing.Optional[list[str]]=None) -> int:
    pargs = build_parser().parse_args(argv)
    lr_logs.setup_logging(pargs.log_level)

    if pargs.command == "prove":
        return asyncio.run(prove_mode(pargs.config, pargs.stage, pargs.long_run, pargs.threads, pargs.log_level))
    if pargs.command == "plot":
        return asyncio.run(plot_mode(pargs.config, pargs.what, pargs.out, pargs.h, pargs.log_level))
    return asyncio.run(recheck_mode(pargs.config, pargs.log_level))


if __name__ == "__main__":

    import sys
    sys.exit(main())
