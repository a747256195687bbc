# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

import os
import sys
import logging
import typing

from dotenv import load_dotenv


LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logging(level: typing.Optional[str]=None, log_file: typing.Optional[str]=None, env_file: typing.Optional[str]=None) -> logging.Logger:
    """
    Configure the librate logger tree once per process.
    level:    explicit level name; falls back to LIBRATE_LOG_LEVEL (a .env file is honoured) then INFO
    log_file: optional path of an extra file handler
    env_file: optional .env path, default search from the working directory
    """
    load_dotenv(env_file)
    level = (level or os.environ.get("LIBRATE_LOG_LEVEL", "INFO")).upper()

    root = logging.getLogger("librate")
    root.setLevel(getattr(logging, level, logging.INFO))
    for handler in list(root.handlers): root.removeHandler(handler)

    stream = logging.StreamHandler(sys.stdout)
    stream.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(stream)
    if log_file:
        os.makedirs(os.path.dirname(os.path.abspath(log_file)), exist_ok=True)
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(file_handler)
    return root
