# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

import copy
import importlib
import json
import logging
import numbers
import os
import typing

from dotenv import load_dotenv

import librate.core.common.constants as lr_constants
import librate.core.common.errors as lr_errors
import librate.core.common.structs as lr_structs


logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_LIBRARY = "librate.library.default_library"


"""Leaf kinds of the run configuration schema."""

NUMBER = "number"
INTEGER = "integer"
BOOL = "bool"
STRING = "string"
STRING_LIST = "string list"

_FAMILY = {"x0": NUMBER, "p_y0": NUMBER, "a_slope": NUMBER, "r": NUMBER, "j0_radius": NUMBER, "j1_radius": NUMBER,
           "count": INTEGER, "center": NUMBER, "overlap": NUMBER, "seed_oracle": BOOL}
_HYPERBOLICITY = {"scope": STRING}
_CHART = {"source": STRING, "order": INTEGER, "scale": NUMBER}
_FIBERS = {"x_lo": NUMBER, "x_hi": NUMBER, "alpha": NUMBER, "N": INTEGER, "m": NUMBER}
_TRANSVERSAL = {"x_m": NUMBER, "half_width": NUMBER, "n_sub": INTEGER, "B_c_radius": NUMBER}


def _with_long_run(section: dict) -> dict:
    return {**section, "long_run": dict(section)}


SCHEMA = {
    "schema_version": INTEGER,
    "mu": NUMBER,
    "threads": INTEGER,
    "long_run": BOOL,
    "log_level": STRING,
    "library": STRING,
    "pipeline": STRING_LIST,
    "integrator": {"taylor_order": INTEGER, "abs_tolerance": NUMBER, "max_step": NUMBER, "min_step": NUMBER,
                   "width_cap": NUMBER, "crossing_window": NUMBER, "section_time_cap": NUMBER},
    "family": _with_long_run(_FAMILY),
    "hyperbolicity": _with_long_run(_HYPERBOLICITY),
    "chart": _CHART,
    "fibers": _with_long_run(_FIBERS),
    "transversal": _with_long_run(_TRANSVERSAL),
    "output": {"directory": STRING, "log_file": STRING, "engine": STRING},
}

PATH_KEYS = [("output", "directory"), ("output", "log_file"), ("chart", "source")]


def _check_leaf(kind: str, value, dotted: str):
    if kind == NUMBER: ok = isinstance(value, numbers.Real) and not isinstance(value, bool)
    elif kind == INTEGER: ok = isinstance(value, numbers.Integral) and not isinstance(value, bool)
    elif kind == BOOL: ok = isinstance(value, bool)
    elif kind == STRING: ok = isinstance(value, str)
    else: ok = isinstance(value, list) and all(isinstance(v, str) for v in value)
    if not ok:
        raise lr_errors.ConfigError("config load error: '%s' must be a %s, got %r" % (dotted, kind, value))


def _resolve(value, kind: str, dotted: str):
    """Read '$NAME' values from the environment; non-string leaves are parsed as JSON."""
    if isinstance(value, str) and value.startswith('$'):
        name = value[1:]
        if name not in os.environ:
            raise lr_errors.ConfigError("config load error: '%s' refers to unset environment variable %s" % (dotted, name))
        value = os.environ[name]
        if kind != STRING:
            try:
                value = json.loads(value)
            except json.JSONDecodeError:
                raise lr_errors.ConfigError("config load error: '%s' from %s is not a valid %s" % (dotted, name, kind))
    return value


def validate(configs: dict, schema: dict=SCHEMA, prefix: str="") -> dict:
    """Copy of configs with environment values resolved; raises ConfigError naming the dotted key."""
    if not isinstance(configs, dict):
        raise lr_errors.ConfigError("config load error: '%s' must be an object" % (prefix.rstrip(".") or "<root>"))
    out = {}
    for key, value in configs.items():
        dotted = prefix + key
        if key not in schema:
            raise lr_errors.ConfigError("config load error: unknown key '%s'" % dotted)
        kind = schema[key]
        if isinstance(kind, dict):
            out[key] = validate(value, kind, dotted + ".")
        else:
            value = _resolve(value, kind, dotted)
            _check_leaf(kind, value, dotted)
            out[key] = value
    return out


class ConfigLoader:

    general_config: dict = None
    envg_config: dict = None
    stage_configs: dict = None
    pipeline: list[str] = None
    library_config: dict = None
    config_dir: str = "."

    def __init__(self):
        pass

    def loadConfigFile(self, filename: str, overrides: typing.Optional[dict]=None, env_file: typing.Optional[str]=None) -> lr_structs.Status:
        """
        Read a JSON run configuration. Relative paths in the file are relative to its directory.
        overrides: top-level values replacing those of the file (e.g. long_run, threads from the command line)
        """
        load_dotenv(env_file)
        try:
            with open(filename) as f:
                configs = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            msg = "config load error: could not read %s (%s)" % (filename, e)
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.CONFIG_ERROR, msg)
        if not isinstance(configs, dict):
            msg = "config load error: %s must hold a JSON object" % filename
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.CONFIG_ERROR, msg)
        configs.update(overrides or {})
        return self.loadConfigs(configs, os.path.dirname(os.path.abspath(filename)))

    def loadConfigs(self, configs: dict, config_dir: str=".") -> lr_structs.Status:
        """
        Directly use this function if the configuration content is built in code.
        The 'library' field can be a path to a module or direct content.
        """
        configs = copy.deepcopy(configs)
        library = configs.pop("library", DEFAULT_LIBRARY)
        try:
            configs = validate(configs)
            self._checkValues(configs)
        except lr_errors.ConfigError as e:
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.CONFIG_ERROR, str(e))

        self.config_dir = config_dir
        for section, key in PATH_KEYS:
            if section in configs and key in configs[section]:
                configs[section][key] = self._path(configs[section][key])

        self.general_config = {k: configs[k] for k in ("schema_version", "mu", "threads", "long_run", "log_level") if k in configs}
        self.general_config.setdefault("mu", lr_constants.DEFAULT_MU)
        self.general_config.setdefault("threads", 1)
        self.general_config.setdefault("long_run", False)
        self.envg_config = {"integrator": configs.get("integrator", {}),
                            "output": configs.get("output", {"directory": self._path("librate_output")})}
        self.envg_config["output"].setdefault("directory", self._path("librate_output"))
        self.pipeline = list(configs.get("pipeline", []))
        self.stage_configs = {name: configs.get(name, {}) for name in ("family", "hyperbolicity", "chart", "fibers", "transversal")}

        if isinstance(library, dict):
            logger.info("config load info: assuming library content is directly specified as field value is not a string")
            self.library_config = library
            return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)
        return self.expandLibraryConfig(library)

    def expandLibraryConfig(self, library_module_name: str) -> lr_structs.Status:
        try:
            library_module = importlib.import_module(library_module_name)
        except ImportError as e:
            msg = "config load error: could not import library %s (%s)" % (library_module_name, e)
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.CONFIG_ERROR, msg)
        self.library_config = library_module.library
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def encodedParams(self, stage_name: str) -> dict:
        """Parameters handed to a stage decoder."""
        return {"params": self.stage_configs.get(stage_name, {}), "chart": self.stage_configs.get("chart", {}),
                "long_run": self.general_config.get("long_run", False), "config_dir": self.config_dir}

    def _checkValues(self, configs: dict):
        if "schema_version" not in configs:
            raise lr_errors.ConfigError("config load error: missing 'schema_version'")
        if configs["schema_version"] != SCHEMA_VERSION:
            raise lr_errors.ConfigError("config load error: unsupported schema_version %d (expected %d)"
                                        % (configs["schema_version"], SCHEMA_VERSION))
        lr_structs.ModelParams(configs.get("mu", lr_constants.DEFAULT_MU)).validate()
        for name in configs.get("pipeline", []):
            if name not in lr_constants.PIPELINE_ORDER:
                raise lr_errors.ConfigError("config load error: unknown pipeline stage '%s' (expected one of %s)"
                                            % (name, ", ".join(lr_constants.PIPELINE_ORDER)))
        if configs.get("threads", 1) < 1:
            raise lr_errors.ConfigError("config load error: 'threads' must be >= 1")

    def _path(self, value: str) -> str:
        if value == "fit" or os.path.isabs(value): return value
        return os.path.normpath(os.path.join(self.config_dir, value))
