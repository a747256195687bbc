# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

"""
Certificate storage as JSON lines, one stream (file) per certificate kind.

A record wraps a serialized certificate:

    {"schema_version": 1, "kind": "family", "index": 0, "inputs": {...},
     "fingerprint": {...}, "certificate": {...}}

Wall-clock timings go to a sidecar "<kind>.timing.json" so that records stay
byte-identical between runs of the same configuration.
"""

from __future__ import annotations
import importlib.metadata
import json
import logging
import os
import platform
import typing

import numpy as np
import scipy

import librate.core.common.constants as lr_constants
import librate.core.common.errors as lr_errors
import librate.core.common.structs as lr_structs
from librate.core.engines.engine_base import DataEngineBase
from librate.core.proofs.lyapunov_family import FamilyCertificate, HyperbolicityCertificate
from librate.core.proofs.param_method import FiberCertificate
from librate.core.proofs.transversality import IntersectionCertificate


logger = logging.getLogger(__name__)

RECORD_SCHEMA_VERSION = 1

CERTIFICATE_TYPES = {
    lr_constants.CertificateKind.FAMILY: FamilyCertificate,
    lr_constants.CertificateKind.HYPERBOLICITY: HyperbolicityCertificate,
    lr_constants.CertificateKind.FIBER: FiberCertificate,
    lr_constants.CertificateKind.TRANSVERSAL: IntersectionCertificate,
}


def toolchain_fingerprint() -> dict:
    try:
        version = importlib.metadata.version("librate")
    except importlib.metadata.PackageNotFoundError:
        version = "dev"
    return {"librate": version, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "machine": platform.machine()}


def certificate_record(kind: lr_constants.CertificateKind, index: int, certificate, inputs: dict) -> dict:
    return {"schema_version": RECORD_SCHEMA_VERSION, "kind": kind.value, "index": index, "inputs": inputs,
            "fingerprint": toolchain_fingerprint(), "certificate": certificate.to_json()}


def decode_certificate(record: dict):
    """Certificate object of a stored record."""
    kind = lr_constants.CertificateKind(record["kind"])
    return CERTIFICATE_TYPES[kind].from_json(record["certificate"])


def dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


class JsonLinesDataEngine(DataEngineBase):

    directory: str = ""
    records: dict[str, list[dict]]
    opened: set[str]  # streams rewritten during this session

    def __init__(self, class_id: str="data"):
        super().__init__(class_id)
        self.records = {}
        self.opened = set()

    async def init(self, general_config: dict, engine_config: dict) -> lr_structs.Status:
        return self.load(general_config, engine_config)

    def load(self, general_config: dict, engine_config: dict) -> lr_structs.Status:
        if "directory" not in engine_config:
            msg = "data engine error: field 'output.directory' missing in config!"
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.CONFIG_ERROR, msg)

        directory = engine_config["directory"]
        if directory.startswith('$'):  # read from environment variable
            directory = os.environ.get(directory[1:], "")
        if directory == "":
            msg = "data engine error: output directory resolved to an empty path"
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.CONFIG_ERROR, msg)

        self.directory = directory
        os.makedirs(self.directory, exist_ok=True)
        self.records = {}
        self.opened = set()
        for kind in lr_constants.CertificateKind:
            path = self.streamPath(kind.value)
            if not os.path.exists(path): continue
            with open(path) as f:
                self.records[kind.value] = [json.loads(line) for line in f if line.strip() != ""]
            logger.debug("data engine info: loaded %d %s records", len(self.records[kind.value]), kind.value)
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def streamPath(self, cmd: str) -> str:
        return os.path.join(self.directory, "%s.jsonl" % cmd)

    def getData(self, cmd: str) -> tuple[lr_structs.Status, list[dict]]:
        if cmd not in self.records:
            msg = "data engine error: no stored %s certificates in %s" % (cmd, self.directory)
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.MISSING_CERTIFICATE, msg), []
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS), self.records[cmd]

    def updateData(self, cmd: str, data: dict) -> lr_structs.Status:
        """Append a record; the first write of a session replaces the stream from earlier runs."""
        if self.directory == "":
            msg = "data engine error: tried to write before a successful load()"
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, message=msg)

        mode = "a" if cmd in self.opened else "w"
        if mode == "w": self.records[cmd] = []
        with open(self.streamPath(cmd), mode) as f:
            f.write(dumps(data) + "\n")
        self.opened.add(cmd)
        self.records[cmd].append(data)
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def writeSidecar(self, cmd: str, data: dict) -> lr_structs.Status:
        with open(os.path.join(self.directory, "%s.timing.json" % cmd), "w") as f:
            json.dump(data, f, indent=2, sort_keys=True)
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def save(self) -> tuple[lr_structs.Status, dict]:
        """Streams are flushed on every update; returns the paths written this session."""
        paths = {cmd: self.streamPath(cmd) for cmd in sorted(self.opened)}
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS), paths

    def certificates(self, kind: lr_constants.CertificateKind) -> tuple[lr_structs.Status, list]:
        status, records = self.getData(kind.value)
        if status.status != lr_constants.StatusFlags.SUCCESS: return status, []
        ordered = sorted(records, key=lambda r: r.get("index", 0))
        return status, [decode_certificate(r) for r in ordered]

    def requireCertificates(self, kind: lr_constants.CertificateKind) -> list:
        """Certificates of a stored stream in index order; raises MissingCertificate when there are none."""
        status, certs = self.certificates(kind)
        if status.status != lr_constants.StatusFlags.SUCCESS: raise lr_errors.MissingCertificate(status.message)
        if len(certs) == 0: raise lr_errors.MissingCertificate("data engine error: the stored %s stream is empty" % kind.value)
        return certs

    async def close(self) -> lr_structs.Status:
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)
