# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

"""
CSV data behind the figures: one file per plot kind, header row first.

    hill     x_lo, x_hi, y_lo, y_hi, region         (1 inside, -1 forbidden, 0 undecided)
    family   x, kappa_lo, kappa_hi                  (certified p_y of the orbit through x)
    slopes   x, a, kappa_slope_lo, kappa_slope_hi, dH_dx_lo, dH_dx_hi
    fibers   slab, x_lo, x_hi, y_lo, y_hi, p_x_lo, p_x_hi, p_y_lo, p_y_hi
    section  manifold, edge, x_lo, x_hi, p_x_lo, p_x_hi
"""

import logging
import os
import typing

import numpy as np

import librate.core.common.constants as lr_constants
import librate.core.common.errors as lr_errors
import librate.core.common.structs as lr_structs
from librate.core.ivl.interval import Interval
import librate.core.model.prc3bp as prc3bp
import librate.core.proofs.param_method as param_method
import librate.core.proofs.transversality as transversality
import librate.core.engines.data_engine as data_engine


logger = logging.getLogger(__name__)

PLOT_KINDS = ["hill", "family", "slopes", "fibers", "section"]
OTERMA_ENERGY = -1.515
HILL_WINDOW = ((-1.5, 1.5), (-1.5, 1.5))


def write_csv(path: str, header: list[str], rows: list) -> str:
    """Rows of floats and strings; floats are written in shortest round-trip form."""
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(repr(float(v)) if isinstance(v, (float, np.floating)) else str(v) for v in row) + "\n")
    return path


def hill_rows(h: float, params: lr_structs.ModelParams, nx: int=200, ny: int=200,
              window: tuple=HILL_WINDOW) -> list:
    return prc3bp.hill_grid(lr_structs.EnergyLevel(Interval(h)), window[0], window[1], nx, ny, params)


def family_rows(certs: list) -> list:
    return [(c.box.x0, c.newton_set.lo, c.newton_set.hi) for c in certs if c.verified]


def slope_rows(certs: list) -> list:
    return [(c.box.x0, c.box.a_slope, c.kappa_slope.lo, c.kappa_slope.hi, c.dH_dx.lo, c.dH_dx.hi) for c in certs if c.verified]


def fiber_rows(chart: param_method.Chart, fiber_cert: param_method.FiberCertificate) -> list:
    rows = []
    for i, box in enumerate(param_method.fiber_boxes(chart, fiber_cert.local)):
        rows.append((i, *[v for k in range(4) for v in (box.lo[k], box.hi[k])]))
    return rows


def section_rows(cert: transversality.IntersectionCertificate) -> list:
    rows = []
    for edge, image in (("left", cert.left_image), ("right", cert.right_image)):
        if image is None: continue
        mirror = transversality.stable_counterpart(image)
        rows.append(("unstable", edge, image.x.lo, image.x.hi, image.p_x.lo, image.p_x.hi))
        rows.append(("stable", edge, mirror.x.lo, mirror.x.hi, mirror.p_x.lo, mirror.p_x.hi))
    return rows


class PlotExporter:
    """
    Builds plot data from the stored certificate streams of a data engine.
    """

    def __init__(self, data_env: data_engine.JsonLinesDataEngine, params: lr_structs.ModelParams):
        self.data_env = data_env
        self.params = params

    def export(self, what: str, out_dir: str, h: typing.Optional[float]=None) -> tuple[lr_structs.Status, str]:
        """
        what: one of PLOT_KINDS
        h:    energy level for the hill plot; the anchor family energy (or the Oterma level) when omitted

        return: status and the CSV path
        """
        if what not in PLOT_KINDS:
            msg = "plot error: unknown plot kind %s (expected one of %s)" % (what, ", ".join(PLOT_KINDS))
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.CONFIG_ERROR, msg), ""
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "%s.csv" % what)
        try:
            self._write(what, path, h)
        except lr_errors.MissingCertificate as e:
            logger.error("plot error: %s", e)
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.MISSING_CERTIFICATE,
                                     "plot error: %s" % e), ""
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS), path

    def _write(self, what: str, path: str, h: typing.Optional[float]):
        if what == "hill":
            if h is None: h = self._anchorEnergy()
            write_csv(path, ["x_lo", "x_hi", "y_lo", "y_hi", "region"], hill_rows(h, self.params))

        elif what in ("family", "slopes"):
            certs = self.data_env.requireCertificates(lr_constants.CertificateKind.FAMILY)
            if what == "family": write_csv(path, ["x", "kappa_lo", "kappa_hi"], family_rows(certs))
            else: write_csv(path, ["x", "a", "kappa_slope_lo", "kappa_slope_hi", "dH_dx_lo", "dH_dx_hi"], slope_rows(certs))

        elif what == "fibers":
            cert = self.data_env.requireCertificates(lr_constants.CertificateKind.FIBER)[-1]
            _, records = self.data_env.getData(lr_constants.CertificateKind.FIBER.value)
            inputs = max(records, key=lambda r: r.get("index", 0))["inputs"]
            if not cert.verified or "chart" not in inputs:
                raise lr_errors.MissingCertificate("no verified fiber certificate with an embedded chart")
            header = ["slab", "x_lo", "x_hi", "y_lo", "y_hi", "p_x_lo", "p_x_hi", "p_y_lo", "p_y_hi"]
            write_csv(path, header, fiber_rows(param_method.Chart.from_json(inputs["chart"]), cert))

        else:
            cert = self.data_env.requireCertificates(lr_constants.CertificateKind.TRANSVERSAL)[-1]
            write_csv(path, ["manifold", "edge", "x_lo", "x_hi", "p_x_lo", "p_x_hi"], section_rows(cert))

    def _anchorEnergy(self) -> float:
        status, records = self.data_env.getData(lr_constants.CertificateKind.FAMILY.value)
        if status.status != lr_constants.StatusFlags.SUCCESS or len(records) == 0: return OTERMA_ENERGY
        anchor = records[0]["inputs"].get("anchor", 0)
        cert = data_engine.decode_certificate(next((r for r in records if r["index"] == anchor), records[0]))
        return float(prc3bp.hamiltonian(lr_structs.State.point(*cert.box.center), self.params).mid)
