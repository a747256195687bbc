# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

"""
Tests for the pipeline decoder, the stage interface and the blackboard.
Stages are replaced by stubs that build certificates by hand.
"""

import os
import sys

import numpy as np
import pytest

# Add src to Python path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

import librate.core.common.constants as lr_constants
import librate.core.common.structs as lr_structs
import librate.core.interface.blackboard as blackboard
import librate.core.interface.config_loader as config_loader
import librate.core.interface.envg_interface as envg_interface
import librate.core.interface.stage_interface as stage_interface
import librate.core.pipeline_decoder as pipeline_decoder
import librate.core.classes.stage_base as stage_base
import librate.core.classes.stage_decoder as stage_decoder
import librate.core.ivl.linalg as lr_linalg
from librate.core.ivl.interval import Interval
from librate.core.ivl.iarray import IMatrix
from librate.core.proofs.lyapunov_family import FamilyBox, FamilyCertificate, HyperbolicityCertificate


class StubDecoder(stage_decoder.Decoder):

    name = "stub"

    def decode(self, encoded_params: dict, board: blackboard.Blackboard) -> lr_structs.Status:
        self.params = self.sectionFor(encoded_params)
        self.decoded = True
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def asConfig(self) -> dict:
        return self.params


class StubFamily(stage_base.Stage):

    kind = lr_constants.CertificateKind.FAMILY

    def init(self, envg, stage_params, board) -> lr_structs.Status:
        self.count = stage_params.get("count", 2)
        self.inputs = {"anchor": 0, "count": self.count}
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def run(self, envg) -> lr_structs.Status:
        verdict = lr_structs.Verdict.passed()
        if self.configs.get("fail", False):
            verdict = lr_structs.Verdict.failed(lr_constants.FailureReason.NEWTON_FAILED, "stub")
        self.certificates = []
        for i in range(self.count):
            box = FamilyBox.from_radii(-0.95 + 1e-6 * i, -0.8368, -4.5, 1e-9, 1e-13, 1e-12)
            self.certificates.append(FamilyCertificate(box, Interval.around(-0.8368, 1e-14), Interval.around(-4.5, 1e-4),
                                                       Interval(-0.1, -0.05), verdict))
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def onFinish(self, envg, board) -> lr_structs.Status:
        board.setBoardVariable(blackboard.FAMILY_CERTIFICATES, self.certificates)
        board.setBoardVariable(blackboard.FAMILY_ANCHOR, self.certificates[self.inputs["anchor"]])
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)


class StubHyperbolicity(stage_base.Stage):

    kind = lr_constants.CertificateKind.HYPERBOLICITY

    def init(self, envg, stage_params, board) -> lr_structs.Status:
        self.anchor = board.getBoardVariable(blackboard.FAMILY_ANCHOR)
        if self.anchor is None:
            return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.MISSING_CERTIFICATE, "no anchor")
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def run(self, envg) -> lr_structs.Status:
        B = IMatrix.point(np.array([[4.0, 1.0], [0.0, 0.25]]))
        lam1, lam2, _ = lr_linalg.eig2_real(B)
        self.certificates = [HyperbolicityCertificate(IMatrix.zeros(1, 2), B, lam1, lam2, Interval(3.06), lr_structs.Verdict.passed())]
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def onFinish(self, envg, board) -> lr_structs.Status:
        board.setBoardVariable(blackboard.HYPERBOLICITY_ANCHOR, self.certificates[0])
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)


class StubUnreachable(stage_base.Stage):

    kind = lr_constants.CertificateKind.FIBER

    def init(self, envg, stage_params, board) -> lr_structs.Status:
        return lr_structs.Status(lr_constants.StatusFlags.FAILED, lr_constants.StatusReason.OTHER, "stage ran")

    def run(self, envg) -> lr_structs.Status:
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)

    def onFinish(self, envg, board) -> lr_structs.Status:
        return lr_structs.Status(lr_constants.StatusFlags.SUCCESS)


def stub_library(fail_family: bool=False) -> dict:
    return {
        "family": {"decoder": __name__ + ".StubDecoder", "src": __name__ + ".StubFamily", "src_configs": {"fail": fail_family}},
        "hyperbolicity": {"decoder": __name__ + ".StubDecoder", "src": __name__ + ".StubHyperbolicity"},
    }


async def setup_run(tmp_path, library: dict, configs: dict=None):
    cfl = config_loader.ConfigLoader()
    status = cfl.loadConfigs({"schema_version": 1, "library": library, "output": {"directory": str(tmp_path)}, **(configs or {})})
    assert status.status == lr_constants.StatusFlags.SUCCESS, status.message
    envg = envg_interface.EngineInterface()
    status = await envg.init(cfl.general_config, cfl.envg_config)
    assert status.status == lr_constants.StatusFlags.SUCCESS, status.message
    rsi = stage_interface.StageInterface()
    assert rsi.init(cfl.library_config).status == lr_constants.StatusFlags.SUCCESS
    return cfl, envg, rsi


class TestStageOrder:

    def test_order_stages(self):
        """Stages run in dependency order whatever the listed order; duplicates collapse."""
        assert pipeline_decoder.order_stages(["fibers", "family", "fibers"]) == ["family", "fibers"]

    def test_stages_through(self):
        """A stage target includes every earlier stage."""
        assert pipeline_decoder.stages_through("fibers") == ["family", "hyperbolicity", "fibers"]
        assert pipeline_decoder.stages_through("family") == ["family"]


class TestBlackboard:

    def test_set_and_get(self):
        """Values round trip; unknown keys read as None; the empty key is ignored."""
        board = blackboard.Blackboard()
        board.setBoardVariable(blackboard.CHART, "chart")
        board.setBoardVariable("", "ignored")
        assert board.getBoardVariable(blackboard.CHART) == "chart"
        assert board.hasBoardVariable(blackboard.CHART)
        assert board.getBoardVariable(blackboard.FIBER_CERTIFICATE) is None
        assert "" not in board.board
        board.clearBoard()
        assert board.board == {}


class TestStageInterface:

    def test_empty_library(self):
        """An empty library is a configuration error."""
        status = stage_interface.StageInterface().init({})
        assert status.reason == lr_constants.StatusReason.CONFIG_ERROR

    def test_unknown_stage(self):
        """Stages missing from the library or missing fields are configuration errors."""
        rsi = stage_interface.StageInterface()
        rsi.init({"family": {"src": __name__ + ".StubFamily"}})
        assert rsi.setDecoder("fibers").reason == lr_constants.StatusReason.CONFIG_ERROR
        assert "decoder" in rsi.setDecoder("family").message

    @pytest.mark.asyncio
    async def test_run_before_setup(self):
        """Running without a stage fails."""
        status = await stage_interface.StageInterface().runStage(None, blackboard.Blackboard())
        assert status.status == lr_constants.StatusFlags.FAILED


class TestPipelineDecoder:

    @pytest.mark.asyncio
    async def test_empty_pipeline(self):
        """An empty pipeline succeeds without touching any engine."""
        status = await pipeline_decoder.PipelineDecoder().runPipeline([], None, blackboard.Blackboard(), None, None)
        assert status.status == lr_constants.StatusFlags.SUCCESS

    @pytest.mark.asyncio
    async def test_missing_prerequisite(self, tmp_path):
        """A stage whose prerequisite is neither listed nor stored fails with MISSING_CERTIFICATE."""
        cfl, envg, rsi = await setup_run(tmp_path, stub_library())
        psd = pipeline_decoder.PipelineDecoder()
        status = await psd.runPipeline(["hyperbolicity"], cfl, blackboard.Blackboard(), rsi, envg)
        await envg.close()
        assert status.reason == lr_constants.StatusReason.MISSING_CERTIFICATE
        assert status.message.startswith("hyperbolicity")
        assert psd.results == []

    @pytest.mark.asyncio
    async def test_stages_publish_and_persist(self, tmp_path):
        """Stages publish to the blackboard and write one record per certificate plus a timing sidecar."""
        cfl, envg, rsi = await setup_run(tmp_path, stub_library(), {"family": {"count": 3}})
        board = blackboard.Blackboard()
        psd = pipeline_decoder.PipelineDecoder()
        status = await psd.runPipeline(["hyperbolicity", "family"], cfl, board, rsi, envg)
        await envg.close()
        assert status.status == lr_constants.StatusFlags.SUCCESS, status.message
        assert [name for name, _ in psd.results] == ["family", "hyperbolicity"]
        assert len(board.getBoardVariable(blackboard.FAMILY_CERTIFICATES)) == 3
        assert board.hasBoardVariable(blackboard.HYPERBOLICITY_ANCHOR)
        with open(tmp_path / "family.jsonl") as f:
            assert len(f.read().splitlines()) == 3
        assert os.path.exists(tmp_path / "family.timing.json")
        assert os.path.exists(tmp_path / "hyperbolicity.jsonl")

    @pytest.mark.asyncio
    async def test_restore_from_stream(self, tmp_path):
        """A later run restores the stored family certificates instead of recomputing them."""
        cfl, envg, rsi = await setup_run(tmp_path, stub_library())
        await pipeline_decoder.PipelineDecoder().runPipeline(["family"], cfl, blackboard.Blackboard(), rsi, envg)
        await envg.close()

        cfl, envg, rsi = await setup_run(tmp_path, stub_library(fail_family=True))
        board = blackboard.Blackboard()
        psd = pipeline_decoder.PipelineDecoder()
        status = await psd.runPipeline(["hyperbolicity"], cfl, board, rsi, envg)
        await envg.close()
        assert status.status == lr_constants.StatusFlags.SUCCESS, status.message
        assert [name for name, _ in psd.results] == ["hyperbolicity"]
        assert all(c.verified for c in board.getBoardVariable(blackboard.FAMILY_CERTIFICATES))

    @pytest.mark.asyncio
    async def test_failed_certificates_stop_the_pipeline(self, tmp_path):
        """Unverified certificates are stored but fail the stage; later stages do not run."""
        cfl, envg, rsi = await setup_run(tmp_path, stub_library(fail_family=True))
        psd = pipeline_decoder.PipelineDecoder()
        status = await psd.runPipeline(["family", "hyperbolicity"], cfl, blackboard.Blackboard(), rsi, envg)
        await envg.close()
        assert status.reason == lr_constants.StatusReason.PROOF_FAILURE
        assert "NEWTON_FAILED" in status.message
        assert [name for name, _ in psd.results] == ["family"]
        assert os.path.exists(tmp_path / "family.jsonl")
        assert not os.path.exists(tmp_path / "hyperbolicity.jsonl")

    @pytest.mark.asyncio
    async def test_unverified_stream_is_not_restored(self, tmp_path):
        """Stored certificates must all be verified to satisfy a prerequisite."""
        cfl, envg, rsi = await setup_run(tmp_path, stub_library(fail_family=True))
        await pipeline_decoder.PipelineDecoder().runPipeline(["family"], cfl, blackboard.Blackboard(), rsi, envg)
        await envg.close()

        cfl, envg, rsi = await setup_run(tmp_path, stub_library())
        status = await pipeline_decoder.PipelineDecoder().runPipeline(["hyperbolicity"], cfl, blackboard.Blackboard(), rsi, envg)
        await envg.close()
        assert status.reason == lr_constants.StatusReason.PROOF_FAILURE
        assert "not all verified" in status.message

    @pytest.mark.asyncio
    async def test_transversal_needs_hyperbolicity(self, tmp_path):
        """Without a requested or stored hyperbolicity proof the run stops before any stage."""
        library = stub_library()
        library["fibers"] = {"decoder": __name__ + ".StubDecoder", "src": __name__ + ".StubUnreachable"}
        library["transversal"] = {"decoder": __name__ + ".StubDecoder", "src": __name__ + ".StubUnreachable"}
        cfl, envg, rsi = await setup_run(tmp_path, library)
        psd = pipeline_decoder.PipelineDecoder()
        status = await psd.runPipeline(["family", "fibers", "transversal"], cfl, blackboard.Blackboard(), rsi, envg)
        await envg.close()
        assert status.reason == lr_constants.StatusReason.MISSING_CERTIFICATE
        assert status.message.startswith("transversal")
        assert "hyperbolicity" in status.message
        assert psd.results == []
        assert not os.path.exists(tmp_path / "family.jsonl")

    @pytest.mark.asyncio
    async def test_thread_pool(self, tmp_path):
        """More than one thread gives the stages an ordered map."""
        cfl, envg, rsi = await setup_run(tmp_path, stub_library(), {"threads": 2})
        assert list(envg.mapFunction()(lambda v: v * v, [1, 2, 3])) == [1, 4, 9]
        await envg.close()
        assert envg.pool is None
