"""
验证套件测试
"""

import json

import pytest

from focusopt.cli import main
from focusopt.config import default_config
from focusopt.services.verify_service import VerifyService, run_id_for
from focusopt.utils.errors import EXIT_OK


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("FOCUSOPT_THREADS", raising=False)
    return tmp_path


def run_verify(workdir, monkeypatch, threads):
    monkeypatch.setenv("FOCUSOPT_THREADS", threads)
    path = workdir / f"verify_{threads}.json"
    code = main(["verify", "--format", "json", "--out", str(path)])
    return code, path.read_bytes()


class TestRunId:
    def test_ignores_threads_logging_and_storage(self):
        base = default_config()
        other = default_config()
        other["run"]["threads"] = 8
        other["logging"]["level"] = "DEBUG"
        other["storage"] = {"enabled": True, "db_path": "elsewhere.db"}
        assert run_id_for(base) == run_id_for(other)

    def test_tracks_computation_settings(self):
        base = default_config()
        finer = default_config()
        finer["run"]["resolution"] = 32
        seeded = default_config()
        seeded["oracle"]["seed"] = base["oracle"]["seed"] + 1
        assert len({run_id_for(base), run_id_for(finer), run_id_for(seeded)}) == 3


class TestReportBytes:
    def test_report_independent_of_threads(self, workdir, monkeypatch):
        monkeypatch.setattr(VerifyService, "suites", lambda self: [self.check_bessel, self.check_quadrature])
        first = run_verify(workdir, monkeypatch, "1")
        second = run_verify(workdir, monkeypatch, "2")
        assert first[0] == second[0] == EXIT_OK
        assert first[1] == second[1]
        report = json.loads(first[1])
        assert report["passed"] and report["summary"]["fail"] == 0

    @pytest.mark.slow
    def test_full_verify_passes_and_is_reproducible(self, workdir, monkeypatch):
        first = run_verify(workdir, monkeypatch, "1")
        second = run_verify(workdir, monkeypatch, "2")
        assert first[0] == second[0] == EXIT_OK
        assert first[1] == second[1]
        report = json.loads(first[1])
        ids = [check["id"] for check in report["checks"]]
        assert "fields.rotation_equivariance" in ids
        assert "far_field.ell_decay" in ids
        assert all(check["status"] != "fail" for check in report["checks"])
