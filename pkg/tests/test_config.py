"""
配置读取与校验测试
"""

import math

import pytest

from focusopt.config import RunConfig, config_schema, default_config, load_config, merge_config
from focusopt.utils.constants import Convention
from focusopt.utils.errors import DomainError
from focusopt.utils.helpers import resolve_workers


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("FOCUSOPT_THREADS", raising=False)
    return tmp_path


class TestDefaults:
    def test_every_field_has_default_slot(self):
        config = default_config()
        assert set(config) == set(config_schema)
        assert config["run"]["r_max"] == pytest.approx(2 * math.pi)
        assert config["oracle"]["eigen_provider"] == "auto"
        assert config["storage"]["enabled"] is False

    def test_defaults_are_independent_copies(self):
        first = default_config()
        first["run"]["d"] = 2
        assert default_config()["run"]["d"] == 3


class TestLoadConfig:
    def test_without_file(self, workdir):
        assert load_config() == default_config()

    def test_precedence(self, workdir, monkeypatch):
        (workdir / "config.toml").write_text('[run]\nkmax = 5\nthreads = 2\nresolution = 32\n', encoding="utf-8")
        monkeypatch.setenv("FOCUSOPT_THREADS", "3")
        config = load_config(overrides={"run": {"resolution": 40, "kmax": None}})
        assert config["run"]["kmax"] == 5
        assert config["run"]["threads"] == 3
        assert config["run"]["resolution"] == 40

    def test_explicit_missing_file(self, workdir):
        with pytest.raises(DomainError):
            load_config(str(workdir / "nope.toml"))

    def test_broken_toml(self, workdir):
        path = workdir / "broken.toml"
        path.write_text("[run\n", encoding="utf-8")
        with pytest.raises(DomainError):
            load_config(str(path))

    def test_bad_choice(self, workdir):
        with pytest.raises(DomainError):
            load_config(overrides={"run": {"convention": "textbook"}})

    def test_bad_type(self, workdir):
        with pytest.raises(DomainError):
            load_config(overrides={"run": {"kmax": 1.5}})
        with pytest.raises(DomainError):
            load_config(overrides={"storage": {"enabled": "yes"}})

    def test_unknown_keys_are_kept(self):
        merged = merge_config(default_config(), {"run": {"colour": "blue"}, "extra": {"a": 1}})
        assert merged["run"]["colour"] == "blue"
        assert merged["extra"] == {"a": 1}


class TestRunConfig:
    def test_from_defaults(self):
        run = RunConfig.from_config(default_config())
        assert run.convention is Convention.ORACLE_CONSISTENT
        assert run.resolution == 24

    @pytest.mark.parametrize("changes", [
        {"d": 1},
        {"r_min": 0.0},
        {"r_step": -0.1},
        {"r_min": 2.0, "r_max": 1.0},
        {"kmax": -1},
        {"resolution": 6},
        {"format": "xml"},
        {"convention": "other"},
    ])
    def test_rejects(self, changes):
        with pytest.raises(DomainError):
            RunConfig(**changes)


class TestWorkers:
    def test_config_wins_over_env(self, monkeypatch):
        monkeypatch.setenv("FOCUSOPT_THREADS", "6")
        assert resolve_workers({"run": {"threads": 2}}) == 2
        assert resolve_workers({"run": {"threads": None}}) == 6

    def test_bad_env(self, monkeypatch):
        monkeypatch.setenv("FOCUSOPT_THREADS", "many")
        with pytest.raises(DomainError):
            resolve_workers({})
