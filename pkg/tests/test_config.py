from datetime import datetime
from pathlib import Path

import pytest

from lapa import paths
from lapa.config import RunConfig, StageBoundary, load_run_config
from lapa.errors import ConfigError


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "lapa.toml"
    path.write_text(
        'backend = "rules"\n'
        "alpha = 0.1\n"
        "max_inflight = 2\n"
        "\n"
        "[[stages]]\n"
        'label = "recon"\n'
        "start = 2024-06-01T09:00:00\n",
        encoding="utf-8",
    )
    return path


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("LAPA_ALPHA", "LAPA_BACKEND", "LAPA_MAX_INFLIGHT", "LAPA_CONFIG_FILE"):
        monkeypatch.delenv(name, raising=False)


class TestLoadRunConfig:
    def test_load_run_config__defaults(self):
        config = load_run_config()

        assert config.backend == "api"
        assert config.alpha == 0.05
        assert config.catalog == paths.BUNDLED_CATALOG
        assert config.report_dir == Path("out") / "report"
        assert config.window is None

    def test_load_run_config__file_values(self, config_file):
        config = load_run_config(config_file=config_file)

        assert config.backend == "rules"
        assert config.alpha == 0.1
        assert config.stages == [StageBoundary(label="recon", start=datetime(2024, 6, 1, 9, 0, 0))]

    def test_load_run_config__env_beats_file(self, monkeypatch, config_file):
        monkeypatch.setenv("LAPA_ALPHA", "0.01")

        config = load_run_config(config_file=config_file)

        assert config.alpha == 0.01
        assert config.max_inflight == 2

    def test_load_run_config__flags_beat_env(self, monkeypatch, config_file):
        monkeypatch.setenv("LAPA_ALPHA", "0.01")

        config = load_run_config(config_file=config_file, alpha=0.2)

        assert config.alpha == 0.2

    def test_load_run_config__file_named_by_env(self, monkeypatch, config_file):
        monkeypatch.setenv("LAPA_CONFIG_FILE", str(config_file))

        config = load_run_config()

        assert config.backend == "rules"
        assert config.max_inflight == 2
        assert config.config_file == config_file

    def test_load_run_config__env_file_missing(self, monkeypatch, tmp_path):
        monkeypatch.setenv("LAPA_CONFIG_FILE", str(tmp_path / "missing.toml"))

        with pytest.raises(ConfigError, match="missing.toml"):
            load_run_config()

    def test_load_run_config__missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_run_config(config_file=tmp_path / "missing.toml")

    @pytest.mark.parametrize(
        "overrides",
        [
            {"alpha": 1.5},
            {"max_inflight": 0},
            {"backend": "mystery"},
            {"exercise_start": datetime(2024, 6, 2), "exercise_end": datetime(2024, 6, 1)},
        ],
    )
    def test_load_run_config__invalid(self, overrides):
        with pytest.raises(ConfigError, match="Invalid configuration"):
            load_run_config(**overrides)

    def test_load_run_config__duplicate_stage_labels(self):
        stages = [StageBoundary.parse("recon=2024-06-01T09:00:00"), StageBoundary.parse("recon=2024-06-01T10:00:00")]

        with pytest.raises(ConfigError):
            load_run_config(stages=stages)


class TestRunConfig:
    def test_require_file__missing(self, tmp_path):
        config = load_run_config(output_dir=tmp_path)

        with pytest.raises(ConfigError, match="psychometrics file not found"):
            config.require_file(tmp_path / "psychometrics.csv", "psychometrics file")

    def test_require_file__unset(self):
        with pytest.raises(ConfigError, match="Missing required setting"):
            RunConfig().require_file(None, "psychometrics file")

    def test_window(self):
        config = load_run_config(exercise_start=datetime(2024, 6, 1))

        assert datetime(2024, 6, 1, 12) in config.window
        assert datetime(2024, 5, 31) not in config.window


class TestStageBoundary:
    def test_parse(self):
        stage = StageBoundary.parse(" lateral = 2024-06-01T13:30:00")

        assert stage.label == "lateral"
        assert stage.start == datetime(2024, 6, 1, 13, 30)

    @pytest.mark.parametrize("raw", ["recon", "recon=yesterday", "=2024-06-01T09:00:00"])
    def test_parse__invalid(self, raw):
        with pytest.raises(ConfigError):
            StageBoundary.parse(raw)
