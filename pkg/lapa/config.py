"""Run configuration. Precedence: CLI flags > LAPA_* environment > TOML config file > defaults."""
import logging
import os
from datetime import datetime
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, Field, ValidationError, model_validator
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    TomlConfigSettingsSource,
)

from lapa import paths
from lapa.errors import ConfigError
from lapa.ingest import ExerciseWindow
from lapa.taxonomy import DEFAULT_FUZZY_THRESHOLD

logger = logging.getLogger(__name__)

Backend = Literal["api", "rules", "replay"]

CONFIG_FILE_ENV = "LAPA_CONFIG_FILE"


class StageBoundary(BaseModel):
    label: str = Field(min_length=1)
    start: datetime

    @classmethod
    def parse(cls, raw: str) -> "StageBoundary":
        """Parse `LABEL=YYYY-MM-DDTHH:MM:SS`."""
        label, sep, start = raw.partition("=")
        if not sep:
            raise ConfigError(f"Stage must look like LABEL=ISO-TIMESTAMP, got {raw!r}")
        try:
            return cls(label=label.strip(), start=datetime.fromisoformat(start.strip()))
        except ValueError as e:
            raise ConfigError(f"Invalid stage {raw!r}: {e}") from e


class RunConfig(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="LAPA_", extra="ignore")

    notes_dir: Path | None = None
    psychometrics: Path | None = None
    catalog: Path = paths.BUNDLED_CATALOG
    cache_dir: Path | None = None
    output_dir: Path = Path("out")
    backend: Backend = "api"
    max_inflight: int = Field(default=4, ge=1)
    context_window: int = Field(default=2, ge=0)
    fuzzy_threshold: float = Field(default=DEFAULT_FUZZY_THRESHOLD, gt=0, le=1)
    alpha: float = Field(default=0.05, gt=0, lt=1)
    strict: bool = False
    allow_partial: bool = False
    stages: list[StageBoundary] = Field(default_factory=list)
    exercise_start: datetime | None = None
    exercise_end: datetime | None = None
    config_file: Path | None = None

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        sources: list[PydanticBaseSettingsSource] = [init_settings, env_settings]
        config_file = getattr(init_settings, "init_kwargs", {}).get("config_file") or os.environ.get(CONFIG_FILE_ENV)
        if config_file:
            config_path = Path(config_file)
            if not config_path.is_file():
                raise ConfigError(f"Config file not found: {config_path.as_posix()}")
            sources.append(TomlConfigSettingsSource(settings_cls, toml_file=config_path))
        return tuple(sources)

    @model_validator(mode="after")
    def _check_window(self) -> "RunConfig":
        if self.exercise_start and self.exercise_end and self.exercise_start > self.exercise_end:
            raise ValueError("exercise_start must not be after exercise_end")
        labels = [stage.label for stage in self.stages]
        if len(set(labels)) != len(labels):
            raise ValueError(f"stage labels must be unique, got {labels}")
        return self

    @property
    def window(self) -> ExerciseWindow | None:
        if self.exercise_start is None and self.exercise_end is None:
            return None
        return ExerciseWindow(start=self.exercise_start, end=self.exercise_end)

    @property
    def report_dir(self) -> Path:
        return self.output_dir / "report"

    def stage_file(self, name: str) -> Path:
        return self.output_dir / name

    def require_file(self, path: Path | None, what: str) -> Path:
        if path is None:
            raise ConfigError(f"Missing required setting: {what}")
        if not path.is_file():
            raise ConfigError(f"{what} not found: {path.as_posix()}")
        return path

    def require_dir(self, path: Path | None, what: str) -> Path:
        if path is None:
            raise ConfigError(f"Missing required setting: {what}")
        if not path.is_dir():
            raise ConfigError(f"{what} not found: {path.as_posix()}")
        return path


def load_run_config(**overrides: Any) -> RunConfig:
    """Build a RunConfig from explicit overrides (CLI flags), the environment and an optional TOML file."""
    try:
        config = RunConfig(**overrides)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}") from e
    logger.debug(f"Run configuration: {config}")
    return config
