import logging
import sys

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from lapa import paths

LOGGING_LEVEL_TO_VALUE = {
    "INFO": 20,
    "DEBUG": 10,
}


class Env(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="LAPA_",
        env_file=paths.DOTENV.as_posix(),
        extra="ignore",
    )

    LOGGING_LEVEL: str = Field(default="INFO")


class LLMSettings(BaseSettings):
    """Chat-completion endpoint settings, read from `LLM_*` environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="LLM_",
        env_file=paths.DOTENV.as_posix(),
        extra="ignore",
    )

    BASE_URL: str = Field(default="https://api.openai.com/v1")
    MODEL: str = Field(default="gpt-4o")
    API_KEY: str | None = Field(default=None)


ENV = Env()

logging.basicConfig(
    format="%(asctime)s %(levelname)s %(module)s:%(lineno)d - %(message)s",
    level=LOGGING_LEVEL_TO_VALUE[ENV.LOGGING_LEVEL.upper()],
    stream=sys.stderr,
)
