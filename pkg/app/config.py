"""Process configuration using Pydantic settings, plus experiment config files."""

import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
from pathlib import Path
from typing import Literal, TypeVar, Union

from pydantic import BaseModel, Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.core.errors import ConfigError

ModelT = TypeVar("ModelT", bound=BaseModel)

LOG_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan> - <level>{message}</level>"
)


class Settings(BaseSettings):
    """Process-wide settings.

    Experiment parameters never come from the environment; they live in the
    per-experiment config file. Only where results go and how much is logged
    can be overridden here.
    """

    model_config = SettingsConfigDict(
        env_prefix="PLASMODIUM_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Output settings
    output_dir: Path = Path("./results")

    # Batch settings
    workers: int = Field(default=1, ge=1)

    # Logging
    log_level: Literal["TRACE", "DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"


def read_toml(path: Union[str, Path]) -> dict:
    """
    Parse a TOML file.

    Raises:
        FileNotFoundError: If the file does not exist
        ConfigError: If the file is not valid TOML
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Config file not found: {path}")
    try:
        with path.open("rb") as f:
            return tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e


def load_experiment_config(path: Union[str, Path], model: type[ModelT]) -> ModelT:
    """
    Load and validate an experiment config file.

    Args:
        path: TOML file
        model: Config model to validate into

    Returns:
        Validated config
    """
    data = read_toml(path)
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"{path}: {e}") from e


# Global settings instance
settings = Settings()
