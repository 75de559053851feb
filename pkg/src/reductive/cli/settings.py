import logging
from functools import lru_cache
from pathlib import Path

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(name)s - %(message)s"


class Settings(BaseSettings):
    """Command-line defaults loaded from environment variables or `.env` file."""

    log_level: str = Field(default="INFO", description="Logging level")
    threads: int = Field(default=1, ge=1, description="Worker threads for simulation studies")
    output_dir: Path = Field(default=Path("results"), description="Where outputs are written")
    data_dir: Path = Field(default=Path("data"), description="Where worked datasets live")
    default_seed: int = Field(default=0, ge=0, description="Seed when --seed is not given")
    default_reps: int = Field(default=100, ge=1, description="Replications when --reps is not given")

    model_config = {
        "env_prefix": "REDUCTIVE_",
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "extra": "ignore",
    }

    @field_validator("log_level", mode="after")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        level = v.upper()
        # getLevelNamesMapping() is 3.11+; it returns a copy of _nameToLevel.
        names = getattr(logging, "getLevelNamesMapping", lambda: dict(logging._nameToLevel))()
        if level not in names:
            raise ValueError(f"unknown log level {v!r}")
        return level


@lru_cache
def get_settings() -> Settings:  # pragma: no cover
    """Return a cached instance of Settings."""
    s = Settings()
    logging.basicConfig(level=s.log_level, format=LOG_FORMAT)
    logger = logging.getLogger(__name__)

    logger.info("=" * 60)
    logger.info("Reductive settings")
    logger.info("=" * 60)
    logger.info(f"Threads: {s.threads}")
    logger.info(f"Output dir: {s.output_dir}")
    logger.info(f"Data dir: {s.data_dir}")
    logger.info(f"Default seed: {s.default_seed}, default reps: {s.default_reps}")
    logger.info("=" * 60)
    return s
