"""Process-level settings for Herdflow."""
from __future__ import annotations
from pathlib import Path
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="HERDFLOW_", env_file=".env")

    # Logging
    log_dir: Optional[Path] = None  # file logging is off unless set
    log_level: str = "INFO"

    # Output
    output_dir: Path = Path("out")

    # Thread pool size for paired runs (perturbation studies, optimizer restarts)
    workers: int = 2


def get_settings() -> Settings:
    """Get application settings."""
    return Settings()
