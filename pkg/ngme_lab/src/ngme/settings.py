"""
Runtime configuration, read from ``NGME_*`` environment variables.
"""
from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class NgmeSettings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="NGME_", extra="ignore")

    ledger_path: str = "discrepancies.jsonl"  # NGME_LEDGER_PATH
    seed: int = 0xC0FFEE
    restarts: int = Field(default=64, ge=1)
    max_sweeps: int = Field(default=500, ge=1)
    sweep_tol: float = 1e-12
    max_dimension: int = Field(default=4096, ge=2)
    max_grid_points: int = Field(default=100_000, ge=1)
    workers: int = Field(default=4, ge=1)
    log_level: str = "WARNING"


@lru_cache
def get_settings() -> NgmeSettings:
    return NgmeSettings()
