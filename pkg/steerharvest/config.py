import os

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="STEERHARVEST_",
        extra="ignore",
    )

    log_level: str = "INFO"
    log_dir: str = "LOG"
    archive_runs: bool = True
    threads: int = 0
    default_coupling: float = 0.1
    small_separation_threshold: float = 1e-4
    large_separation_threshold: float = 6.0
    perturbative_warning_level: float = 0.01
    oracle_tolerance: float = 1e-3

    def worker_count(self) -> int:
        if self.threads > 0:
            return self.threads
        return os.cpu_count() or 1


settings = Settings()
