"""
Application configuration using Pydantic Settings.
Loads from environment variables with validation.
"""
from functools import lru_cache

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-wide settings with environment variable support."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        populate_by_name=True,
        extra="ignore",
    )

    app_name: str = Field(default="eicsr", alias="EICSR_APP_NAME")
    version: str = Field(default="0.1.0", alias="EICSR_VERSION")
    environment: str = Field(default="development", alias="EICSR_ENVIRONMENT")

    # Logging
    log_level: str = Field(default="INFO", alias="EICSR_LOG_LEVEL")
    log_to_file: bool = Field(default=False, alias="EICSR_LOG_TO_FILE")
    log_dir: str = Field(default="logs", alias="EICSR_LOG_DIR")

    # Performance
    threads: int = Field(default=4, alias="EICSR_THREADS")

    default_seed: int = Field(default=0, alias="EICSR_DEFAULT_SEED")

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Ensure log level is valid."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in valid_levels:
            raise ValueError(f"EICSR_LOG_LEVEL must be one of {valid_levels}")
        return v.upper()

    @field_validator("environment")
    @classmethod
    def validate_environment(cls, v: str) -> str:
        """Ensure environment is valid."""
        valid_envs = ["development", "staging", "production"]
        if v.lower() not in valid_envs:
            raise ValueError(f"EICSR_ENVIRONMENT must be one of {valid_envs}")
        return v.lower()

    @field_validator("threads")
    @classmethod
    def validate_threads(cls, v: int) -> int:
        if v < 1:
            raise ValueError("EICSR_THREADS must be at least 1")
        return v


@lru_cache()
def get_settings() -> Settings:
    """
    Get cached settings instance.

    Settings are read from the environment once and reused by every module.
    """
    return Settings()


settings = get_settings()
