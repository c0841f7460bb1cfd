"""
Process settings for GraphLoc
"""

from pathlib import Path
from typing import Literal, Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process settings loaded from environment variables and .env file"""

    model_config = SettingsConfigDict(
        env_prefix="GRAPHLOC_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    debug: bool = Field(default=False, description="Debug mode")

    # Logging Configuration
    log_level: str = Field(default="INFO", description="Logging level")
    log_format: Literal["json", "text"] = Field(default="text", description="Log format: json or text")
    log_file: Optional[str] = Field(default=None, description="Log file path; console only when unset")
    log_max_size: int = Field(default=10485760, description="Max log file size in bytes")
    log_backup_count: int = Field(default=5, description="Number of log backup files")

    # Pipeline defaults
    default_config: Optional[str] = Field(default=None, description="Pipeline config used when --config is absent")

    @property
    def log_file_path(self) -> Optional[Path]:
        """Get log file path as Path object"""
        return Path(self.log_file) if self.log_file else None


# Global settings instance
settings = Settings()


def get_settings() -> Settings:
    """Get process settings instance"""
    return settings


def get_project_root() -> Path:
    """Get project root directory"""
    return Path(__file__).parent.parent.parent


def get_config_dir() -> Path:
    """Get configuration directory"""
    return get_project_root() / "config"


def ensure_directories(*extra: Path) -> None:
    """Ensure log and output directories exist"""
    directories = list(extra)
    if settings.log_file_path:
        directories.append(settings.log_file_path.parent)

    for directory in directories:
        Path(directory).mkdir(parents=True, exist_ok=True)
