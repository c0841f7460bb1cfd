"""
Configuration management package for GraphLoc
"""

from .settings import Settings, get_settings, settings, ensure_directories, get_config_dir
from .pipeline import (
    ConfigurationError,
    PipelineConfig,
    PipelineConfigLoader,
    build_pipeline_config,
    describe_keys,
    parse_key_values,
    parse_overrides,
    load_pipeline_config,
    get_pipeline_config,
    reload_pipeline_config,
)

__all__ = [
    # Settings
    "Settings",
    "get_settings",
    "settings",
    "ensure_directories",
    "get_config_dir",

    # Pipeline configuration
    "ConfigurationError",
    "PipelineConfig",
    "PipelineConfigLoader",
    "build_pipeline_config",
    "describe_keys",
    "parse_key_values",
    "parse_overrides",
    "load_pipeline_config",
    "get_pipeline_config",
    "reload_pipeline_config",
]
