# src/kripkeu/core/config.py

# 资源上限与运行开关，从包内的 kripkeu.toml 加载

from __future__ import annotations

import os
from typing import Any, Optional

import toml
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError

CONFIG_FILENAME = "kripkeu.toml"


class Limits(BaseModel):
    """Resource caps shared by construction, closure and extension counting."""

    model_config = ConfigDict(frozen=True, extra="ignore")

    max_vars: int = Field(default=4, ge=1)
    max_depth: int = Field(default=8, ge=0)
    node_cap: int = Field(default=5_000_000, ge=1)
    closure_cap: int = Field(default=100_000, ge=1)
    extension_cap: int = Field(default=200_000, ge=1)
    kmax: int = Field(default=6, ge=1)
    memory_cap_mb: int = Field(default=2048, ge=1)
    downset_cap: Optional[int] = Field(default=None, ge=1)


class LoggingSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="ignore")

    console_level: str = "WARNING"
    file_logging: bool = False


class Settings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="ignore")

    limits: Limits = Limits()
    logging: LoggingSettings = LoggingSettings()


def default_config_path() -> str:
    return os.path.join(os.path.dirname(os.path.dirname(__file__)), CONFIG_FILENAME)


def load_settings(path: Optional[str] = None) -> Settings:
    """从 kripkeu.toml 加载配置，失败时回退到默认值"""
    config_path = path or default_config_path()
    if not os.path.exists(config_path):
        logger.warning(f"未找到配置文件，使用默认配置: {config_path}")
        return Settings()
    try:
        raw: dict[str, Any] = toml.load(config_path)
        settings = Settings.model_validate(raw)
        logger.debug(f"从 TOML 加载资源上限: {settings.limits.model_dump()}")
        return settings
    except (toml.TomlDecodeError, ValidationError, OSError) as e:
        logger.error(f"加载 TOML 配置失败: {e}")
        return Settings()


# 执行初始化加载
settings = load_settings()


def get_limits(**overrides: Any) -> Limits:
    """Loaded limits with ``None``-valued overrides ignored."""
    changes = {key: value for key, value in overrides.items() if value is not None}
    if not changes:
        return settings.limits
    return settings.limits.model_copy(update=changes)


__all__ = [
    "Limits",
    "LoggingSettings",
    "Settings",
    "load_settings",
    "get_limits",
    "settings",
]
