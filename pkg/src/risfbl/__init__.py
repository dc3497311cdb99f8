"""Joint power, blocklength and RIS phase allocation for short-packet downlinks."""
from .config import ConfigError, SystemConfig, load_config, save_config

__version__ = "0.1.0"

__all__ = ["ConfigError", "SystemConfig", "load_config", "save_config"]
