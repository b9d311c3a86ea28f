"""Runtime configuration for the benchmark CLI."""

from core.config.settings import RuntimeSettings

__all__ = ["RuntimeSettings"]
