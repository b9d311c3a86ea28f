"""
Runtime settings read from the environment.

Command-line flags win over these; they only supply defaults.
"""

from __future__ import annotations

from dataclasses import dataclass

from core.utils.env import env_bool, env_int, env_str


@dataclass
class RuntimeSettings:
    """Process-level defaults for the benchmark CLI."""

    jobs: int = 1
    log_level: str = "WARNING"
    record_timings: bool = False

    @classmethod
    def from_env(cls) -> RuntimeSettings:
        """Load runtime settings from MDWM_* environment variables."""
        return cls(
            jobs=max(1, env_int("MDWM_JOBS", 1)),
            log_level=env_str("MDWM_LOG_LEVEL", "WARNING").upper(),
            record_timings=env_bool("MDWM_TIMINGS"),
        )
