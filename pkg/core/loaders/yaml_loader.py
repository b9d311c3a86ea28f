from __future__ import annotations

from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import Any

import yaml

from core.utils.errors import ValidationError

# file keys that name a CLI parameter differently
KEY_ALIASES = {
    "lambda": "lambda_",
    "lambdas": "lambda_",
    "n_train": "n",
    "repetitions": "reps",
    "pipelines": "pipeline",
    "bands": "band",
    "master_seed": "seed",
}


def normalize_key(key: str) -> str:
    k = str(key).strip().lstrip("-").replace("-", "_")
    return KEY_ALIASES.get(k, k)


def load_run_config(path: Path | str) -> dict[str, Any]:
    """Read a YAML mapping of flag name -> value, keys normalized to CLI parameter names."""
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ValidationError(f"config file {path} is not valid YAML: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValidationError(f"config file {path} must hold a mapping, got {type(data).__name__}")
    out: dict[str, Any] = {}
    for key, value in data.items():
        name = normalize_key(key)
        if name in out:
            raise ValidationError(f"config file {path} sets {name!r} more than once")
        out[name] = value
    return out


def _same(a: Any, b: Any) -> bool:
    if isinstance(a, list | tuple) and isinstance(b, list | tuple):
        return len(a) == len(b) and all(_same(x, y) for x, y in zip(a, b, strict=True))
    if isinstance(a, int | float) and isinstance(b, int | float):
        return float(a) == float(b)
    return str(a) == str(b)


def merge_run_config(
    cli_values: Mapping[str, Any],
    file_values: Mapping[str, Any],
    explicit: Iterable[str],
    list_params: Iterable[str] = (),
) -> dict[str, Any]:
    """Overlay file values on CLI defaults.

    Keys must name a known parameter. A key the user also passed explicitly on
    the command line must carry the same value, otherwise the run is refused.
    """
    explicit = set(explicit)
    list_params = set(list_params)
    merged = dict(cli_values)
    for name, value in file_values.items():
        if name not in cli_values:
            raise ValidationError(
                f"unknown config key {name!r}; known keys: {sorted(k for k in cli_values if k != 'config')}"
            )
        if name in list_params and not isinstance(value, list | tuple):
            value = [value]
        if name in explicit and not _same(cli_values[name], value):
            raise ValidationError(
                f"config key {name!r}={value!r} conflicts with command-line value {cli_values[name]!r}"
            )
        merged[name] = value
    return merged
