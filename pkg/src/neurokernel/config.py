"""Key-value configuration files.

Format: one ``key = value`` pair per line, '#' starts a comment. Values
are integers; ``large_page_classes`` takes a comma-separated list. The
CLI looks for a path in --config first, then the NEUROKERNEL_CONFIG
environment variable.

Recognized keys: pool_bytes, block_bytes, large_page_classes, block_size,
worker_count, deprioritize_threshold, batch_size, quantum.
"""

from __future__ import annotations

import os
from pathlib import Path

from .errors import InvalidArgument
from .mempool import PoolConfig

ENV_VAR = "NEUROKERNEL_CONFIG"

_LIST_KEYS = {"large_page_classes"}


def parse_config(text: str) -> dict:
    values: dict[str, int | tuple[int, ...]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InvalidArgument(f"config line {lineno}: expected 'key = value'")
        key = key.strip()
        value = value.strip()
        try:
            if key in _LIST_KEYS:
                values[key] = tuple(int(part.strip()) for part in value.split(","))
            else:
                values[key] = int(value)
        except ValueError:
            raise InvalidArgument(
                f"config line {lineno}: {key} needs integer value(s), got {value!r}"
            ) from None
    return values


def load_config(path: str | Path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise InvalidArgument(f"config file {path} does not exist")
    return parse_config(path.read_text(encoding="utf-8"))


def resolve_config(cli_path: str | None) -> dict:
    """CLI flag wins over the environment variable; absent both is empty."""
    path = cli_path or os.environ.get(ENV_VAR)
    return load_config(path) if path else {}


def pool_config_from(values: dict) -> PoolConfig:
    kwargs = {}
    if "pool_bytes" in values:
        kwargs["pool_bytes"] = values["pool_bytes"]
    if "block_bytes" in values:
        kwargs["block_bytes"] = values["block_bytes"]
    if "large_page_classes" in values:
        kwargs["large_page_classes"] = values["large_page_classes"]
    return PoolConfig(**kwargs)
