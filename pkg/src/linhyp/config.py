"""Run configuration: defaults, optional key=value file, LINHYP_THREADS override."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

from .errors import InputError
from .exact import CENSUS_CAP, DFS_NODE_CAP

DEFAULT_SEED = 20240611
OUTPUTS = ("json", "csv", "text")


@dataclass(frozen=True)
class RunConfig:
    threads: int = 1
    seed: int = DEFAULT_SEED
    tolerance_multiplier: float = 5.0
    z: float = 3.0
    dfs_node_cap: int = DFS_NODE_CAP
    census_cap: int = CENSUS_CAP
    output: str = "json"

    def __post_init__(self):
        if self.threads < 1:
            raise InputError("threads must be >= 1")
        if not self.tolerance_multiplier > 0:
            raise InputError("tolerance_multiplier must be > 0")
        if self.output not in OUTPUTS:
            raise InputError(f"output must be one of {', '.join(OUTPUTS)}")
        if not 0 <= self.seed < 2**64:
            raise InputError("seed must fit in 64 bits")


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, raw: str):
    kind = _TYPES[key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise InputError(f"config key {key}: cannot parse {raw!r}") from None
    return raw


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputError(f"config line {lineno}: expected key=value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _TYPES:
            raise InputError(f"config line {lineno}: unknown key {key!r}")
        out[key] = _coerce(key, raw)
    return out


def env_threads() -> int | None:
    raw = os.environ.get("LINHYP_THREADS")
    if raw is None or raw == "":
        return None
    try:
        val = int(raw)
    except ValueError:
        raise InputError(f"LINHYP_THREADS={raw!r} is not an integer") from None
    if val < 1:
        raise InputError("LINHYP_THREADS must be >= 1")
    return val


def load_config(path: str | None = None, **overrides) -> RunConfig:
    """Defaults < config file < explicit overrides; LINHYP_THREADS beats everything for threads."""
    values: dict = {"threads": os.cpu_count() or 1}
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                values.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise InputError(f"cannot read config {path}: {exc}") from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    t = env_threads()
    if t is not None:
        values["threads"] = t
    return replace(RunConfig(), **values)
