"""Loading and validating simulation config files.

Configs are TOML.  The grammar is fixed: optional top-level ``name``,
``rate`` and ``description`` keys, a required ``[codec]`` table whose
``family`` key selects the code family (the remaining keys are that
family's parameters), and a ``[sim]`` table::

    name = "r0500_polar_ga"
    rate = 0.5

    [codec]
    family = "polar"
    N = 1024
    K = 512
    construction = "GA"
    crc_len = 16
    list_size = 32
    design_snr_db = 2.0

    [sim]
    snr_db = [1.5, 2.0, 2.5]
    max_frames = 10000000
    min_frame_errors = 100
    seed = 1

Every rejected file produces a ``ConfigError`` whose text starts with
``path:line: table.key:`` so the offending field can be found directly.
"""
from __future__ import annotations

import os
import re
from importlib import resources
from pathlib import Path

import tomli

from .codecs import CodecSpec, ConfigError
from .sim import SimConfig

PRESET_DIR_ENV = "ONEBITFEC_PRESET_DIR"

_TOP_KEYS = ("name", "rate", "description", "codec", "sim")
_SIM_KEYS = {"snr_db": list, "max_frames": int, "min_frame_errors": int, "seed": int,
             "workers": int, "batch_size": int, "fer_floor": float}


def preset_dir() -> Path:
    env = os.environ.get(PRESET_DIR_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("onebitfec") / "presets"))


def list_presets(directory: Path | None = None) -> list[str]:
    d = Path(directory) if directory else preset_dir()
    return sorted(p.stem for p in d.glob("*.toml"))


def find_preset(name: str, directory: Path | None = None) -> Path:
    d = Path(directory) if directory else preset_dir()
    path = d / f"{name}.toml"
    if not path.is_file():
        raise ConfigError(f"no preset named {name!r} in {d}")
    return path


def _key_line(text: str, table: str | None, key: str | None) -> int:
    """1-based line of ``key`` inside ``[table]`` (or of the header); 0 if absent."""
    current = None
    header_line = 0
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"\[\s*([A-Za-z0-9_.-]+)\s*\]", s)
        if m:
            current = m.group(1)
            if current == table:
                header_line = i
            continue
        if current == table and key and re.match(rf"{re.escape(key)}\s*=", s):
            return i
    return header_line


class _Located:
    """Builds ConfigErrors that carry ``source:line: field:`` prefixes."""

    def __init__(self, text: str, source: str):
        self.text, self.source = text, source

    def error(self, table: str | None, key: str | None, msg: str) -> ConfigError:
        line = _key_line(self.text, table, key) if self.text else 0
        where = f"{self.source}:{line}" if line else self.source
        name = ".".join(p for p in (table, key) if p) or "<root>"
        return ConfigError(f"{where}: {name}: {msg}", name)


def parse_config(text: str, source: str = "<config>") -> dict:
    try:
        return tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: syntax error: {exc}") from exc


def load_config(path, overrides: dict | None = None) -> SimConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read: {exc.strerror}") from exc
    return config_from_text(text, str(path), overrides)


def config_from_text(text: str, source: str = "<config>",
                     overrides: dict | None = None) -> SimConfig:
    return config_from_dict(parse_config(text, source), source, overrides, text)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def config_from_dict(data: dict, source: str = "<config>", overrides: dict | None = None,
                     text: str = "") -> SimConfig:
    loc = _Located(text, source)
    for key in data:
        if key not in _TOP_KEYS:
            raise loc.error(None, key, "unknown top-level key")
    if "name" in data and not isinstance(data["name"], str):
        raise loc.error(None, "name", "must be a string")
    if "rate" in data and not _is_number(data["rate"]):
        raise loc.error(None, "rate", "must be a number")

    codec = data.get("codec")
    if not isinstance(codec, dict):
        raise loc.error("codec", None, "missing [codec] table")
    params = dict(codec)
    family = params.pop("family", None)
    if family is None:
        raise loc.error("codec", "family", "required key is missing")
    try:
        spec = CodecSpec(family, params)
    except ConfigError as exc:
        raise loc.error("codec", exc.field, str(exc)) from exc

    sim = data.get("sim", {})
    if not isinstance(sim, dict):
        raise loc.error(None, "sim", "must be a table")
    sim = dict(sim)
    for key, val in sim.items():
        typ = _SIM_KEYS.get(key)
        if typ is None:
            raise loc.error("sim", key, "unknown key")
        good = _is_number(val) if typ is float else isinstance(val, typ) and not isinstance(val, bool)
        if not good:
            raise loc.error("sim", key, f"must be {typ.__name__}, got {val!r}")
    grid = sim.get("snr_db")
    if not grid:
        raise loc.error("sim", "snr_db", "must be a non-empty list")
    if not all(_is_number(s) for s in grid):
        raise loc.error("sim", "snr_db", "entries must be numbers")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise loc.error("sim", "snr_db", "must be strictly increasing")
    for key in ("max_frames", "min_frame_errors", "workers", "batch_size"):
        if key in sim and sim[key] < 1:
            raise loc.error("sim", key, "must be positive")
    if overrides:
        sim.update({k: v for k, v in overrides.items() if v is not None})
    grid = sim.pop("snr_db")
    try:
        return SimConfig(spec, grid, label=str(data.get("name", "")),
                         extra={k: data[k] for k in ("rate", "description") if k in data}, **sim)
    except ValueError as exc:
        raise loc.error("sim", None, str(exc)) from exc
