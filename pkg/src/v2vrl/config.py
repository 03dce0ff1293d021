"""Flat key-value configuration for the simulator, trainer, and harness.

The on-disk format is one `key = value` per line with `#` comments, so configs
stay diff-friendly and language-agnostic. Every key has a default; unknown
keys are rejected. Lists are comma-separated.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigError


@dataclass
class SimConfig:
    # road layout
    layout: str = "manhattan"           # "manhattan" | "highway"
    blocks_x: int = 4
    blocks_y: int = 4
    block_w_m: float = 250.0
    block_h_m: float = 433.0
    highway_len_m: float = 1000.0

    # scenario
    n_vehicles: int = 20                # one V2V agent per vehicle
    subbands: int = 4                   # M
    power_levels_dbm: list[float] = field(default_factory=lambda: [23.0, 10.0, 5.0])
    v2i_power_dbm: float = 10.0
    noise_dbm: float = -114.0           # thermal noise over one sub-band
    bandwidth_hz_per_subband: float = 1e6
    shadow_sigma_v2v_db: float = 3.0
    shadow_sigma_v2i_db: float = 8.0    # links terminating at the base station
    slot_ms: float = 1.0
    budget_slots: int = 100             # latency budget T
    payload_bits: float = 135680.0      # 16 x 1060 bytes
    c_ref_bps: float = 1e7              # reward normalizing capacity
    w_i: float = 1.0
    w_v: float = 1.0
    w_t: float = 1.0
    r_success: float = 1.0
    r_fail: float = 2.0
    neighbors: int = 3                  # tracked nearby transmitters in B_{t-1}

    # deterministic-channel switches (micro-instances and the search oracle)
    freeze_fading: bool = False         # force every fast-fading factor to 1
    freeze_geometry_seed: int = -1      # >= 0: identical vehicle drop every episode

    # trainer
    episodes: int = 2000
    gamma: float = 0.95
    eps_start: float = 1.0
    eps_end: float = 0.02
    eps_anneal_frac: float = 0.8
    target_sync_steps: int = 500
    lr: float = 1e-3
    batch: int = 64
    replay_capacity: int = 100000
    hidden_dims: list[int] = field(default_factory=lambda: [64, 32])

    # harness
    seed: int = 1
    eval_episodes: int = 200
    output_path: str = "results.csv"

    def validate(self) -> "SimConfig":
        def fail(key, msg):
            raise ConfigError(f"config key '{key}': {msg}")

        if self.layout not in ("manhattan", "highway"):
            fail("layout", f"must be 'manhattan' or 'highway', got {self.layout!r}")
        if self.blocks_x < 1 or self.blocks_y < 1:
            fail("blocks_x/blocks_y", "need at least one block in each direction")
        for key in ("block_w_m", "block_h_m", "highway_len_m", "bandwidth_hz_per_subband",
                    "slot_ms", "payload_bits", "c_ref_bps", "lr"):
            if getattr(self, key) <= 0:
                fail(key, "must be > 0")
        if self.n_vehicles < 2:
            fail("n_vehicles", "need at least one V2V pair")
        if self.subbands < 1:
            fail("subbands", "must be >= 1")
        if not self.power_levels_dbm:
            fail("power_levels_dbm", "must list at least one power level")
        for key in ("shadow_sigma_v2v_db", "shadow_sigma_v2i_db"):
            if getattr(self, key) < 0:
                fail(key, "must be >= 0")
        if self.budget_slots < 1:
            fail("budget_slots", "must be >= 1")
        if self.neighbors < 1:
            fail("neighbors", "must be >= 1")
        if not 0.0 <= self.gamma < 1.0:
            fail("gamma", "must satisfy 0 <= gamma < 1")
        if not 0.0 <= self.eps_end <= self.eps_start <= 1.0:
            fail("eps_start/eps_end", "must satisfy 0 <= eps_end <= eps_start <= 1")
        if not 0.0 < self.eps_anneal_frac <= 1.0:
            fail("eps_anneal_frac", "must lie in (0, 1]")
        if self.episodes < 0:
            fail("episodes", "must be >= 0")
        for key in ("target_sync_steps", "batch", "replay_capacity", "eval_episodes"):
            if getattr(self, key) < 1:
                fail(key, "must be >= 1")
        for h in self.hidden_dims:
            if h < 1:
                fail("hidden_dims", "hidden layer sizes must be >= 1")
        if self.freeze_geometry_seed < -1:
            fail("freeze_geometry_seed", "must be -1 (off) or a seed >= 0")
        return self

    # -- flat-file I/O --------------------------------------------------

    @classmethod
    def from_dict(cls, raw: dict) -> "SimConfig":
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, text in raw.items():
            if key not in known:
                raise ConfigError(f"unknown config key '{key}'")
            kwargs[key] = _parse_value(key, text, getattr(cls(), key))
        return cls(**kwargs).validate()

    @classmethod
    def from_file(cls, path) -> "SimConfig":
        raw = {}
        for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = stripped.partition("=")
            raw[key.strip()] = value.strip()
        return cls.from_dict(raw)

    def to_file(self, path) -> None:
        lines = [f"{f.name} = {_format_value(getattr(self, f.name))}" for f in fields(self)]
        Path(path).write_text("\n".join(lines) + "\n")

    def with_overrides(self, **kwargs) -> "SimConfig":
        return replace(self, **kwargs).validate()


def _parse_value(key: str, text, default):
    """Convert the raw string to the type of the field's default."""
    if not isinstance(text, str):  # already typed (from_dict with literals)
        return text
    try:
        if isinstance(default, bool):
            low = text.lower()
            if low not in ("true", "false"):
                raise ValueError("expected true/false")
            return low == "true"
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, list):
            elem = float if default and isinstance(default[0], float) else int
            return [elem(part.strip()) for part in text.split(",") if part.strip()]
        return text
    except ValueError as exc:
        raise ConfigError(f"config key '{key}': cannot parse {text!r} ({exc})") from exc


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)
