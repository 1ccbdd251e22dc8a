"""Scenario models and the YAML/JSON scenario loader."""

from __future__ import annotations

import json
import os
import re
from pathlib import Path
from typing import Annotated, Any, Literal

import yaml
from pydantic import (
    BaseModel,
    Field,
    ValidationError,
    ValidationInfo,
    field_validator,
    model_validator,
)

from lwasim.channel.ethernet import DEFAULT_ETHERTYPE, parse_mac

SEED_ENV_VAR = "LWASIM_SEED"


class ConfigError(ValueError):
    """Invalid scenario; ``field_path`` points at the offending setting."""

    def __init__(self, field_path: str, message: str):
        self.field_path = field_path
        self.message = message
        super().__init__(f"{field_path}: {message}" if field_path else message)

    @classmethod
    def from_validation_error(cls, exc: ValidationError) -> ConfigError:
        first = exc.errors()[0]
        path = ".".join(str(part) for part in first["loc"])
        return cls(path, first["msg"])


# --- delays -----------------------------------------------------------------


class ConstantDelayConfig(BaseModel):
    kind: Literal["constant"] = "constant"
    delay_ms: float = Field(default=0.0, ge=0)


class TriangularDelayConfig(BaseModel):
    """LTE one-way delay: half the measured RTT, symmetric jitter."""

    kind: Literal["triangular"] = "triangular"
    mean_ms: float = Field(default=2.73, ge=0)
    jitter_ms: float = Field(default=0.7, ge=0)

    @model_validator(mode="after")
    def _jitter_below_mean(self) -> TriangularDelayConfig:
        if self.jitter_ms > self.mean_ms:
            raise ValueError("jitter_ms must not exceed mean_ms")
        return self


class LogNormalDelayConfig(BaseModel):
    """WiFi one-way delay: shifted log-normal truncated at ``tail_max_ms``."""

    kind: Literal["lognormal"] = "lognormal"
    min_ms: float = Field(default=0.43, ge=0)
    mode_ms: float = 1.6
    tail_max_ms: float = 15.2
    sigma: float = Field(default=0.5, gt=0)

    @model_validator(mode="after")
    def _ordered(self) -> LogNormalDelayConfig:
        if not self.min_ms < self.mode_ms < self.tail_max_ms:
            raise ValueError("need min_ms < mode_ms < tail_max_ms")
        return self


DelayConfig = Annotated[
    ConstantDelayConfig | TriangularDelayConfig | LogNormalDelayConfig,
    Field(discriminator="kind"),
]


# --- links ------------------------------------------------------------------


class CapacityWindow(BaseModel):
    """LTE capacity scale applied over ``[t_start, t_end)`` seconds."""

    t_start: float = Field(ge=0)
    t_end: float
    scale: float = Field(ge=0, le=1)

    @model_validator(mode="before")
    @classmethod
    def _from_triple(cls, data: Any) -> Any:
        if isinstance(data, (list, tuple)) and len(data) == 3:
            return {"t_start": data[0], "t_end": data[1], "scale": data[2]}
        return data

    @model_validator(mode="after")
    def _ordered(self) -> CapacityWindow:
        if self.t_end <= self.t_start:
            raise ValueError("t_end must be after t_start")
        return self


class LteLinkConfig(BaseModel):
    bandwidth_label: str = "5 MHz"
    used_subframes_per_frame: int = Field(default=8, ge=1, le=10)
    tb_bytes_per_tti: int = Field(default=2188, ge=5)
    max_concat: int = Field(default=16, ge=1)
    one_way_delay: DelayConfig = Field(default_factory=TriangularDelayConfig)
    capacity_schedule: list[CapacityWindow] = Field(default_factory=list)
    tb_loss_p: float = Field(default=0.0, ge=0, lt=1)

    def capacity_scale(self, t_s: float) -> float:
        """Scale in force at *t_s*; overlapping windows take the smallest."""
        scales = [w.scale for w in self.capacity_schedule if w.t_start <= t_s < w.t_end]
        return min(scales) if scales else 1.0

    @property
    def peak_bps(self) -> float:
        return self.tb_bytes_per_tti * self.used_subframes_per_frame * 100 * 8.0


class WifiLinkConfig(BaseModel):
    rate_bps: float = Field(default=20e6, gt=0)
    one_way_delay: DelayConfig = Field(default_factory=LogNormalDelayConfig)
    loss_p: float = Field(default=0.0, ge=0, lt=1)
    ethertype: int = Field(default=DEFAULT_ETHERTYPE, ge=0, le=0xFFFF)
    src_mac: str = "02:00:00:00:00:01"
    dst_mac: str = "02:00:00:00:00:02"

    @field_validator("src_mac", "dst_mac")
    @classmethod
    def _valid_mac(cls, value: str) -> str:
        parse_mac(value)
        return value


# --- control ----------------------------------------------------------------


class ControllerConfig(BaseModel):
    """Flow controller tuning.

    ``split``: ``dynamic`` follows the load threshold, ``off`` pins Switch
    mode on ``switch_link``, ``always`` pins Lwa mode from the start.
    """

    peak_lte_bps: float = Field(default=14e6, gt=0)
    factor: float = Field(default=0.8, gt=0, le=1)
    base_b: float = Field(default=1000.0, gt=0)
    max_step: float = Field(default=0.25, gt=0, le=1)
    sensing_frames: int = Field(default=10, ge=1)
    load_frames: int = Field(default=100, ge=1)
    switch_link: Literal["lte", "wifi"] = "lte"
    policy: Literal["additive", "multiplicative", "static", "drain"] = "additive"
    split: Literal["dynamic", "off", "always"] = "dynamic"
    initial_share: float = Field(default=0.5, ge=0, le=1)
    hysteresis: float = Field(default=0.0, ge=0, lt=1)
    deadband_pkts: int = Field(default=0, ge=0)
    standing_pkts: int = Field(default=4, ge=0)


class ReorderConfig(BaseModel):
    enabled: bool = True
    window_size: int = Field(default=64, ge=1, lt=2048)
    hold_timer_ms: float = Field(default=20.0, gt=0)


# --- traffic ----------------------------------------------------------------


class CbrProfile(BaseModel):
    kind: Literal["cbr"] = "cbr"
    rate_bps: float = Field(default=10e6, ge=0)

    def rate_at(self, t_s: float) -> float:
        return self.rate_bps


class RampProfile(BaseModel):
    """Staircase: ``start_bps`` raised by ``step_bps`` every ``period_s``."""

    kind: Literal["ramp"] = "ramp"
    start_bps: float = Field(default=2e6, ge=0)
    step_bps: float = 2e6
    period_s: float = Field(default=3.0, gt=0)
    max_bps: float | None = Field(default=None, ge=0)

    def rate_at(self, t_s: float) -> float:
        rate = max(0.0, self.start_bps + self.step_bps * int(t_s // self.period_s))
        if self.max_bps is not None:
            rate = min(rate, self.max_bps)
        return rate


class RateStep(BaseModel):
    t_s: float = Field(ge=0)
    rate_bps: float = Field(ge=0)

    @model_validator(mode="before")
    @classmethod
    def _from_pair(cls, data: Any) -> Any:
        if isinstance(data, (list, tuple)) and len(data) == 2:
            return {"t_s": data[0], "rate_bps": data[1]}
        return data


class ScheduleProfile(BaseModel):
    """Piecewise-constant rate; zero before the first step."""

    kind: Literal["schedule"] = "schedule"
    steps: list[RateStep] = Field(min_length=1)

    @field_validator("steps")
    @classmethod
    def _ascending(cls, steps: list[RateStep]) -> list[RateStep]:
        times = [s.t_s for s in steps]
        if any(b <= a for a, b in zip(times, times[1:], strict=False)):
            raise ValueError("step times must be strictly increasing")
        return steps

    def rate_at(self, t_s: float) -> float:
        rate = 0.0
        for step in self.steps:
            if step.t_s > t_s:
                break
            rate = step.rate_bps
        return rate


TrafficProfile = Annotated[
    CbrProfile | RampProfile | ScheduleProfile,
    Field(discriminator="kind"),
]


# --- scenario ---------------------------------------------------------------


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or not raw.strip():
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError("seed", f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None


class Scenario(BaseModel):
    """Root configuration for one simulation run."""

    name: str = "custom"
    description: str = ""
    duration_s: float = Field(default=10.0, gt=0)
    warmup_s: float = Field(default=0.0, ge=0)
    seed: int = Field(default_factory=_default_seed, ge=0)
    sdu_size_bytes: int = Field(default=1400, ge=9, le=65535)
    traffic: TrafficProfile = Field(default_factory=CbrProfile)
    lte: LteLinkConfig = Field(default_factory=LteLinkConfig)
    wifi: WifiLinkConfig = Field(default_factory=WifiLinkConfig)
    controller: ControllerConfig = Field(default_factory=ControllerConfig)
    reorder: ReorderConfig = Field(default_factory=ReorderConfig)

    @field_validator("warmup_s")
    @classmethod
    def _warmup_inside_run(cls, value: float, info: ValidationInfo) -> float:
        duration = info.data.get("duration_s")
        if duration is not None and value >= duration:
            raise ValueError("warmup_s must be shorter than duration_s")
        return value

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Scenario:
        """Validate *data*, turning pydantic errors into :class:`ConfigError`."""
        try:
            return cls.model_validate(_expand_env_vars(data))
        except ValidationError as exc:
            raise ConfigError.from_validation_error(exc) from exc

    @classmethod
    def load(cls, path: Path) -> Scenario:
        """Load a scenario from YAML (JSON files parse as YAML too)."""
        if not path.exists():
            raise ConfigError("", f"Scenario file not found: {path}")
        try:
            with open(path, encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as exc:
            raise ConfigError("", f"Cannot parse {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("", f"{path} must contain a mapping at the top level")
        return cls.from_dict(data)

    def save(self, path: Path) -> None:
        """Write the scenario as YAML, or JSON when *path* ends in ``.json``."""
        data = self.model_dump(mode="json")
        with open(path, "w", encoding="utf-8") as f:
            if path.suffix == ".json":
                json.dump(data, f, indent=2)
                f.write("\n")
            else:
                yaml.dump(data, f, default_flow_style=False, sort_keys=False)

    def with_overrides(
        self,
        seed: int | None = None,
        duration_s: float | None = None,
        reorder_enabled: bool | None = None,
    ) -> Scenario:
        """Copy with CLI-style overrides applied and revalidated.

        A shorter duration also shortens the warm-up to at most half of it.
        """
        data = self.model_dump(mode="json")
        if seed is not None:
            data["seed"] = seed
        if duration_s is not None:
            data["duration_s"] = duration_s
            data["warmup_s"] = max(0.0, min(self.warmup_s, duration_s / 2))
        if reorder_enabled is not None:
            data["reorder"]["enabled"] = reorder_enabled
        return Scenario.from_dict(data)


def _expand_env_vars(obj: Any) -> Any:
    """Recursively expand ${VAR} patterns in strings."""
    if isinstance(obj, str):
        pattern = re.compile(r"\$\{([^}]+)\}|\$([A-Za-z_][A-Za-z0-9_]*)")

        def replace(match: re.Match[str]) -> str:
            var_name = match.group(1) or match.group(2)
            return os.environ.get(var_name, match.group(0))

        return pattern.sub(replace, obj)
    elif isinstance(obj, dict):
        return {k: _expand_env_vars(v) for k, v in obj.items()}
    elif isinstance(obj, list):
        return [_expand_env_vars(item) for item in obj]
    return obj
