"""Scenario configuration schema and YAML loading.

Every field has a default, so an empty file yields the baseline fog
experiment: 500 steps at 0.1 s, fog over steps [190, 300), threshold 0.5.
"""

from __future__ import annotations

from pathlib import Path

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .arbitration import ArbitratorConfig
from .controllers import IdmParams, MpcParams
from .dynamics import AccModelParams, VelocityProfile
from .errors import ConfigError
from .metrics import SafetyParams
from .perception import FogProfile, SensorSpec, default_lidar, default_radar


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class VehicleConfig(_Section):
    model: AccModelParams = AccModelParams()
    mpc: MpcParams = MpcParams()


class InitialConditions(_Section):
    """Initial speeds and gaps; a gap left unset starts on the ACC spacing policy."""

    speed: float = Field(25.0, ge=0)
    host_gap: float | None = Field(None, gt=0)
    following_gap: float | None = Field(None, gt=0)


class EkfConfig(_Section):
    q_gap: float = Field(0.01, gt=0)
    q_rel_vel: float = Field(0.1, gt=0)
    p0_gap: float = Field(1.0, gt=0)
    p0_rel_vel: float = Field(1.0, gt=0)
    init_gap_error: float = 0.0


class ScenarioConfig(_Section):
    steps: int = Field(500, ge=1)
    dt: float = Field(0.1, gt=0)
    vehicle_length: float = Field(4.5, ge=0)
    rng_seed: int = Field(0, ge=0)
    traded_control_enabled: bool = True

    preceding: VelocityProfile = VelocityProfile(p0=200.0)
    initial: InitialConditions = InitialConditions()
    host: VehicleConfig = VehicleConfig(model=AccModelParams(t_hw=1.4))
    following: VehicleConfig = VehicleConfig(model=AccModelParams(t_hw=1.6))
    idm: IdmParams = IdmParams()
    radar: SensorSpec = Field(default_factory=default_radar)
    lidar: SensorSpec = Field(default_factory=default_lidar)
    fog: FogProfile = FogProfile()
    ekf: EkfConfig = EkfConfig()
    arbitrator: ArbitratorConfig = ArbitratorConfig()
    safety: SafetyParams = SafetyParams()

    @model_validator(mode="before")
    @classmethod
    def _propagate_dt(cls, data):
        # vehicle models inherit the scenario sampling time unless set explicitly
        if not isinstance(data, dict):
            return data
        data = dict(data)
        dt = data.get("dt", 0.1)
        defaults = {"host": 1.4, "following": 1.6}
        for name, t_hw in defaults.items():
            section = data.get(name)
            if section is None:
                data[name] = {"model": {"t_hw": t_hw, "dt": dt}}
            elif isinstance(section, dict):
                section = dict(section)
                model = section.get("model", {"t_hw": t_hw})
                if isinstance(model, dict):
                    model = {"t_hw": t_hw, **model}
                    model.setdefault("dt", dt)
                section["model"] = model
                data[name] = section
        return data

    @model_validator(mode="after")
    def _consistent(self):
        for name in ("host", "following"):
            if getattr(self, name).model.dt != self.dt:
                raise ValueError(f"{name}.model.dt must equal dt")
        if self.radar.kind.value != "radar" or self.lidar.kind.value != "lidar":
            raise ValueError("radar/lidar sections must declare matching kinds")
        return self

    def with_overrides(self, **changes) -> "ScenarioConfig":
        """Validated copy with top-level or dotted-path fields replaced."""
        data = self.model_dump(mode="json")
        for key, value in changes.items():
            target = data
            parts = key.split("__")
            for part in parts[:-1]:
                target = target[part]
            target[parts[-1]] = value
        return parse_config(data)


def _format_errors(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        path = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{path}: {err['msg']}")
    return "; ".join(lines)


def parse_config(data) -> ScenarioConfig:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc)) from None


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    return parse_config(data)


def dump_config(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(cfg.model_dump(mode="json"), sort_keys=False)
