"""Radar/LiDAR range sensing under fog and Kalman fusion of the two ranges.

The filter state is ``[gap, rel_vel]`` with ``rel_vel = v_p - v_h``. The
measurement is the gap itself, so the EKF update is the linear Kalman update.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import FilterError

log = logging.getLogger(__name__)


class SensorKind(str, Enum):
    RADAR = "radar"
    LIDAR = "lidar"


class SensorSpec(BaseModel):
    """One range sensor.

    Attributes:
        kind: radar or lidar.
        noise_std: standard deviation of additive Gaussian noise [m].
        offset: constant ranging offset [m] (mounting point / calibration).
        meas_var: measurement variance the fusion filter assumes [m^2].
        fog_sensitive: whether the fog bias applies; only lidar is affected.
    """

    model_config = ConfigDict(frozen=True, extra="forbid", use_enum_values=False)

    kind: SensorKind
    noise_std: float = Field(0.0, ge=0)
    offset: float = 0.0
    meas_var: float = Field(0.25, gt=0)
    fog_sensitive: bool = False

    @model_validator(mode="before")
    @classmethod
    def _default_fog_flag(cls, data):
        if isinstance(data, dict) and "fog_sensitive" not in data:
            data = {**data, "fog_sensitive": SensorKind(data.get("kind")) is SensorKind.LIDAR}
        return data

    @model_validator(mode="after")
    def _fog_flag(self):
        if self.fog_sensitive != (self.kind is SensorKind.LIDAR):
            raise ValueError("only lidar is fog sensitive")
        return self


def default_radar() -> SensorSpec:
    return SensorSpec(kind=SensorKind.RADAR, noise_std=0.01, offset=0.93, meas_var=0.25)


def default_lidar() -> SensorSpec:
    return SensorSpec(kind=SensorKind.LIDAR, noise_std=0.01, offset=0.0, meas_var=0.04)


class FogProfile(BaseModel):
    """Fog episodes as ``[start, end)`` step windows.

    Inside a window the lidar range is reduced by ``bias`` metres, ramped
    linearly over ``ramp_steps`` at both onset and offset.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    windows: tuple[tuple[int, int], ...] = ((190, 300),)
    bias: float = Field(5.0, ge=0)
    ramp_steps: int = Field(50, ge=0)

    @field_validator("windows")
    @classmethod
    def _ordered(cls, windows):
        last_end = None
        for start, end in windows:
            if start < 0 or end <= start:
                raise ValueError(f"fog window [{start}, {end}) is empty or reversed")
            if last_end is not None and start < last_end:
                raise ValueError("fog windows must be ordered and disjoint")
            last_end = end
        return windows

    def active(self, step: int) -> bool:
        return any(start <= step < end for start, end in self.windows)

    def bias_at(self, step: int) -> float:
        for start, end in self.windows:
            if start <= step < end:
                if self.ramp_steps == 0:
                    return self.bias
                frac = min(1.0, (step - start) / self.ramp_steps, (end - step) / self.ramp_steps)
                return self.bias * frac
        return 0.0


NO_FOG = FogProfile(windows=())


@dataclass(frozen=True)
class SensorReading:
    step: int
    kind: SensorKind
    distance: float


@dataclass(frozen=True)
class FusedEstimate:
    gap: float
    rel_vel: float
    covariance: np.ndarray

    @property
    def gap_std(self) -> float:
        return math.sqrt(self.covariance[0, 0])


def sense(true_gap: float, spec: SensorSpec, fog: FogProfile, step: int, rng: np.random.Generator) -> SensorReading:
    """Draw one range reading.

    A standard normal is drawn on every call, whatever ``noise_std`` is, so
    runs sharing a seed see the same noise realizations step for step.
    """
    noise = rng.standard_normal() * spec.noise_std
    distance = true_gap + spec.offset + noise
    if spec.fog_sensitive:
        distance -= fog.bias_at(step)
    if math.isfinite(distance):
        distance = max(0.0, distance)
    return SensorReading(step=step, kind=spec.kind, distance=distance)


def init_estimate(gap: float, rel_vel: float = 0.0, p0=(1.0, 1.0)) -> FusedEstimate:
    return FusedEstimate(gap=float(gap), rel_vel=float(rel_vel), covariance=np.diag(np.asarray(p0, dtype=float)))


def _check_covariance(p: np.ndarray) -> np.ndarray:
    p = 0.5 * (p + p.T)
    if not np.all(np.isfinite(p)) or np.linalg.eigvalsh(p)[0] <= 0.0:
        raise FilterError(f"covariance lost positive-definiteness: {p.tolist()}")
    return p


def ekf_predict(est: FusedEstimate, host_accel: float, dt: float, q) -> FusedEstimate:
    """Constant relative-velocity prediction; lead acceleration is process noise."""
    f = np.array([[1.0, dt], [0.0, 1.0]])
    gap = est.gap + dt * est.rel_vel
    rel_vel = est.rel_vel - dt * host_accel
    p = f @ est.covariance @ f.T + np.asarray(q, dtype=float)
    return FusedEstimate(gap=gap, rel_vel=rel_vel, covariance=_check_covariance(p))


def ekf_update(est: FusedEstimate, reading: SensorReading, r: float) -> FusedEstimate:
    """Scalar gap update (Joseph form). Non-finite readings are rejected."""
    if not math.isfinite(reading.distance):
        log.warning("rejected non-finite %s reading at step %d", reading.kind.value, reading.step)
        return est
    if math.isinf(r):
        return est
    p = est.covariance
    h = np.array([1.0, 0.0])
    s = p[0, 0] + r
    k = p[:, 0] / s
    innovation = reading.distance - est.gap
    x = np.array([est.gap, est.rel_vel]) + k * innovation
    i_kh = np.eye(2) - np.outer(k, h)
    p_new = i_kh @ p @ i_kh.T + r * np.outer(k, k)
    return FusedEstimate(gap=float(x[0]), rel_vel=float(x[1]), covariance=_check_covariance(p_new))


@dataclass(frozen=True)
class Perception:
    estimate: FusedEstimate
    radar: SensorReading
    lidar: SensorReading
    rejected: tuple[SensorKind, ...] = ()


def perceive(
    step: int,
    true_gap: float,
    radar: SensorSpec,
    lidar: SensorSpec,
    fog: FogProfile,
    est: FusedEstimate,
    rngs: tuple[np.random.Generator, np.random.Generator],
    host_accel: float,
    dt: float,
    q,
    *,
    predict: bool = True,
) -> Perception:
    """Predict once, then update sequentially with radar and then lidar."""
    if predict:
        est = ekf_predict(est, host_accel, dt, q)
    r_read = sense(true_gap, radar, fog, step, rngs[0])
    l_read = sense(true_gap, lidar, fog, step, rngs[1])
    rejected = []
    for reading, spec in ((r_read, radar), (l_read, lidar)):
        if not math.isfinite(reading.distance):
            rejected.append(spec.kind)
        est = ekf_update(est, reading, spec.meas_var)
    return Perception(est, r_read, l_read, tuple(rejected))
