"""Longitudinal vehicle kinematics and the ACC error-state model.

Ground truth is integrated with forward Euler. The controller's prediction
model is the exact zero-order-hold discretization of the continuous error
dynamics, so predictions stay consistent with the stated model at any dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.linalg import expm

from .errors import ConfigError, ScenarioError


class _Params(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


@dataclass(frozen=True)
class VehicleState:
    """Kinematics of one vehicle on the common longitudinal axis.

    ``acceleration`` is the realized (post engine lag) value.
    """

    position: float
    velocity: float
    acceleration: float = 0.0


class AccModelParams(_Params):
    """Parameters of the simplified ACC vehicle model.

    Attributes:
        t_hw: desired time headway [s] of the constant-time-headway policy.
        t_e: engine time constant [s].
        k_e: steady-state engine gain [-].
        dt: sampling time [s].
        d0: standstill spacing of the policy [m].
        a_min, a_max: physical bounds on realized acceleration [m/s^2].
    """

    t_hw: float = Field(1.4, gt=0)
    t_e: float = Field(0.5, gt=0)
    k_e: float = Field(1.0, gt=0)
    dt: float = Field(0.1, gt=0)
    d0: float = Field(2.0, ge=0)
    a_min: float = -6.0
    a_max: float = 3.0

    @model_validator(mode="after")
    def _check(self):
        for name in ("t_hw", "t_e", "k_e", "dt", "d0", "a_min", "a_max"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not self.a_min < 0 < self.a_max:
            raise ValueError("acceleration bounds must satisfy a_min < 0 < a_max")
        return self


@dataclass(frozen=True)
class DiscreteModel:
    ad: np.ndarray  # (3, 3)
    bd: np.ndarray  # (3,)
    cd: np.ndarray  # (3,)
    dt: float


def continuous_acc_model(params: AccModelParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (A, B, C) of the error dynamics for state (delta_d, delta_v, accel).

    The input column uses +K_e/T_e so that a positive command accelerates the
    vehicle, matching :func:`step_engine_lag`.
    """
    a = np.array(
        [
            [0.0, 1.0, -params.t_hw],
            [0.0, 0.0, -1.0],
            [0.0, 0.0, -1.0 / params.t_e],
        ]
    )
    b = np.array([0.0, 0.0, params.k_e / params.t_e])
    c = np.array([0.0, 0.0, 1.0])
    return a, b, c


def discretize_acc_model(params: AccModelParams, dt: float | None = None) -> DiscreteModel:
    """Zero-order-hold discretization of the ACC error model.

    Uses the augmented matrix exponential ``expm([[A, B], [0, 0]] * dt)``.
    ``dt`` defaults to ``params.dt``.
    """
    dt = params.dt if dt is None else dt
    if not (math.isfinite(dt) and dt >= 0):
        raise ConfigError(f"dt must be finite and non-negative, got {dt!r}")
    a, b, c = continuous_acc_model(params)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ConfigError("non-finite ACC model parameters")
    m = np.zeros((4, 4))
    m[:3, :3] = a
    m[:3, 3] = b
    em = expm(m * dt)
    return DiscreteModel(ad=em[:3, :3], bd=em[:3, 3].copy(), cd=c, dt=dt)


def step_engine_lag(state: VehicleState, command: float, params: AccModelParams) -> VehicleState:
    """Advance one vehicle by one sample under an acceleration command ``u``.

    The realized acceleration follows ``a' = a + dt * (K_e * u - a) / T_e``
    and is saturated to the physical bounds. Velocity and position use
    forward Euler; velocity never goes below zero.
    """
    dt = params.dt
    a = state.acceleration
    a_next = a + dt * (params.k_e * command - a) / params.t_e
    a_next = min(max(a_next, params.a_min), params.a_max)
    v_next = max(0.0, state.velocity + dt * a)
    p_next = state.position + dt * state.velocity
    return VehicleState(position=p_next, velocity=v_next, acceleration=a_next)


class VelocityProfile(_Params):
    """Scripted preceding-vehicle motion.

    ``segments`` holds ``(start_step, end_step, accel)`` triples with
    ``start_step`` inclusive and ``end_step`` exclusive. Outside all segments
    the acceleration is zero, so an empty profile is constant speed ``v0``.
    """

    p0: float = 0.0
    v0: float = Field(25.0, ge=0)
    segments: tuple[tuple[int, int, float], ...] = ()

    @field_validator("segments")
    @classmethod
    def _ordered(cls, segments):
        last_end = 0
        for start, end, accel in segments:
            if start < last_end or end <= start:
                raise ValueError("segments must be non-empty, ordered and disjoint")
            if not math.isfinite(accel):
                raise ValueError("segment acceleration must be finite")
            last_end = end
        return segments

    def accel_at(self, k: int) -> float:
        for start, end, accel in self.segments:
            if start <= k < end:
                return accel
        return 0.0


@lru_cache(maxsize=64)
def scripted_trajectory(profile: VelocityProfile, dt: float, horizon: int) -> tuple[VehicleState, ...]:
    """States for steps ``0..horizon-1`` under piecewise-constant acceleration.

    Each step is integrated exactly for constant acceleration, with the
    velocity held at zero once the vehicle stops.
    """
    states = []
    p, v = profile.p0, profile.v0
    for k in range(horizon):
        a = profile.accel_at(k)
        if v <= 0.0 and a < 0.0:
            a = 0.0
        states.append(VehicleState(position=p, velocity=v, acceleration=a))
        v_next = v + a * dt
        if v_next < 0.0:
            # stops inside the step
            t_stop = v / -a
            p += v * t_stop / 2.0
            v = 0.0
        else:
            p += (v + v_next) * dt / 2.0
            v = v_next
    return tuple(states)


def step_scripted_vehicle(profile: VelocityProfile, k: int, dt: float, horizon: int) -> VehicleState:
    if not 0 <= k < horizon:
        raise ScenarioError(f"step {k} outside scripted horizon [0, {horizon})")
    return scripted_trajectory(profile, dt, horizon)[k]
