"""Acceleration sources: the MPC-based ACC agent and the IDM driver model.

Two relative-speed conventions coexist and must not be mixed:

* IDM uses ``delta_v = v_h - v_p`` (closing speed is positive).
* The ACC error state uses ``delta_v = v_p - v_h`` (the gap rate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .dynamics import AccModelParams, DiscreteModel
from .errors import CollisionError
from .qp import objective, solve_box_qp


class IdmParams(BaseModel):
    """Intelligent Driver Model parameters.

    Defaults put the IDM equilibrium gap at 25 m/s close to the host ACC
    spacing, so a handover does not start with a large transient.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    v0: float = Field(30.0, gt=0)
    t_hw: float = Field(1.0, gt=0)
    a_max: float = Field(1.5, gt=0)
    b: float = Field(2.0, gt=0)
    delta: float = Field(4.0, gt=0)
    s0: float = Field(2.0, ge=0)


class MpcParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    horizon: int = Field(20, ge=1)
    weight_dd: float = Field(1.0, ge=0)
    weight_dv: float = Field(0.5, ge=0)
    weight_a: float = Field(0.1, ge=0)
    weight_u: float = Field(0.1, gt=0)
    u_min: float = -6.0
    u_max: float = 3.0

    @model_validator(mode="after")
    def _bounds(self):
        if not self.u_min < self.u_max:
            raise ValueError("u_min must be below u_max")
        return self


@dataclass(frozen=True)
class AccErrorState:
    """ACC error state. ``delta_d`` > 0 means the gap exceeds the policy gap."""

    delta_d: float
    delta_v: float
    accel: float

    def as_array(self) -> np.ndarray:
        return np.array([self.delta_d, self.delta_v, self.accel])


def idm_desired_gap(v_h: float, delta_v: float, p: IdmParams) -> float:
    dynamic = v_h * p.t_hw + v_h * delta_v / (2.0 * math.sqrt(p.a_max * p.b))
    return p.s0 + max(0.0, dynamic)


def idm_acceleration(
    v_h: float,
    delta_v: float,
    s: float,
    p: IdmParams,
    bounds: tuple[float, float] = (-6.0, 3.0),
) -> float:
    """IDM acceleration for speed ``v_h``, closing speed ``delta_v`` and gap ``s``.

    Raises:
        CollisionError: if ``s <= 0``.
    """
    if not s > 0:
        raise CollisionError(f"IDM gap must be positive, got {s}")
    s_star = idm_desired_gap(v_h, delta_v, p)
    a = p.a_max * (1.0 - (v_h / p.v0) ** p.delta - (s_star / s) ** 2)
    return min(max(a, bounds[0]), bounds[1])


def acc_error_state(gap: float, v_h: float, v_p: float, realized_a: float, p: AccModelParams) -> AccErrorState:
    return AccErrorState(
        delta_d=gap - (p.d0 + p.t_hw * v_h),
        delta_v=v_p - v_h,
        accel=realized_a,
    )


def condensed_matrices(model: DiscreteModel, horizon: int) -> tuple[np.ndarray, np.ndarray]:
    """Prediction matrices with ``X = Phi @ x0 + Gamma @ U`` for X = x_1..x_N."""
    n = 3
    phi = np.zeros((n * horizon, n))
    gamma = np.zeros((n * horizon, horizon))
    power = np.eye(n)
    for k in range(horizon):
        power = model.ad @ power
        phi[n * k : n * k + n] = power
    for k in range(horizon):
        col = model.bd
        for i in range(k, horizon):
            gamma[n * i : n * i + n, k] = col
            col = model.ad @ col
    return phi, gamma


class AccMpc:
    """Finite-horizon ACC controller over the condensed, box-constrained QP.

    Keeps the previous optimal input sequence as a warm start, so an instance
    belongs to one vehicle and must not be shared between concurrent loops.
    """

    def __init__(self, model: DiscreteModel, params: MpcParams):
        self.model = model
        self.params = params
        n_h = params.horizon
        self._phi, self._gamma = condensed_matrices(model, n_h)
        q = np.tile([params.weight_dd, params.weight_dv, params.weight_a], n_h)
        qg = q[:, None] * self._gamma
        self._hessian = 2.0 * (self._gamma.T @ qg + params.weight_u * np.eye(n_h))
        self._linear = 2.0 * qg.T @ self._phi
        self._q = q
        self._warm = None
        self.last_result = None

    def cost(self, x0: np.ndarray, inputs: np.ndarray) -> float:
        """Full quadratic cost of an input sequence, constant term included."""
        x_pred = self._phi @ x0
        const = float(x_pred @ (self._q * x_pred))
        return objective(self._hessian, self._linear @ x0, inputs) + const

    def solve(self, err: AccErrorState, warm_start=True):
        x0 = err.as_array()
        if not np.all(np.isfinite(x0)):
            raise ValueError(f"non-finite ACC error state {err}")
        x_init = None
        if warm_start and self._warm is not None:
            x_init = np.append(self._warm[1:], self._warm[-1])
        result = solve_box_qp(
            self._hessian,
            self._linear @ x0,
            self.params.u_min,
            self.params.u_max,
            x_init,
        )
        self._warm = result.x
        self.last_result = result
        return result

    def control(self, err: AccErrorState) -> float:
        """First input of the optimal sequence."""
        return float(self.solve(err).x[0])

    def reset(self):
        self._warm = None


def acc_mpc_control(err: AccErrorState, model: DiscreteModel, p: MpcParams) -> float:
    """Stateless single solve of the ACC MPC (no warm start)."""
    return AccMpc(model, p).control(err)
