"""Three-vehicle car-following loop: preceding (scripted), host, following.

Each step: script the preceding car, let the host sense and fuse its gap,
arbitrate authority from the radar/lidar conflict, compute the ACC and IDM
commands, blend them, advance the host, then advance the following car under
its own ACC with a noise-free view of the host.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .arbitration import Arbitrator, blend_acceleration
from .config import ScenarioConfig
from .controllers import AccMpc, acc_error_state, idm_acceleration
from .dynamics import VehicleState, discretize_acc_model, scripted_trajectory, step_engine_lag
from .metrics import compromised_safety
from .perception import init_estimate, perceive

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StepRecord:
    step: int
    fog_active: bool
    preceding: VehicleState
    host: VehicleState
    following: VehicleState
    radar: float
    lidar: float
    fused_gap: float
    fused_rel_vel: float
    fused_gap_var: float
    z: float
    doc: float
    lambda_a: float
    lambda_h: float
    a_h: float
    a_a: float
    a_cmd: float
    a_following_cmd: float
    gap_host: float
    gap_following: float
    cs: float


@dataclass(frozen=True)
class Event:
    step: int
    kind: str  # "switch", "collision" or "rejected_reading"
    detail: str


@dataclass
class SimulationTrace:
    config: ScenarioConfig
    records: list[StepRecord] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)
    collision_step: int | None = None

    def __len__(self):
        return len(self.records)

    @property
    def switch_count(self) -> int:
        return sum(1 for e in self.events if e.kind == "switch")

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


def initial_states(cfg: ScenarioConfig) -> tuple[VehicleState, VehicleState, VehicleState]:
    init = cfg.initial
    host_m, fol_m = cfg.host.model, cfg.following.model
    pre = scripted_trajectory(cfg.preceding, cfg.dt, cfg.steps)[0]
    host_gap = init.host_gap if init.host_gap is not None else host_m.d0 + host_m.t_hw * init.speed
    fol_gap = init.following_gap if init.following_gap is not None else fol_m.d0 + fol_m.t_hw * init.speed
    host = VehicleState(pre.position - cfg.vehicle_length - host_gap, init.speed, 0.0)
    fol = VehicleState(host.position - cfg.vehicle_length - fol_gap, init.speed, 0.0)
    return pre, host, fol


def run_scenario(cfg: ScenarioConfig) -> SimulationTrace:
    trace = SimulationTrace(config=cfg)
    length = cfg.vehicle_length
    host_m, fol_m = cfg.host.model, cfg.following.model
    host_mpc = AccMpc(discretize_acc_model(host_m), cfg.host.mpc)
    fol_mpc = AccMpc(discretize_acc_model(fol_m), cfg.following.mpc)
    arbitrator = Arbitrator(cfg.arbitrator, enabled=cfg.traded_control_enabled)
    q = np.diag([cfg.ekf.q_gap, cfg.ekf.q_rel_vel])
    seeds = np.random.SeedSequence(cfg.rng_seed).spawn(2)
    rngs = (np.random.default_rng(seeds[0]), np.random.default_rng(seeds[1]))
    bounds = (host_m.a_min, host_m.a_max)

    lead_states = scripted_trajectory(cfg.preceding, cfg.dt, cfg.steps)
    _, host, fol = initial_states(cfg)
    est = None
    prev_host_accel = 0.0
    prev_lambda_a = None

    for k in range(cfg.steps):
        pre = lead_states[k]
        gap_host = pre.position - host.position - length
        gap_fol = host.position - fol.position - length
        if gap_host <= 0 or gap_fol <= 0:
            which = "host-preceding" if gap_host <= 0 else "following-host"
            trace.events.append(Event(k, "collision", which))
            trace.collision_step = k
            log.info("collision (%s) at step %d", which, k)
            break

        if est is None:
            est = init_estimate(
                gap_host + cfg.ekf.init_gap_error,
                pre.velocity - host.velocity,
                (cfg.ekf.p0_gap, cfg.ekf.p0_rel_vel),
            )
        seen = perceive(
            k, gap_host, cfg.radar, cfg.lidar, cfg.fog, est, rngs,
            prev_host_accel, cfg.dt, q, predict=k > 0,
        )
        est = seen.estimate
        for kind in seen.rejected:
            trace.events.append(Event(k, "rejected_reading", kind.value))

        z, doc, lambda_a, lambda_h = arbitrator.assess(seen.radar.distance, seen.lidar.distance)
        if prev_lambda_a is not None and lambda_a != prev_lambda_a:
            to = "automation" if lambda_a == 1.0 else "human"
            trace.events.append(Event(k, "switch", f"to {to}"))
        prev_lambda_a = lambda_a

        err = acc_error_state(est.gap, host.velocity, host.velocity + est.rel_vel, host.acceleration, host_m)
        a_a = host_m.k_e * host_mpc.control(err)
        a_h = idm_acceleration(host.velocity, host.velocity - pre.velocity, gap_host, cfg.idm, bounds)
        a_cmd = blend_acceleration(a_h, a_a, lambda_h, lambda_a)

        fol_err = acc_error_state(gap_fol, fol.velocity, host.velocity, fol.acceleration, fol_m)
        u_fol = fol_mpc.control(fol_err)

        record = StepRecord(
            step=k,
            fog_active=cfg.fog.active(k),
            preceding=pre,
            host=host,
            following=fol,
            radar=seen.radar.distance,
            lidar=seen.lidar.distance,
            fused_gap=est.gap,
            fused_rel_vel=est.rel_vel,
            fused_gap_var=float(est.covariance[0, 0]),
            z=z,
            doc=doc,
            lambda_a=lambda_a,
            lambda_h=lambda_h,
            a_h=a_h,
            a_a=a_a,
            a_cmd=a_cmd,
            a_following_cmd=fol_m.k_e * u_fol,
            gap_host=gap_host,
            gap_following=gap_fol,
            cs=compromised_safety(fol.velocity, gap_fol, cfg.safety),
        )
        trace.records.append(record)

        prev_host_accel = host.acceleration
        host = step_engine_lag(host, a_cmd / host_m.k_e, host_m)
        fol = step_engine_lag(fol, u_fol, fol_m)

    return trace


def run_pair(cfg: ScenarioConfig) -> tuple[SimulationTrace, SimulationTrace]:
    """Run without and with traded control under the same seed."""
    no_traded = run_scenario(cfg.model_copy(update={"traded_control_enabled": False}))
    traded = run_scenario(cfg.model_copy(update={"traded_control_enabled": True}))
    return no_traded, traded
