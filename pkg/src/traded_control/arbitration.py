"""Sensor-conflict quantification and traded control allocation.

Radar/LiDAR disagreement is averaged over a sliding window, squashed through
a logistic curve into a degree of conflict in (0, 1), and compared with a
threshold that hands full authority either to the automation or the human.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from pydantic import BaseModel, ConfigDict, Field

from .errors import ContractError


class ArbitratorConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    doc_threshold: float = Field(0.5, gt=0, lt=1)
    window_length: int = Field(1, ge=1)
    sigmoid_scale: float = Field(10.0, gt=0)
    sigmoid_center: float = 1.0


class DocWindow:
    """Last ``length`` absolute radar-lidar differences.

    Mutated in place by :meth:`push`; one writer only.
    """

    def __init__(self, length: int):
        if length < 1:
            raise ContractError("window length must be >= 1")
        self.length = length
        self.buffer: deque[float] = deque(maxlen=length)

    def push(self, radar: float, lidar: float) -> float:
        """Record one reading pair and return the window mean ``z``."""
        if not (math.isfinite(radar) and math.isfinite(lidar)):
            raise ContractError("window readings must be finite")
        self.buffer.append(abs(radar - lidar))
        # fsum keeps z independent of the order values entered the buffer
        return math.fsum(self.buffer) / len(self.buffer)

    @property
    def z(self) -> float:
        return math.fsum(self.buffer) / len(self.buffer) if self.buffer else 0.0


def update_window(w: DocWindow, radar: float, lidar: float) -> tuple[DocWindow, float]:
    z = w.push(radar, lidar)
    return w, z


def degree_of_conflict(z: float, cfg: ArbitratorConfig | None = None) -> float:
    scale, center = (10.0, 1.0) if cfg is None else (cfg.sigmoid_scale, cfg.sigmoid_center)
    t = -scale * (z - center)
    # numerically stable logistic
    if t >= 0:
        e = math.exp(-t)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(t))


def allocate_authority(doc: float, cfg: ArbitratorConfig) -> tuple[float, float]:
    """Return ``(lambda_a, lambda_h)``; the automation keeps control iff doc < threshold."""
    lambda_a = 1.0 if 0.0 <= doc < cfg.doc_threshold else 0.0
    return lambda_a, 1.0 - lambda_a


def blend_acceleration(a_h: float, a_a: float, lambda_h: float, lambda_a: float) -> float:
    if abs(lambda_h + lambda_a - 1.0) > 1e-12:
        raise ContractError(f"authorities must sum to 1, got {lambda_h} + {lambda_a}")
    if lambda_a == 1.0:
        return a_a
    if lambda_h == 1.0:
        return a_h
    return lambda_h * a_h + lambda_a * a_a


@dataclass(frozen=True)
class ArbitrationDecision:
    z: float
    doc: float
    lambda_a: float
    lambda_h: float
    blended_accel: float


class Arbitrator:
    """Stateful wrapper: owns the conflict window for one host vehicle."""

    def __init__(self, cfg: ArbitratorConfig, enabled: bool = True):
        self.cfg = cfg
        self.enabled = enabled
        self.window = DocWindow(cfg.window_length)

    def assess(self, radar: float, lidar: float) -> tuple[float, float, float, float]:
        """Return ``(z, doc, lambda_a, lambda_h)`` after ingesting one reading pair."""
        z = self.window.push(radar, lidar)
        doc = degree_of_conflict(z, self.cfg)
        if self.enabled:
            lambda_a, lambda_h = allocate_authority(doc, self.cfg)
        else:
            lambda_a, lambda_h = 1.0, 0.0
        return z, doc, lambda_a, lambda_h

    def decide(self, radar: float, lidar: float, a_h: float, a_a: float) -> ArbitrationDecision:
        z, doc, lambda_a, lambda_h = self.assess(radar, lidar)
        return ArbitrationDecision(z, doc, lambda_a, lambda_h, blend_acceleration(a_h, a_a, lambda_h, lambda_a))
