"""Safety and engagement metrics computed from simulation traces.

Compromised safety (CS) is the shortfall of the host-following gap below a
time-headway safe distance. Safety improvement (SI) averages the relative CS
reduction of the traded run over steps where the untraded run is compromised.
Redundant human engagement (RHE) is the share of fog-free time during which
the human model held authority.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

from pydantic import BaseModel, ConfigDict, Field

from .errors import ContractError

if TYPE_CHECKING:
    from .config import ScenarioConfig
    from .scenario import SimulationTrace


class SafetyParams(BaseModel):
    """Safe distance ``cs_offset + cs_headway * v_following`` and the CS level
    above which a step counts as compromised.

    Defaults match the following vehicle's own ACC spacing policy.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    cs_headway: float = Field(1.6, gt=0)
    cs_offset: float = Field(2.0, ge=0)
    relevance_epsilon: float = Field(0.01, gt=0)


def compromised_safety(v_following: float, gap: float, p: SafetyParams) -> float:
    safe_dist = p.cs_offset + p.cs_headway * v_following
    return max(0.0, safe_dist - gap)


def record_cs(record, p: SafetyParams) -> float:
    return compromised_safety(record.following.velocity, record.gap_following, p)


def cs_series(trace: SimulationTrace, p: SafetyParams) -> list[float]:
    return [record_cs(r, p) for r in trace.records]


def safety_improvement_from_series(
    cs_no: Sequence[float], cs_traded: Sequence[float], epsilon: float = 0.01
) -> tuple[float | None, int]:
    """Return ``(SI, T)``; SI is ``None`` when no step is compromised."""
    if len(cs_no) != len(cs_traded):
        raise ContractError(f"misaligned CS series: {len(cs_no)} vs {len(cs_traded)}")
    ratios = [(n - t) / n for n, t in zip(cs_no, cs_traded) if n > epsilon]
    if not ratios:
        return None, 0
    return math.fsum(ratios) / len(ratios), len(ratios)


def safety_improvement(
    trace_no: SimulationTrace, trace_traded: SimulationTrace, p: SafetyParams
) -> float | None:
    _check_aligned(trace_no, trace_traded)
    si, _ = safety_improvement_from_series(cs_series(trace_no, p), cs_series(trace_traded, p), p.relevance_epsilon)
    return si


def rhe_from_flags(lambda_h: Iterable[float], fog_active: Iterable[bool]) -> float | None:
    """Human-active fog-free steps over fog-free steps; ``None`` if fog is everywhere."""
    engaged = clear = 0
    for lam, fog in zip(lambda_h, fog_active, strict=True):
        if not fog:
            clear += 1
            if lam == 1.0:
                engaged += 1
    if clear == 0:
        return None
    return engaged / clear


def redundant_human_engagement(trace_traded: SimulationTrace) -> float | None:
    return rhe_from_flags((r.lambda_h for r in trace_traded.records), (r.fog_active for r in trace_traded.records))


def human_active_steps(trace: SimulationTrace) -> int:
    return sum(1 for r in trace.records if r.lambda_h == 1.0)


@dataclass(frozen=True)
class MetricsReport:
    threshold: float
    si: float | None
    rhe: float | None
    relevant_step_count: int
    switch_count: int
    human_active_steps: int
    cs_no_traded: tuple[float, ...]
    cs_traded: tuple[float, ...]

    @property
    def si_percent(self) -> float | None:
        return None if self.si is None else 100.0 * self.si

    @property
    def rhe_percent(self) -> float | None:
        return None if self.rhe is None else 100.0 * self.rhe


def _check_aligned(a: SimulationTrace, b: SimulationTrace):
    if len(a.records) != len(b.records):
        raise ContractError(f"traces differ in length: {len(a.records)} vs {len(b.records)}")
    for ra, rb in zip(a.records, b.records):
        if ra.step != rb.step:
            raise ContractError(f"traces misaligned at step {ra.step} vs {rb.step}")


def evaluate_pair(trace_no: SimulationTrace, trace_traded: SimulationTrace, p: SafetyParams) -> MetricsReport:
    _check_aligned(trace_no, trace_traded)
    cs_no = cs_series(trace_no, p)
    cs_tr = cs_series(trace_traded, p)
    si, t = safety_improvement_from_series(cs_no, cs_tr, p.relevance_epsilon)
    return MetricsReport(
        threshold=trace_traded.config.arbitrator.doc_threshold,
        si=si,
        rhe=redundant_human_engagement(trace_traded),
        relevant_step_count=t,
        switch_count=trace_traded.switch_count,
        human_active_steps=human_active_steps(trace_traded),
        cs_no_traded=tuple(cs_no),
        cs_traded=tuple(cs_tr),
    )


def threshold_sweep(cfg: ScenarioConfig, thresholds: Iterable[float], p: SafetyParams | None = None) -> list[MetricsReport]:
    """Evaluate a traded/untraded pair for each threshold, ordered by threshold."""
    from .scenario import run_pair

    p = cfg.safety if p is None else p
    reports = []
    for th in sorted(thresholds):
        if not 0.0 < th < 1.0:
            raise ContractError(f"threshold {th} outside (0, 1)")
        point = cfg.model_copy(update={"arbitrator": cfg.arbitrator.model_copy(update={"doc_threshold": th})})
        reports.append(evaluate_pair(*run_pair(point), p))
    return reports
