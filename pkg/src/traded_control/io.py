"""CSV serialization of traces and metric tables.

Floats are written with ``repr`` so a trace read back from disk reproduces
every value bit for bit.
"""

from __future__ import annotations

import csv
import re
from pathlib import Path
from typing import Iterable

from .dynamics import VehicleState
from .metrics import MetricsReport
from .scenario import Event, SimulationTrace, StepRecord

_VEHICLES = ("preceding", "host", "following")
_SCALARS = (
    "radar",
    "lidar",
    "fused_gap",
    "fused_rel_vel",
    "fused_gap_var",
    "z",
    "doc",
    "lambda_a",
    "lambda_h",
    "a_h",
    "a_a",
    "a_cmd",
    "a_following_cmd",
    "gap_host",
    "gap_following",
    "cs",
)

TRACE_COLUMNS = (
    ("step", "fog_active")
    + tuple(f"{v}_{q}" for v in _VEHICLES for q in ("position", "velocity", "acceleration"))
    + _SCALARS
)

METRICS_COLUMNS = ("threshold", "SI_percent", "RHE_percent")
UNDEFINED = "undefined"

_FOOTER = re.compile(r"^# collision at step (\d+)")


def _fmt(x: float) -> str:
    return repr(float(x))


def trace_rows(trace: SimulationTrace) -> Iterable[list[str]]:
    for r in trace.records:
        row = [str(r.step), "1" if r.fog_active else "0"]
        for name in _VEHICLES:
            s = getattr(r, name)
            row += [_fmt(s.position), _fmt(s.velocity), _fmt(s.acceleration)]
        row += [_fmt(getattr(r, name)) for name in _SCALARS]
        yield row


def write_trace_csv(trace: SimulationTrace, path) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        writer.writerows(trace_rows(trace))
        if trace.collision_step is not None:
            detail = next((e.detail for e in trace.events if e.kind == "collision"), "")
            fh.write(f"# collision at step {trace.collision_step} ({detail})\n")


def read_trace_csv(path) -> SimulationTrace:
    """Rebuild a trace (records and collision marker) from a trace CSV.

    The config snapshot is not stored in the CSV, so ``config`` is ``None``.
    """
    records = []
    collision = None
    events = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        m = _FOOTER.match(line)
        if m:
            collision = int(m.group(1))
            events.append(Event(collision, "collision", line.split("(", 1)[-1].rstrip(")")))
        elif not line.startswith("#"):
            body.append(line)
    reader = csv.reader(body)
    header = tuple(next(reader))
    if header != TRACE_COLUMNS:
        raise ValueError(f"{path}: unexpected trace header")
    for row in reader:
        it = iter(row)
        step = int(next(it))
        fog = next(it) == "1"
        states = [VehicleState(float(next(it)), float(next(it)), float(next(it))) for _ in _VEHICLES]
        scalars = {name: float(next(it)) for name in _SCALARS}
        records.append(StepRecord(step, fog, *states, **scalars))
    prev = None
    for r in records:
        if prev is not None and r.lambda_a != prev:
            events.append(Event(r.step, "switch", "to automation" if r.lambda_a == 1.0 else "to human"))
        prev = r.lambda_a
    events.sort(key=lambda e: e.step)
    return SimulationTrace(config=None, records=records, events=events, collision_step=collision)


def _pct(x: float | None) -> str:
    return UNDEFINED if x is None else _fmt(x)


def write_metrics_csv(reports: Iterable[MetricsReport], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(METRICS_COLUMNS)
        for rep in reports:
            writer.writerow([_fmt(rep.threshold), _pct(rep.si_percent), _pct(rep.rhe_percent)])


def read_metrics_csv(path) -> list[tuple[float, float | None, float | None]]:
    rows = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            parse = lambda s: None if s == UNDEFINED else float(s)  # noqa: E731
            rows.append((float(row["threshold"]), parse(row["SI_percent"]), parse(row["RHE_percent"])))
    return rows
