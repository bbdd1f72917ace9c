"""Static figures of a trace: gaps, authority timeline and conflict level."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed ids and no timestamp, so reruns give identical files
matplotlib.rcParams["svg.hashsalt"] = "traded-control"
_META = {"Date": None, "Creator": None}


def _fog_spans(ax, trace):
    for start, end in trace.config.fog.windows if trace.config is not None else ():
        ax.axvspan(start, end, color="0.85", zorder=0, label="fog")


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)
    return path


def plot_gaps(trace, path) -> Path:
    steps = trace.column("step")
    fig, ax = plt.subplots(figsize=(7, 3.5))
    _fog_spans(ax, trace)
    ax.plot(steps, trace.column("gap_host"), label="host to preceding (true)")
    ax.plot(steps, trace.column("fused_gap"), lw=0.8, ls="--", label="host to preceding (fused)")
    ax.plot(steps, trace.column("gap_following"), label="following to host")
    ax.set_xlabel("time step")
    ax.set_ylabel("gap [m]")
    ax.legend(loc="best", fontsize="small")
    fig.tight_layout()
    return _save(fig, Path(path))


def plot_authority(trace, path) -> Path:
    steps = trace.column("step")
    fig, ax = plt.subplots(figsize=(7, 2.5))
    _fog_spans(ax, trace)
    ax.step(steps, trace.column("lambda_a"), where="post", label="automation")
    ax.step(steps, trace.column("lambda_h"), where="post", ls="--", label="human")
    ax.set_ylim(-0.1, 1.1)
    ax.set_xlabel("time step")
    ax.set_ylabel("authority")
    ax.legend(loc="center right", fontsize="small")
    fig.tight_layout()
    return _save(fig, Path(path))


def plot_doc(trace, path) -> Path:
    steps = trace.column("step")
    fig, ax = plt.subplots(figsize=(7, 2.5))
    _fog_spans(ax, trace)
    ax.plot(steps, trace.column("doc"), label="DoC")
    if trace.config is not None:
        ax.axhline(trace.config.arbitrator.doc_threshold, color="k", ls=":", label="threshold")
    ax.set_ylim(-0.05, 1.05)
    ax.set_xlabel("time step")
    ax.set_ylabel("degree of conflict")
    ax.legend(loc="center right", fontsize="small")
    fig.tight_layout()
    return _save(fig, Path(path))


def plot_trace(trace, out_dir, prefix: str) -> list[Path]:
    out_dir = Path(out_dir)
    return [
        plot_gaps(trace, out_dir / f"{prefix}_gaps.svg"),
        plot_authority(trace, out_dir / f"{prefix}_authority.svg"),
        plot_doc(trace, out_dir / f"{prefix}_doc.svg"),
    ]
