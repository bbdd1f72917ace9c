"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 runtime/solver error,
4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .config import ScenarioConfig, load_config
from .errors import ConfigError, TradedControlError
from .io import write_metrics_csv, write_trace_csv
from .metrics import evaluate_pair, threshold_sweep
from .scenario import run_pair, run_scenario

log = logging.getLogger("traded_control")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_IO = 4

MODES = ("single", "pair", "sweep")
DEFAULT_THRESHOLDS = (0.2, 0.5, 0.8)


@dataclass
class RunManifest:
    config_path: Path | None = None
    out_dir: Path = Path("out")
    mode: str = "pair"
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    plots: bool = False
    seed: int | None = None
    written: list[Path] = field(default_factory=list)


def _parse_thresholds(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad threshold list: {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty threshold list")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="traded-control",
        description="Simulate traded control transfer in a foggy car-following scenario.",
    )
    parser.add_argument("--config", type=Path, help="YAML scenario config (defaults if omitted)")
    parser.add_argument("--mode", choices=MODES, default="pair")
    parser.add_argument("--thresholds", type=_parse_thresholds, default=DEFAULT_THRESHOLDS,
                        help="comma-separated DoC thresholds for sweep mode")
    parser.add_argument("--seed", type=int, help="override rng_seed")
    parser.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    parser.add_argument("--plots", action="store_true", help="also write SVG figures")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _resolve_config(manifest: RunManifest) -> ScenarioConfig:
    cfg = load_config(manifest.config_path) if manifest.config_path else ScenarioConfig()
    if manifest.seed is not None:
        if manifest.seed < 0:
            raise ConfigError("seed must be non-negative")
        cfg = cfg.with_overrides(rng_seed=manifest.seed)
    if manifest.mode == "sweep":
        bad = [t for t in manifest.thresholds if not 0.0 < t < 1.0]
        if bad:
            raise ConfigError(f"thresholds must lie in (0, 1): {bad}")
    return cfg


def _execute(manifest: RunManifest, cfg: ScenarioConfig):
    out = manifest.out_dir
    out.mkdir(parents=True, exist_ok=True)
    emit = manifest.written.append

    if manifest.mode == "single":
        trace = run_scenario(cfg)
        path = out / "trace.csv"
        emit(path)
        write_trace_csv(trace, path)
        traces = {"trace": trace}
    elif manifest.mode == "pair":
        no_traded, traded = run_pair(cfg)
        for name, trace in (("trace_no_traded", no_traded), ("trace_traded", traded)):
            path = out / f"{name}.csv"
            emit(path)
            write_trace_csv(trace, path)
        path = out / "metrics.csv"
        emit(path)
        report = evaluate_pair(no_traded, traded, cfg.safety)
        write_metrics_csv([report], path)
        traces = {"no_traded": no_traded, "traded": traded}
    else:
        reports = threshold_sweep(cfg, manifest.thresholds)
        path = out / "sweep.csv"
        emit(path)
        write_metrics_csv(reports, path)
        traces = {}

    if manifest.plots:
        from .plots import plot_trace

        for prefix, trace in traces.items():
            if not trace.records:
                continue
            for name in ("gaps", "authority", "doc"):
                emit(out / f"{prefix}_{name}.svg")
            plot_trace(trace, out, prefix)


def _cleanup(paths):
    for path in paths:
        try:
            path.unlink()
        except OSError:
            pass


def run_cli(manifest: RunManifest) -> int:
    try:
        cfg = _resolve_config(manifest)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        _execute(manifest, cfg)
    except ConfigError as exc:
        _cleanup(manifest.written)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TradedControlError as exc:
        _cleanup(manifest.written)
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        _cleanup(manifest.written)
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in manifest.written:
        print(path)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    manifest = RunManifest(
        config_path=args.config,
        out_dir=args.out,
        mode=args.mode,
        thresholds=args.thresholds,
        plots=args.plots,
        seed=args.seed,
    )
    return run_cli(manifest)


if __name__ == "__main__":
    sys.exit(main())
