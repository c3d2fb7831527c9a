"""Experiment orchestration: validate a config, run it, write outputs."""

from __future__ import annotations

import time
from pathlib import Path

from .experiments import (
    EXPERIMENT_NAMES,
    RUNNERS,
    STOCHASTIC,
    ExperimentConfig,
    estimate_equivalence,
    growth_l1,
    noncontraction_search,
    validate_config,
)
from .reports import (
    ExperimentReport,
    build_payload,
    canonical_bytes,
    payload_hash,
    write_records_csv,
    write_report_json,
)

__all__ = [
    "EXPERIMENT_NAMES",
    "ExperimentConfig",
    "ExperimentReport",
    "estimate_equivalence",
    "growth_l1",
    "noncontraction_search",
    "run_experiment",
]


def run_experiment(
    config: ExperimentConfig,
    out_dir: str | Path | None = None,
    write_csv: bool = True,
    render: bool = True,
) -> ExperimentReport:
    """Run one experiment; optionally write JSON report, CSV table and figure.

    The returned payload is deterministic given (config, seed, threads=1).
    """
    validate_config(config)
    runner = RUNNERS[config.experiment]
    start = time.perf_counter()
    records, summary, passed = runner(config.params, config.seed, config.threads)
    wall = time.perf_counter() - start

    payload = build_payload(config.to_payload(), records, summary, passed)
    paths: dict = {}
    if out_dir is not None:
        out_dir = Path(out_dir)
        stem = f"{config.experiment}-{payload_hash(payload)[:8]}"
        paths["report"] = str(
            write_report_json(payload, wall, out_dir / f"{stem}.json")
        )
        if write_csv:
            csv_path = write_records_csv(records, out_dir / f"{stem}.csv")
            if csv_path is not None:
                paths["csv"] = str(csv_path)
        if render:
            from .plots import render_figures

            paths["figures"] = [str(p) for p in render_figures(payload, out_dir)]
    return ExperimentReport(payload, wall, paths)
