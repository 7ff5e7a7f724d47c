from .metrics import (MetricsReport, compute_metrics, expected_calibration_error,
                      reachability_labels)
from .presets import PRESETS, Components, Preset, describe, load_preset
from .runner import RunConfig, RunOutcome, aggregate, bench, replay_run, run_instance

__all__ = ["MetricsReport", "compute_metrics", "expected_calibration_error", "reachability_labels",
           "PRESETS", "Components", "Preset", "describe", "load_preset",
           "RunConfig", "RunOutcome", "aggregate", "bench", "replay_run", "run_instance"]
