"""Benchmark generator, backend evaluation, trial runner, and metrics."""

from .evaluate import AccuracyReport, evaluate_backend
from .generator import (
    DEFAULT_MANIFEST,
    BenchmarkInstruction,
    ManifestCountMismatch,
    generate_benchmark,
    read_benchmark,
    write_benchmark,
)
from .metrics import Metrics, compute_metrics
from .trials import TrialLog, TrialScript, run_trial, run_trials, scenario_script, score_trial

__all__ = [
    "AccuracyReport",
    "BenchmarkInstruction",
    "DEFAULT_MANIFEST",
    "ManifestCountMismatch",
    "Metrics",
    "TrialLog",
    "TrialScript",
    "compute_metrics",
    "evaluate_backend",
    "generate_benchmark",
    "read_benchmark",
    "run_trial",
    "run_trials",
    "scenario_script",
    "score_trial",
    "write_benchmark",
]
