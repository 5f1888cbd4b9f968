"""Experiment sweeps and the command line interface."""

from botnet_rgg.harness.config import ConfigError, ExperimentConfig
from botnet_rgg.harness.experiments import (
    HistogramResult,
    IsolationProbe,
    PowerRow,
    RiskRow,
    run_calibration,
    run_histogram,
    run_null_calibration_audit,
    run_power_sweep,
    run_risk_sweep,
    run_theorem1_probe,
    to_csv,
    wilson_interval,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "HistogramResult",
    "IsolationProbe",
    "PowerRow",
    "RiskRow",
    "run_calibration",
    "run_histogram",
    "run_null_calibration_audit",
    "run_power_sweep",
    "run_risk_sweep",
    "run_theorem1_probe",
    "to_csv",
    "wilson_interval",
]
