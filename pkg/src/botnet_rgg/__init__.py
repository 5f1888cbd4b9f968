"""Detection and identification of a planted botnet in random geometric graphs."""

from botnet_rgg.graph import Graph, DistanceSummary, NoConnectedPairsError
from botnet_rgg.samplers import ModelParams, SampleOutput, sample_null, sample_alternative
from botnet_rgg.detection import (
    TestVerdict,
    CalibrationTable,
    isolated_star_size,
    isolated_star_profile,
    isolated_star_test,
    average_distance_test,
    monte_carlo_threshold,
)
from botnet_rgg.estimation import EstimationReport, estimate_parameters
from botnet_rgg.identification import BotnetEstimate, RiskScore, identify_botnet, identification_risk, xi_threshold

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "DistanceSummary",
    "NoConnectedPairsError",
    "ModelParams",
    "SampleOutput",
    "sample_null",
    "sample_alternative",
    "TestVerdict",
    "CalibrationTable",
    "isolated_star_size",
    "isolated_star_profile",
    "isolated_star_test",
    "average_distance_test",
    "monte_carlo_threshold",
    "EstimationReport",
    "estimate_parameters",
    "BotnetEstimate",
    "RiskScore",
    "identify_botnet",
    "identification_risk",
    "xi_threshold",
]
