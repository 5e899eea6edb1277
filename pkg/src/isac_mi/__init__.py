"""Mutual-information evaluation of integrated sensing and communications.

Closed-form communication and sensing rates, power allocation and duality
based optimizers, downlink/uplink scenario evaluators with frequency
division baselines, rate-region geometry, and seeded Monte Carlo
averaging, all behind a reproducible CLI.
"""

__version__ = "0.1.0"

from .model import (
    CommChannel,
    PowerBudget,
    RatePoint,
    RateRegion,
    ScenarioConfig,
    SlopeEstimate,
    SystemDims,
    TargetResponseStats,
    default_scenario,
    exp_corr_matrix,
)

__all__ = [
    "__version__",
    "CommChannel",
    "PowerBudget",
    "RatePoint",
    "RateRegion",
    "ScenarioConfig",
    "SlopeEstimate",
    "SystemDims",
    "TargetResponseStats",
    "default_scenario",
    "exp_corr_matrix",
]
