"""Desk-scale simulator for multi-user XR SLAM offloading over Massive MIMO.

Models four facets of an offloaded extended-reality localisation system
sharing one base station: pose-correction latency over configurable TDD
frame structures, uncoded bit error rate of a zero-forcing multi-user
uplink, sensitivity of localisation accuracy to raw bit errors through a
synthetic known-map pipeline, and first-order device transmission power.
"""

from . import biterrors, frames, linkbudget, metrics, mimo, modem, sandbox, scenarios
from .config import ExperimentConfig, build_config, load_config
from .studies import (
    run_all,
    run_ber_study,
    run_latency_study,
    run_power_study,
    run_sensitivity_study,
)

__version__ = "0.1.0"

__all__ = [
    "ExperimentConfig",
    "biterrors",
    "build_config",
    "frames",
    "linkbudget",
    "load_config",
    "metrics",
    "mimo",
    "modem",
    "run_all",
    "run_ber_study",
    "run_latency_study",
    "run_power_study",
    "run_sensitivity_study",
    "sandbox",
    "scenarios",
]
