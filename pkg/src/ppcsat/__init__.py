"""Funnel tracking control under hard input saturation.

Parameter derivation, feasibility checking, closed-loop simulation, and
numerical verification of the analytic envelope bounds.
"""

from .bounds import Envelope, deriv_envelope, filter_cascade_check, mixed_envelope
from .cli import Scenario, example_config_path, parse_scenario
from .controller import control_law, filtered_error
from .feasibility import FeasibilityReport, full_report
from .perfspec import PerformanceSpec, VirtualSpec, derive_vpc, lambda_coeffs, psi_at
from .plant import PlantModel, TrajectorySpec, builtin_example, dynamics, estimate_traj_bound
from .sim import SimConfig, Trajectory, simulate

__version__ = "0.1.0"

__all__ = [
    "Envelope",
    "FeasibilityReport",
    "PerformanceSpec",
    "PlantModel",
    "Scenario",
    "SimConfig",
    "Trajectory",
    "TrajectorySpec",
    "VirtualSpec",
    "builtin_example",
    "control_law",
    "deriv_envelope",
    "derive_vpc",
    "dynamics",
    "estimate_traj_bound",
    "example_config_path",
    "filter_cascade_check",
    "filtered_error",
    "full_report",
    "lambda_coeffs",
    "mixed_envelope",
    "parse_scenario",
    "psi_at",
    "simulate",
]
