"""Exact reduced dynamics of a qubit coupled to N degenerate bosonic modes,
its time-local generator, equilibrium diagnostics, and the quasi-Otto cycle."""

from .dynmap import MapCoefficients, apply_map, choi_margin, evolve_state, map_coefficients
from .engine import CycleResult, CycleSpec, multi_cycle, single_cycle
from .equilibrium import (
    AveragedCoefficients,
    AveragingMethod,
    averaged_coefficients,
    incomplete_beta,
    optimized_trace_distance,
    thermalization_ratio,
)
from .errors import (
    DegenerateCycleError,
    DimensionError,
    IntegrationError,
    ParameterError,
    QuasiOttoError,
    SingularMapError,
    TruncationError,
)
from .lindblad import LindbladRates, integrate_master_equation, rates_closed_form
from .model import DEFAULT_POLICY, ModelParams, TruncationPolicy, partition_function, truncation_level, validate_params

__version__ = "0.1.0"

__all__ = [
    "AveragedCoefficients", "AveragingMethod", "CycleResult", "CycleSpec", "DEFAULT_POLICY",
    "DegenerateCycleError", "DimensionError", "IntegrationError", "LindbladRates", "MapCoefficients",
    "ModelParams", "ParameterError", "QuasiOttoError", "SingularMapError", "TruncationError",
    "TruncationPolicy", "apply_map", "averaged_coefficients", "choi_margin", "evolve_state",
    "incomplete_beta", "integrate_master_equation", "map_coefficients", "multi_cycle",
    "optimized_trace_distance", "partition_function", "rates_closed_form", "single_cycle",
    "thermalization_ratio", "truncation_level", "validate_params",
]
