"""Geometric body generation from far-field shape generators.

Bodies are encoded by their far-field patterns on an admissible lattice of
wavenumbers and directions, a tensor cubic B-spline learns the map from
characteristic values to patterns, and a truncated multi-frequency Fourier
method recovers the body from a predicted pattern.
"""

from .errors import ConfigError, DomainError, ShapegenError, StorageError, SupportError
from .farfield import AdmissibleSet, QuadratureConfig, ShapeGenerator, add_noise, admissible_set, c_const
from .geometry import CharacteristicPoint, ShapeFamily, ShapeSpec, indicator, measure
from .learner import CharacteristicGrid, GridAxis, SplineModel, TrainingDataset, fit, predict
from .reconstruct import (FourierCoefficients, ReconstructionField, error_metrics, evaluate_field,
                          extract_shape, fourier_coeffs, truncation_order)

__version__ = "0.1.0"

__all__ = [
    "AdmissibleSet", "CharacteristicGrid", "CharacteristicPoint", "ConfigError", "DomainError",
    "FourierCoefficients", "GridAxis", "QuadratureConfig", "ReconstructionField", "ShapeFamily",
    "ShapeGenerator", "ShapeSpec", "ShapegenError", "SplineModel", "StorageError", "SupportError",
    "TrainingDataset", "add_noise", "admissible_set", "c_const", "error_metrics", "evaluate_field",
    "extract_shape", "fit", "fourier_coeffs", "indicator", "measure", "predict",
    "truncation_order",
]
