"""Subpixel image registration by Modified Moment centroiding of the cross-correlation peak."""

__version__ = "0.1.0"

from .baselines import PhaseSlopeConfig, UpsampleConfig, register_phase_slope, register_upsampled_dft
from .centroid import CentroidConfig, modified_moment_centroid, register, threshold_from_circle
from .errors import (
    ConstantImageError,
    DegeneratePeakError,
    DimensionMismatchError,
    GridError,
    RankDeficientError,
    RegistrationError,
)
from .grid import Displacement, Grid, WrapIndex, circular_shift, make_grid, to_signed_lag
from .spectral import CorrelationSurface, cross_correlate, locate_peak

__all__ = [
    "CentroidConfig",
    "ConstantImageError",
    "CorrelationSurface",
    "DegeneratePeakError",
    "DimensionMismatchError",
    "Displacement",
    "Grid",
    "GridError",
    "PhaseSlopeConfig",
    "RankDeficientError",
    "RegistrationError",
    "UpsampleConfig",
    "WrapIndex",
    "circular_shift",
    "cross_correlate",
    "locate_peak",
    "make_grid",
    "modified_moment_centroid",
    "register",
    "register_phase_slope",
    "register_upsampled_dft",
    "threshold_from_circle",
    "to_signed_lag",
]
