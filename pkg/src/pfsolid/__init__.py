"""Phase-field solidification solver for dendritic growth.

Covers two model families on structured 2D/3D grids: an undercooled pure
melt (thermal field + order parameter) and a dilute binary alloy under
directional solidification (supersaturation + order parameter, with
anti-trapping flux). Explicit lumped-mass time stepping, scenario presets,
tip tracking and convergence analysis, VTK/CSV/checkpoint output.
"""

from .params import (
    AlloyMaterial,
    AlloyParams,
    ParameterError,
    PureMeltParams,
    derive_alloy_params,
    validate_pure_melt,
)
from .grid import FieldState, Grid, QuadratureRule, gauss_rule

__all__ = [
    "AlloyMaterial",
    "AlloyParams",
    "FieldState",
    "Grid",
    "ParameterError",
    "PureMeltParams",
    "QuadratureRule",
    "derive_alloy_params",
    "gauss_rule",
    "validate_pure_melt",
]

__version__ = "0.1.0"
