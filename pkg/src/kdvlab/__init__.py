"""kdvlab: a numerical laboratory for KdV multisolitons.

Exact multisoliton profiles, the polynomial conserved quantities and their
trace formulas, forward scattering, constrained minimization over power-sum
moments, pseudospectral KdV evolution, and the explicit minimizing
sequences of the gas and point-mass regimes.
"""

from .grid import (
    DEFAULT_GRID,
    GridFunction,
    SpatialGrid,
    integrate,
    sobolev_norm,
    spectral_derivative,
)
from .soliton import SolitonConfig, eval_multisoliton, evolve_config, superpose

__all__ = [
    "DEFAULT_GRID",
    "GridFunction",
    "SpatialGrid",
    "SolitonConfig",
    "eval_multisoliton",
    "evolve_config",
    "integrate",
    "sobolev_norm",
    "spectral_derivative",
    "superpose",
]

__version__ = "0.1.0"
