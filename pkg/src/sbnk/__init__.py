"""Coupled BGK / incompressible Navier-Stokes spray solver and verification suite."""

from sbnk.grid import PhaseGrid, Distribution, WeightParams
from sbnk.moments import MacroFields, compute_moments, maxwellian, collision_rhs
from sbnk.fluid import FluidState

__all__ = [
    "PhaseGrid",
    "Distribution",
    "WeightParams",
    "MacroFields",
    "FluidState",
    "compute_moments",
    "maxwellian",
    "collision_rhs",
]
