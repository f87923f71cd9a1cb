"""Renormalized energy of screw dislocations in the unit disk and its continuum limit."""

from .disk import FourierSeries, NeumannSolution, solve_neumann
from .energy import BoundaryDatum, EnergyBreakdown, PointConfig, renormalized_energy
from .errors import ScrewDiskError
from .limit import LimitMeasure, limit_energy, limiting_boundary_measure
from .optimize import MinimizeOptions, minimize, multistart

__all__ = [
    "BoundaryDatum",
    "EnergyBreakdown",
    "FourierSeries",
    "LimitMeasure",
    "MinimizeOptions",
    "NeumannSolution",
    "PointConfig",
    "ScrewDiskError",
    "limit_energy",
    "limiting_boundary_measure",
    "minimize",
    "multistart",
    "renormalized_energy",
    "solve_neumann",
]
