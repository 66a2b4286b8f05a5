"""Relativistic phase-space (Wigner function) toolkit for scalar charged particles."""
from .kinematics import PhysicalParams
from .grid import PhaseSpaceGrid

__all__ = ["PhysicalParams", "PhaseSpaceGrid"]
__version__ = "0.1.0"
