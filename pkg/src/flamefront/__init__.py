"""Boundary-integral simulation of 2D premixed flame fronts."""

__version__ = "0.1.0"

from .geometry import FrontState, GeometryError, build_frame, circle_markers
from .solver import PhysicalParams, SolverError, solve_front
from .evolution import StepConfig, circle_front, run, step
from .frankel import frankel_front_speed, frankel_run
from .linear_theory import dl_growth_rate, small_expansion_rate, stabilized_growth_rate
from .turbulence import TurbulenceField, synthesize

__all__ = [
    "FrontState", "GeometryError", "build_frame", "circle_markers",
    "PhysicalParams", "SolverError", "solve_front",
    "StepConfig", "circle_front", "run", "step",
    "frankel_front_speed", "frankel_run",
    "dl_growth_rate", "small_expansion_rate", "stabilized_growth_rate",
    "TurbulenceField", "synthesize",
]
