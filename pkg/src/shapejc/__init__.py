"""Shape-invariant generalizations of the nonresonant and intensity-dependent Jaynes-Cummings models."""
from ._backend import BACKEND
from .errors import (
    DegenerateCouplingError,
    DomainError,
    ModelValidityError,
    OutOfRangeError,
    PreconditionError,
    QuadratureError,
    SeriesRangeError,
    ShapeJCError,
)
from .operator_core import (
    BlockOperator,
    CouplingConfig,
    EnergyLadder,
    RungSystem,
    ShapeInvariantModel,
    energy_ladder,
    rung_system,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BlockOperator",
    "CouplingConfig",
    "DegenerateCouplingError",
    "DomainError",
    "EnergyLadder",
    "ModelValidityError",
    "OutOfRangeError",
    "PreconditionError",
    "QuadratureError",
    "RungSystem",
    "SeriesRangeError",
    "ShapeInvariantModel",
    "ShapeJCError",
    "energy_ladder",
    "rung_system",
]
