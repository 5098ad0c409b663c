from .base import DiffusionModel, JumpModel, PotentialModel, Reaction, Equilibrium
from .catalog import (
    builtin_model,
    builtin_potential,
    cubic_well_potential,
    quartic_well_potential,
    CUBIC_WELL_DOMAIN,
    SCHEMAS,
)

__all__ = [
    "DiffusionModel", "JumpModel", "PotentialModel", "Reaction", "Equilibrium",
    "builtin_model", "builtin_potential", "cubic_well_potential",
    "quartic_well_potential", "CUBIC_WELL_DOMAIN", "SCHEMAS",
]
