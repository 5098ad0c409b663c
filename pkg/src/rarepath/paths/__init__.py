from .discretized import DiscretizedPath, ActionReport, action_functional
from .mam import mam_relax, finite_time_action_sweep
from .gmam import gmam, quasipotential, transit_time
from .iamm import iamm, diffusion_hamiltonian, DiffusionHamiltonian1D
from .shooting import shoot_1d

__all__ = [
    "DiscretizedPath", "ActionReport", "action_functional",
    "mam_relax", "finite_time_action_sweep",
    "gmam", "quasipotential", "transit_time",
    "iamm", "diffusion_hamiltonian", "DiffusionHamiltonian1D",
    "shoot_1d",
]
