"""Rare-event statistics for stochastic dynamical systems.

The library computes rare-event quantities (mean exit times, extinction
times, exit probabilities) three independent ways and cross-validates them:

1. direct stochastic simulation (Euler-Maruyama diffusions, Gillespie jump
   processes),
2. closed-form and asymptotic theory (Dynkin boundary value problem,
   Kramers escape formula, WKB extinction prefactors),
3. variational optimal-path solvers (relaxation MAM, geometric MAM, IAMM)
   whose output also drives importance-sampled Monte Carlo.
"""

from .models import (
    DiffusionModel,
    JumpModel,
    PotentialModel,
    Reaction,
    Equilibrium,
    builtin_model,
)
from .models.laser import (
    laser_equilibria,
    laser_stationary_covariance,
    laser_phase_drift,
)
from .sde import (
    SimConfig,
    EnsembleSummary,
    euler_maruyama,
    mean_exit_time_mc,
    dynkin_solve_1d,
    kramers_mte,
    escape_time_quadrature,
)
from .ssa import JumpTrajectory, gillespie, extinction_time_ensemble
from .wkb import (
    WkbHamiltonian,
    OptimalPathAnalytic,
    build_hamiltonian,
    lambda_opt_single_step,
    action_along_path,
    mte_topology_a,
    mte_topology_b,
)
from .paths import (
    DiscretizedPath,
    ActionReport,
    action_functional,
    mam_relax,
    finite_time_action_sweep,
    gmam,
    quasipotential,
    iamm,
    diffusion_hamiltonian,
)
from .sampling import (
    BiasSchedule,
    ISEstimate,
    mc_exit_probability,
    is_exit_probability,
    soliton_position_tail,
)

__version__ = "0.1.0"
