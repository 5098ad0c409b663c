"""Equilibria, linearized covariance, and phase drift of the reduced laser model.

State is x = (A, Omega, Xi): pulse amplitude, frequency, and position.  The
active-feedback trap creates a lattice of equilibria at Xi = n pi / omega
whose noise-induced transitions are the phase slips of interest.
"""

import numpy as np
from scipy.linalg import solve_continuous_lyapunov, eigvals

from .base import Equilibrium
from . import catalog


def _amplitude_roots(p):
    c1, c2, d1, d2 = p["c1"], p["c2"], p["d1"], p["d2"]
    disc = (2 * d1 - c2) ** 2 - 96 / 5 * c1 * d2
    if disc < 0:
        raise ValueError("laser3d: (2 d1 - c2)^2 - (96/5) c1 d2 < 0, no nontrivial equilibria")
    a_plus = 5 / (16 * d2) * (2 * d1 - c2 + np.sqrt(disc))
    a_minus = 5 / (16 * d2) * (2 * d1 - c2 - np.sqrt(disc))
    if a_plus <= 0:
        raise ValueError("laser3d: amplitude roots are not positive")
    return np.sqrt(a_plus), np.sqrt(max(a_minus, 0.0))


def laser_equilibria(params, n_values=(0, 1)):
    """Nontrivial equilibria (A0+-, 0, n pi / omega) with stability tags.

    A0+ equilibria are stable nodes or spirals for n even and saddles for n
    odd; A0- equilibria are always saddles.
    """
    p = catalog._check_params("laser3d", dict(params))
    A0p, A0m = _amplitude_roots(p)
    om = p["omega"]
    eqs = []
    for n in n_values:
        xi = n * np.pi / om
        tag = "stable" if n % 2 == 0 else "saddle"
        eqs.append(Equilibrium(f"A+_n{n}", [A0p, 0.0, xi], tag))
        if A0m > 0:
            eqs.append(Equilibrium(f"A-_n{n}", [A0m, 0.0, xi], "saddle"))
    return eqs


def laser_linearization(params, n=0, branch="+"):
    """Drift Jacobian M at the equilibrium (A0, 0, n pi/omega)."""
    p = catalog._check_params("laser3d", dict(params))
    c0, c1, c2, om = p["c0"], p["c1"], p["c2"], p["omega"]
    A0p, A0m = _amplitude_roots(p)
    A0 = A0p if branch == "+" else A0m
    d1 = p["d1"]
    M = np.zeros((3, 3))
    M[0, 0] = 8 * c1 - 4 / 3 * (2 * d1 - c2) * A0**2
    M[1, 1] = -4 / 3 * c2 * A0**2
    M[1, 2] = -((-1) ** n) * np.pi * c0 * om**3 / (2 * A0**3) / np.sinh(np.pi * om / (2 * A0))
    M[2, 1] = 1.0
    return M, A0


def laser_stationary_covariance(params, n=0, branch="+"):
    """Stationary covariance of fluctuations about a stable equilibrium.

    Solves the continuous Lyapunov equation M Sigma + Sigma M' + D sigma
    sigma' = 0, which equals the frequency-domain integral of the linearized
    dynamics for Hurwitz M.  Raises if M is not Hurwitz.
    """
    p = catalog._check_params("laser3d", dict(params))
    M, A0 = laser_linearization(p, n=n, branch=branch)
    if np.max(eigvals(M).real) >= 0:
        raise ValueError("no stationary covariance: linearization is not Hurwitz")
    x0 = np.array([A0, 0.0, n * np.pi / p["omega"]])
    s = catalog.soliton_diffusion(x0)
    Q = p["d"] * (s @ s.T)
    sigma = solve_continuous_lyapunov(M, -Q)
    return 0.5 * (sigma + sigma.T)


def lyapunov_residual(M, sigma, Q):
    """Frobenius norm of M Sigma + Sigma M' + Q."""
    return float(np.linalg.norm(M @ sigma + sigma @ M.T + Q))


def laser_phase_drift(state, params):
    """Deterministic drift of the slaved phase Theta, evaluated as printed.

    Note: the bare "-Xi" term is dimensionally inconsistent with the other
    phase terms but is reproduced verbatim from the model statement; treat
    this evaluator as a diagnostic only.
    """
    p = catalog._check_params("laser3d", dict(params))
    A, Om, Xi = (float(v) for v in np.atleast_1d(state)[:3])
    if A <= 0:
        raise ValueError("phase drift requires amplitude A > 0")
    c0, om = p["c0"], p["omega"]
    z = np.pi * om / (2 * A)
    trap = 0.0
    if c0 != 0.0 and om != 0.0:
        trap = (-np.pi * om * c0 / A**3 * np.cos(om * Xi) / np.sinh(z)
                * (1 + z / A * np.cosh(z) / np.sinh(z)))
    return trap - Xi + 0.5 * (A**2 - Om**2)
