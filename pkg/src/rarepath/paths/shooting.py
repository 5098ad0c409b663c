"""Shooting method for 1D finite-time optimal paths.

Validation harness only: integrates Hamilton's equations forward from a
guessed initial momentum and bisects on the terminal state.  Long paths
make this exponentially ill-conditioned, which is why the relaxation and
Newton solvers are the production routes.
"""

import numpy as np
from scipy.integrate import solve_ivp

from .discretized import DiscretizedPath


def shoot_1d(model, x_i, x_f, t_f, lam_lo=-50.0, lam_hi=50.0, tol=1e-10,
             max_bisect=200):
    """Find lambda(0) so the Hamiltonian flow lands on x_f at t_f.

    Returns a time-parameterized DiscretizedPath with momenta.  Raises
    RuntimeError when the bracket does not straddle the target.
    """
    if model.dim != 1:
        raise ValueError("shoot_1d requires a 1D model")

    def fx(x):
        return float(np.asarray(model.drift(np.array([[x]]))).reshape(()))

    def ax(x):
        return float(np.asarray(model.a(np.array([[x]]))).reshape(()))

    h = 1e-6

    def rhs(t, y):
        x, lam = y
        fp = (fx(x + h) - fx(x - h)) / (2 * h)
        ap = (ax(x + h) - ax(x - h)) / (2 * h)
        return [fx(x) + ax(x) * lam, -fp * lam - 0.5 * ap * lam**2]

    def endpoint(lam0):
        sol = solve_ivp(rhs, (0.0, t_f), [x_i, lam0], rtol=1e-10, atol=1e-12,
                        dense_output=False)
        return sol.y[0, -1], sol

    e_lo, _ = endpoint(lam_lo)
    e_hi, _ = endpoint(lam_hi)
    if (e_lo - x_f) * (e_hi - x_f) > 0:
        raise RuntimeError("shooting bracket does not straddle the target")
    for _ in range(max_bisect):
        mid = 0.5 * (lam_lo + lam_hi)
        e_mid, sol = endpoint(mid)
        if abs(e_mid - x_f) < tol:
            break
        if (e_lo - x_f) * (e_mid - x_f) <= 0:
            lam_hi = mid
        else:
            lam_lo, e_lo = mid, e_mid
    t = np.linspace(0.0, t_f, 801)
    sol = solve_ivp(rhs, (0.0, t_f), [x_i, 0.5 * (lam_lo + lam_hi)],
                    t_eval=t, rtol=1e-10, atol=1e-12)
    return DiscretizedPath("time", sol.t, sol.y[0][:, None],
                           momenta=sol.y[1][:, None], times=sol.t)
