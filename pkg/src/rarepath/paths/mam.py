"""Finite-time minimum action paths by artificial-time relaxation.

The state and costate equations are combined into one second-order ODE in
the state; a pseudo-time PDE relaxes a linear-interpolant initial path to
its steady state.  The second derivative is treated implicitly and every
remaining term explicitly, so each sweep is one tridiagonal solve per
component.  Works for state-dependent diffusion tensors; the metric
derivative terms are evaluated by centered differences.
"""

import math

import numpy as np
from scipy.linalg import solve_banded

from .discretized import DiscretizedPath, ActionReport, action_functional

_FD_H = 1e-6


def _drift_jacobian(model, x):
    n, d = x.shape
    J = np.empty((n, d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = _FD_H
        J[:, :, j] = (model.drift(x + e) - model.drift(x - e)) / (2 * _FD_H)
    return J


def _a_and_grad(model, x):
    n, d = x.shape
    a = model.a(x)
    da = np.empty((n, d, d, d))
    for k in range(d):
        e = np.zeros(d)
        e[k] = _FD_H
        da[..., k] = (model.a(x + e) - model.a(x - e)) / (2 * _FD_H)
    return a, da


def _relax_rhs_explicit(model, x, v, constant_a):
    """Explicit part of the relaxation right-hand side (everything but x_tt)."""
    f = model.drift(x)
    Jf = _drift_jacobian(model, x)
    z = v - f
    t1 = np.einsum("nij,nj->ni", Jf, v)
    if constant_a:
        a = model.a(x)
        ainv_z = np.linalg.solve(a, z[..., None])[..., 0]
        t3 = np.einsum("nij,nkj,nk->ni", a, Jf, ainv_z)
        return -t1 + t3
    a, da = _a_and_grad(model, x)
    ainv = np.linalg.inv(a)
    ainv_z = np.einsum("nij,nj->ni", ainv, z)
    t2 = np.einsum("nl,nlj,nijk,nk->ni", z, ainv, da, v)
    t3 = np.einsum("nij,nkj,nk->ni", a, Jf, ainv_z)
    # d(a^-1)/dx_j = -a^-1 (da/dx_j) a^-1
    dainv = -np.einsum("nkp,npqj,nql->nklj", ainv, da, ainv)
    t4 = 0.5 * np.einsum("nij,nk,nklj,nl->ni", a, z, dainv, z)
    return -t1 - t2 + t3 - t4


def _is_constant_a(model, x_probe):
    a0 = model.a(x_probe[:1])
    a1 = model.a(x_probe[len(x_probe) // 2:len(x_probe) // 2 + 1])
    a2 = model.a(x_probe[-1:])
    return (np.allclose(a0, a1, rtol=1e-12, atol=1e-14)
            and np.allclose(a0, a2, rtol=1e-12, atol=1e-14))


def mam_relax(model, x_i, x_f, t_f, grid_n=None, artificial_time_steps=300000,
              tol=1e-8, free_final=None, init=None, dT=None):
    """Minimum-action path between fixed endpoints over a finite horizon.

    Parameters
    ----------
    free_final : bool mask, optional
        Coordinates of the final state left free; they get the natural
        boundary condition lambda = 0 (the corresponding entries of `x_f`
        only seed the initial guess).
    init : (grid_n+1, dim) array, optional
        Initial path; defaults to the linear interpolant.

    Returns an ActionReport; `converged` is False on residual stagnation or
    step-budget exhaustion, with the last residual reported.
    """
    x_i = np.atleast_1d(np.asarray(x_i, dtype=float))
    x_f = np.atleast_1d(np.asarray(x_f, dtype=float))
    d = model.dim
    if grid_n is None:
        grid_n = max(64, int(round(t_f * 200)))
    n = grid_n
    dt = t_f / n
    t = np.linspace(0.0, t_f, n + 1)
    x = (np.linspace(0, 1, n + 1)[:, None] * (x_f - x_i)[None, :] + x_i[None, :]
         if init is None else np.array(init, dtype=float))
    free = np.zeros(d, dtype=bool) if free_final is None else np.asarray(free_final, bool)
    constant_a = _is_constant_a(model, x)
    if dT is None:
        dT = 0.2 * dt
    m = n - 1
    it = 0
    prev_res = math.inf
    res = math.inf
    stall = 0
    while it < artificial_time_steps:
        v = np.gradient(x, dt, axis=0)
        expl = _relax_rhs_explicit(model, x[1:-1], v[1:-1], constant_a)
        xtt = (x[2:] - 2 * x[1:-1] + x[:-2]) / dt**2
        res = float(np.max(np.abs(xtt + expl)))
        if res < tol:
            break
        if res > prev_res * (1 - 1e-12):
            stall += 1
            if stall > 2000 and res > 100 * tol:
                break  # stagnation
        else:
            stall = 0
        prev_res = res
        main = np.full(m, 1 + 2 * dT / dt**2)
        off = np.full(m - 1, -dT / dt**2)
        ab = np.zeros((3, m))
        ab[0, 1:] = off
        ab[1] = main
        ab[2, :-1] = off
        for i in range(d):
            b = x[1:-1, i] + dT * expl[:, i]
            b[0] += dT / dt**2 * x[0, i]
            b[-1] += dT / dt**2 * x[-1, i]
            x[1:-1, i] = solve_banded((1, 1), ab, b)
        if free.any():
            _apply_natural_bc(model, x, dt, free)
        it += 1
    v = np.gradient(x, dt, axis=0)
    a = model.a(x)
    lam = np.linalg.solve(a, (v - model.drift(x))[..., None])[..., 0]
    path = DiscretizedPath("time", t, x, momenta=lam, times=t)
    S = action_functional(path, model)
    return ActionReport(action=S, path=path, residual=res, iterations=it,
                        converged=bool(res < tol),
                        info={"t_f": t_f, "grid_n": n, "free_final": free.tolist()})


def _apply_natural_bc(model, x, dt, free):
    """Natural condition lambda = 0 on free coords of the final node.

    With lambda = a^{-1}(xdot - f), zero free components mean
    xdot = f + a lambda with lambda supported on the fixed coords; the
    fixed-coordinate velocities (known, since those values are pinned)
    determine the multiplier.
    """
    fixed = ~free
    xN = x[-1]
    fN = model.drift(xN[None, :])[0]
    aN = model.a(xN[None, :])[0]
    vN_fixed = (x[-1, fixed] - x[-2, fixed]) / dt
    A_ff = aN[np.ix_(fixed, fixed)]
    mu = np.linalg.solve(A_ff, vN_fixed - fN[fixed]) if fixed.any() else np.zeros(0)
    lamN = np.zeros(len(xN))
    lamN[fixed] = mu
    v_free = fN[free] + (aN @ lamN)[free]
    x[-1, free] = x[-2, free] + dt * v_free


def finite_time_action_sweep(model, x_i, x_f, t_f_list, grid_dt=0.005, **kw):
    """Minimum action versus horizon; the limit is the quasi-potential.

    Returns a list of (t_f, action, converged); non-converged members are
    flagged rather than dropped.
    """
    out = []
    for t_f in t_f_list:
        n = max(64, int(round(t_f / grid_dt)))
        rep = mam_relax(model, x_i, x_f, t_f, grid_n=n, **kw)
        out.append((float(t_f), rep.action, rep.converged))
    return out
