"""Iterative action minimization: damped Newton on discrete Hamilton equations.

The central-difference system

    delta_h x_k = dH/dlam(x_k, lam_k),   delta_h lam_k = -dH/dx(x_k, lam_k)

over a truncated horizon [-T_eps, T_eps] is solved by Newton iteration with
step halving, assembling the sparse block-tridiagonal Jacobian from the
Hamiltonian's second partials and factorizing it by sparse LU with partial
pivoting.  One optional Richardson pass (coarse + doubled grid) removes the
leading O(h^2) node error so the returned path sits on the zero-energy
surface to much higher accuracy.  One-dimensional Hamiltonians only.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .discretized import DiscretizedPath, ActionReport

_FD_H = 1e-6


@dataclass(frozen=True)
class DiffusionHamiltonian1D:
    """H(x, lam) = 1/2 a(x) lam^2 + f(x) lam for a scalar diffusion."""
    H: callable
    dH_dx: callable
    dH_dlam: callable
    d2H_dlam2: callable
    d2H_dxdlam: callable
    d2H_dx2: callable
    model: object = None
    lambda_zero_energy: callable = None


def diffusion_hamiltonian(model):
    """Hamiltonian of a 1D DiffusionModel, with the -2f/a zero-energy branch."""
    if model.dim != 1:
        raise ValueError("diffusion_hamiltonian supports 1D models")

    def fx(x):
        return np.asarray(model.drift(np.asarray(x, dtype=float)[..., None])).reshape(np.shape(x))

    def ax(x):
        return np.asarray(model.a(np.asarray(x, dtype=float)[..., None])).reshape(np.shape(x))

    def d1(g):
        return lambda x: (g(np.asarray(x) + _FD_H) - g(np.asarray(x) - _FD_H)) / (2 * _FD_H)

    fp, ap = d1(fx), d1(ax)
    fpp, app = d1(fp), d1(ap)
    return DiffusionHamiltonian1D(
        H=lambda x, l: 0.5 * ax(x) * l**2 + fx(x) * l,
        dH_dx=lambda x, l: 0.5 * ap(x) * l**2 + fp(x) * l,
        dH_dlam=lambda x, l: ax(x) * l + fx(x),
        d2H_dlam2=lambda x, l: ax(x) + 0.0 * l,
        d2H_dxdlam=lambda x, l: ap(x) * l + fp(x),
        d2H_dx2=lambda x, l: 0.5 * app(x) * l**2 + fpp(x) * l,
        model=model,
        lambda_zero_energy=lambda x: -2.0 * fx(x) / ax(x),
    )


def default_t_eps(ham, x_a, lam_a, x_b, lam_b, decay=1e-6):
    """Horizon such that the linearized endpoint decay reaches `decay`.

    Uses the slowest eigenvalue of the linearized Hamilton system at both
    endpoint equilibria.
    """
    rates = []
    for x0, l0 in ((x_a, lam_a), (x_b, lam_b)):
        hxl = float(ham.d2H_dxdlam(x0, l0))
        hll = float(ham.d2H_dlam2(x0, l0))
        hxx = float(ham.d2H_dx2(x0, l0))
        J = np.array([[hxl, hll], [-hxx, -hxl]])
        ev = np.linalg.eigvals(J)
        nonzero = np.abs(ev.real)
        nonzero = nonzero[nonzero > 1e-12]
        if nonzero.size:
            rates.append(nonzero.min())
    mu = min(rates) if rates else 1.0
    return math.log(1.0 / decay) / mu


def _newton_solve(ham, x, lam, h, tol, max_iter):
    n = len(x) - 1
    m = n - 1

    def residual(xv, lv):
        dx = (xv[2:] - xv[:-2]) / (2 * h)
        dl = (lv[2:] - lv[:-2]) / (2 * h)
        Fx = dx - ham.dH_dlam(xv[1:-1], lv[1:-1])
        Fl = dl + ham.dH_dx(xv[1:-1], lv[1:-1])
        return Fx, Fl

    c = 1.0 / (2 * h)
    res = math.inf
    for it in range(max_iter):
        Fx, Fl = residual(x, lam)
        F = np.concatenate([Fx, Fl])
        res = float(np.max(np.abs(F)))
        if res < tol:
            return x, lam, res, it, True
        xi, li = x[1:-1], lam[1:-1]
        hxl = np.asarray(ham.d2H_dxdlam(xi, li), dtype=float)
        hll = np.asarray(ham.d2H_dlam2(xi, li), dtype=float)
        hxx = np.asarray(ham.d2H_dx2(xi, li), dtype=float)
        rows, cols, vals = [], [], []
        ar = np.arange(m)
        # Fx rows (0..m-1): d/dx_{k+-1} = -+c, d/dx_k = -Hxl, d/dlam_k = -Hll
        rows += list(ar[1:]); cols += list(ar[:-1]); vals += [-c] * (m - 1)
        rows += list(ar[:-1]); cols += list(ar[1:]); vals += [c] * (m - 1)
        rows += list(ar); cols += list(ar); vals += list(-hxl)
        rows += list(ar); cols += list(m + ar); vals += list(-hll)
        # Fl rows (m..2m-1): d/dlam_{k+-1} = -+c, d/dlam_k = +Hxl, d/dx_k = +Hxx
        rows += list(m + ar[1:]); cols += list(m + ar[:-1]); vals += [-c] * (m - 1)
        rows += list(m + ar[:-1]); cols += list(m + ar[1:]); vals += [c] * (m - 1)
        rows += list(m + ar); cols += list(m + ar); vals += list(hxl)
        rows += list(m + ar); cols += list(ar); vals += list(hxx)
        J = sp.csc_matrix((vals, (rows, cols)), shape=(2 * m, 2 * m))
        try:
            du = spla.splu(J).solve(-F)
        except RuntimeError:
            return x, lam, res, it, False
        if not np.all(np.isfinite(du)):
            return x, lam, res, it, False
        step = 1.0
        for _ in range(30):
            xn, ln = x.copy(), lam.copy()
            xn[1:-1] = xi + step * du[:m]
            ln[1:-1] = li + step * du[m:]
            Fx2, Fl2 = residual(xn, ln)
            r2 = np.max(np.abs(np.concatenate([Fx2, Fl2])))
            if np.isfinite(r2) and (r2 < res or r2 < tol):
                break
            step *= 0.5
        x, lam = xn, ln
    return x, lam, res, max_iter, False


def _initial_guess(ham, t, x_a, lam_a, x_b, lam_b, profile="tanh"):
    T = t[-1]
    if profile == "tanh":
        # transition sharpness from the endpoint linearization rates
        rates = []
        for x0, l0 in ((x_a, lam_a), (x_b, lam_b)):
            hxl = float(ham.d2H_dxdlam(x0, l0))
            hll = float(ham.d2H_dlam2(x0, l0))
            hxx = float(ham.d2H_dx2(x0, l0))
            ev = np.linalg.eigvals(np.array([[hxl, hll], [-hxx, -hxl]]))
            mu = np.abs(ev.real)
            mu = mu[mu > 1e-12]
            if mu.size:
                rates.append(mu.min())
        rho = 0.5 * (np.mean(rates) if rates else 1.0)
        s = 0.5 * (1 + np.tanh(rho * t))
    else:
        s = (t + T) / (2 * T)
    x = x_a + (x_b - x_a) * s
    if ham.lambda_zero_energy is not None:
        lam = np.asarray(ham.lambda_zero_energy(x), dtype=float)
        lam[~np.isfinite(lam)] = 0.0
    else:
        lam = lam_a + (lam_b - lam_a) * s
    x[0], x[-1] = x_a, x_b
    lam[0], lam[-1] = lam_a, lam_b
    return x, lam


def iamm(ham, x_a, x_b, lam_a=0.0, lam_b=0.0, t_eps=None, grid_n=None,
         initial=None, tol=1e-10, max_iter=60, refine=True):
    """Infinite-time optimal path between Hamiltonian equilibria (1D).

    Endpoints (x_a, lam_a), (x_b, lam_b) must be fixed points of Hamilton's
    equations (e.g. the fluctuational extinct state carries lam_b != 0).
    The default initial guess is a tanh-shaped state profile with momentum
    seeded from the Hamiltonian's zero-energy branch; pass `initial`
    = (x_nodes, lam_nodes) to override.  With refine=True the solve is
    repeated on a doubled grid and Richardson-extrapolated.

    Returns an ActionReport; action = int lam dx along the path.
    """
    x_a, x_b = float(np.atleast_1d(x_a)[0]), float(np.atleast_1d(x_b)[0])
    lam_a, lam_b = float(lam_a), float(lam_b)
    if x_a == x_b and lam_a == lam_b:
        t = np.linspace(-1.0, 1.0, 3)
        path = DiscretizedPath("time", t, np.full((3, 1), x_a),
                               momenta=np.full((3, 1), lam_a), times=t)
        return ActionReport(action=0.0, path=path, residual=0.0, iterations=1,
                            converged=True, info={"trivial": True})
    for (x0, l0, tag) in ((x_a, lam_a, "start"), (x_b, lam_b, "end")):
        hx = float(ham.dH_dx(x0, l0))
        hl = float(ham.dH_dlam(x0, l0))
        if abs(hx) > 1e-8 or abs(hl) > 1e-8:
            raise ValueError(f"{tag} point is not an equilibrium of Hamilton's "
                             f"equations (|H_x|={abs(hx):.2g}, |H_lam|={abs(hl):.2g})")
    if t_eps is None:
        t_eps = default_t_eps(ham, x_a, lam_a, x_b, lam_b)
    if grid_n is None:
        grid_n = int(min(max(1200, 60 * t_eps), 20000))
    n = int(grid_n)
    t = np.linspace(-t_eps, t_eps, n + 1)
    h = 2 * t_eps / n
    if initial is not None:
        x0g = np.asarray(initial[0], dtype=float).copy()
        l0g = np.asarray(initial[1], dtype=float).copy()
    else:
        x0g, l0g = _initial_guess(ham, t, x_a, lam_a, x_b, lam_b)
    x, lam, res, its, ok = _newton_solve(ham, x0g, l0g, h, tol, max_iter)
    if not ok and initial is None:
        x0g, l0g = _initial_guess(ham, t, x_a, lam_a, x_b, lam_b, profile="linear")
        x, lam, res, its, ok = _newton_solve(ham, x0g, l0g, h, tol, max_iter)
    info = {"t_eps": t_eps, "grid_n": n}
    if refine and ok:
        t2 = np.linspace(-t_eps, t_eps, 2 * n + 1)
        x2 = np.interp(t2, t, x)
        l2 = np.interp(t2, t, lam)
        xf, lf, res2, its2, ok2 = _newton_solve(ham, x2, l2, h / 2, tol, max_iter)
        if ok2:
            x = (4.0 * xf[::2] - x) / 3.0
            lam = (4.0 * lf[::2] - lam) / 3.0
            res = res2
            its += its2
            info["richardson"] = True
    path = DiscretizedPath("time", t, x[:, None], momenta=lam[:, None], times=t)
    action = float(np.sum(0.5 * (lam[1:] + lam[:-1]) * np.diff(x)))
    return ActionReport(action=action, path=path, residual=res, iterations=its,
                        converged=bool(ok), info=info)
