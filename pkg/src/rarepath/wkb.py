"""WKB machinery for jump models: Hamiltonian, optimal paths, extinction times.

The leading-order WKB substitution turns the stationary master equation
into a Hamilton-Jacobi problem with H(x, lam) = sum_r w_r(x)(e^{r lam} - 1).
Everything here is built from the scaled rates of a JumpModel; the mean
time to extinction comes out as  tau = B exp(K S_opt)  with topology-
dependent prefactor B.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate


@dataclass(frozen=True)
class WkbHamiltonian:
    """H(x, lam) with first and second partials for a 1D jump model."""
    H: callable
    dH_dx: callable
    dH_dlam: callable
    d2H_dlam2: callable
    d2H_dxdlam: callable
    d2H_dx2: callable
    model: object = None
    lambda_zero_energy: callable = None  # nontrivial root of H(x, .) = 0 if known

    def hamilton_rhs(self, x, lam):
        """Right-hand side (xdot, lamdot) of Hamilton's equations."""
        return self.dH_dlam(x, lam), -self.dH_dx(x, lam)


@dataclass(frozen=True)
class OptimalPathAnalytic:
    """Closed-form zero-energy momentum branch lam_opt(x) of a 1D model."""
    lambda_opt: callable
    lambda_opt_prime: callable
    domain: tuple
    model: object = None

    def h_residual(self, x, hamiltonian):
        x = np.asarray(x, dtype=float)
        return hamiltonian.H(x, self.lambda_opt(x))


def build_hamiltonian(model):
    """WKB Hamiltonian of a 1D JumpModel from its scaled rates.

    H(x,lam) = sum_r w_r(x)(exp(r lam) - 1); every term carries the -1, so
    H(x, 0) = 0 identically and dH/dlam at lam = 0 is the mean-field rate.
    """
    if model.dim != 1:
        raise ValueError("build_hamiltonian supports 1D jump models")
    reactions = model.reactions
    incs = [int(r.increment[0]) for r in reactions]

    def _wp(r):
        if r.w_prime is not None:
            return r.w_prime
        w = r.w
        return lambda x: (w(np.asarray(x) + 1e-6) - w(np.asarray(x) - 1e-6)) / 2e-6

    wprimes = [_wp(r) for r in reactions]

    def _wpp(i):
        wp = wprimes[i]
        return lambda x: (wp(np.asarray(x) + 1e-5) - wp(np.asarray(x) - 1e-5)) / 2e-5

    def H(x, lam):
        x = np.asarray(x, dtype=float)
        lam = np.asarray(lam, dtype=float)
        return sum(r.w(x) * np.expm1(k * lam) for r, k in zip(reactions, incs))

    def dH_dlam(x, lam):
        x = np.asarray(x, dtype=float)
        lam = np.asarray(lam, dtype=float)
        return sum(k * r.w(x) * np.exp(k * lam) for r, k in zip(reactions, incs))

    def dH_dx(x, lam):
        x = np.asarray(x, dtype=float)
        lam = np.asarray(lam, dtype=float)
        return sum(wp(x) * np.expm1(k * lam) for wp, k in zip(wprimes, incs))

    def d2H_dlam2(x, lam):
        return sum(k * k * r.w(np.asarray(x, dtype=float)) * np.exp(k * np.asarray(lam))
                   for r, k in zip(reactions, incs))

    def d2H_dxdlam(x, lam):
        return sum(k * wp(np.asarray(x, dtype=float)) * np.exp(k * np.asarray(lam))
                   for wp, k in zip(wprimes, incs))

    def d2H_dx2(x, lam):
        return sum(_wpp(i)(np.asarray(x, dtype=float)) * np.expm1(incs[i] * np.asarray(lam))
                   for i in range(len(reactions)))

    lam0 = None
    try:
        opt = lambda_opt_single_step(model)
        lam0 = opt.lambda_opt
    except ValueError:
        pass
    return WkbHamiltonian(H=H, dH_dx=dH_dx, dH_dlam=dH_dlam,
                          d2H_dlam2=d2H_dlam2, d2H_dxdlam=d2H_dxdlam,
                          d2H_dx2=d2H_dx2, model=model,
                          lambda_zero_energy=lam0)


def single_step_rates(model):
    """Combined up/down scaled rates (and derivatives) of a single-step model."""
    ups = [r for r in model.reactions if int(r.increment[0]) == 1]
    dns = [r for r in model.reactions if int(r.increment[0]) == -1]
    if model.dim != 1 or not ups or not dns or len(ups) + len(dns) != len(model.reactions):
        raise ValueError("no closed form; model is not single-step (+1/-1) -- use path-solvers")

    def combine(rs, attr):
        fns = [getattr(r, attr) for r in rs]
        if any(f is None for f in fns):
            return None
        return lambda x: sum(f(x) for f in fns)

    w_p = combine(ups, "w")
    w_m = combine(dns, "w")
    return {
        "w_p": w_p,
        "w_m": w_m,
        "u_p": combine(ups, "u") or (lambda x: np.zeros_like(np.asarray(x, dtype=float))),
        "u_m": combine(dns, "u") or (lambda x: np.zeros_like(np.asarray(x, dtype=float))),
        "w_p_prime": combine(ups, "w_prime"),
        "w_m_prime": combine(dns, "w_prime"),
    }


def lambda_opt_single_step(model):
    """Closed-form optimal momentum  lam_opt(x) = -ln(w_+1(x) / w_-1(x)).

    Only single-step processes (increments exactly {+1, -1}) admit this
    form; anything else raises ValueError pointing to the path solvers.
    """
    rr = single_step_rates(model)
    w_p, w_m = rr["w_p"], rr["w_m"]
    wpp, wmp = rr["w_p_prime"], rr["w_m_prime"]

    def lam(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return -np.log(w_p(x) / w_m(x))

    def lam_prime(x):
        x = np.asarray(x, dtype=float)
        return -(wpp(x) / w_p(x) - wmp(x) / w_m(x))

    eq_states = sorted(float(e.state[0]) for e in model.equilibria)
    hi = eq_states[-1] if eq_states else math.inf
    return OptimalPathAnalytic(lambda_opt=lam, lambda_opt_prime=lam_prime,
                               domain=(0.0, hi), model=model)


def _quad_log_endpoint(fn, a, b, eps=1e-8, epsabs=1e-10):
    """Adaptive quadrature tolerant of a log-singular endpoint at a or b.

    Integrates on the epsilon-inset interval and adds corrections from a
    local c0 + c1 ln(s) model of the integrand (s = distance to the
    endpoint), exact for pure log singularities up to O(eps^2).
    """
    sign = 1.0
    if a > b:
        a, b, sign = b, a, -1.0

    def endpoint_ok(x):
        v = fn(np.asarray(x, dtype=float))
        return np.all(np.isfinite(v))

    lo, hi = a, b
    corr = 0.0
    if not endpoint_ok(a):
        g1, g2 = float(fn(a + eps)), float(fn(a + 2 * eps))
        c1 = (g2 - g1) / math.log(2.0)
        c0 = g1 - c1 * math.log(eps)
        corr += c0 * eps + c1 * eps * (math.log(eps) - 1.0)
        lo = a + eps
    if not endpoint_ok(b):
        g1, g2 = float(fn(b - eps)), float(fn(b - 2 * eps))
        c1 = (g2 - g1) / math.log(2.0)
        c0 = g1 - c1 * math.log(eps)
        corr += c0 * eps + c1 * eps * (math.log(eps) - 1.0)
        hi = b - eps
    val, err = integrate.quad(fn, lo, hi, epsabs=epsabs, epsrel=1e-11, limit=500)
    return sign * (val + corr)


def action_along_path(path, x_from, x_to):
    """Action  S = int lam dx  between two states.

    Accepts an OptimalPathAnalytic (adaptive quadrature, absolute tolerance
    1e-10, endpoint log singularities handled) or a DiscretizedPath with
    momentum samples (trapezoid over its nodes).
    """
    if isinstance(path, OptimalPathAnalytic):
        return _quad_log_endpoint(lambda x: path.lambda_opt(x), x_from, x_to)
    if getattr(path, "momenta", None) is None:
        raise ValueError("discretized path carries no momentum samples")
    x = path.states[:, 0]
    lam = path.momenta[:, 0]
    lo, hi = sorted((x_from, x_to))
    mask = (x >= lo - 1e-12) & (x <= hi + 1e-12)
    xm, lm = x[mask], lam[mask]
    s = np.sum(0.5 * (lm[1:] + lm[:-1]) * np.diff(xm))
    return float(s)


def _interior_equilibria(model):
    eqs = sorted((float(e.state[0]), e.stability) for e in model.equilibria)
    return eqs


def mte_topology_a(model):
    """MTE for the endemic-above-repelling-extinct topology (SIS-like).

    Evaluates the single-step prefactor formula: requires the extinct state
    repelling, the endemic state attracting, and R = w'_+(0)/w'_-(0) > 1.
    Warns when R is close to 1, where the quasi-stationary assumption
    degrades.  For SIS this reduces to
    (R0/(R0-1)^2) sqrt(2 pi / K) exp(K S_opt).
    """
    rr = single_step_rates(model)
    opt = lambda_opt_single_step(model)
    K = model.system_size
    R = float(rr["w_p_prime"](0.0) / rr["w_m_prime"](0.0))
    if R <= 1:
        raise ValueError(f"topology-a prefactor requires R > 1, got R = {R:.4g}")
    if R < 1.1:
        warnings.warn("R0 close to 1: quasi-stationary assumption breaks down; "
                      "prefactor diverges", stacklevel=2)
    stable = [s for s, tag in _interior_equilibria(model) if tag == "stable" and s > 0]
    if not stable:
        raise ValueError("no attracting interior state")
    x1 = stable[0]
    s_opt = _quad_log_endpoint(
        lambda x: np.log(rr["w_p"](x) / rr["w_m"](x)), 0.0, x1)
    corr = _quad_log_endpoint(
        lambda x: rr["u_p"](x) / rr["w_p"](x) - rr["u_m"](x) / rr["w_m"](x), 0.0, x1)
    lam1 = float(opt.lambda_opt_prime(x1))
    pref = (math.sqrt(2 * math.pi * R) * math.exp(corr)
            / ((R - 1) * float(rr["w_p"](x1)) * math.sqrt(K * lam1)))
    return {"tau": pref * math.exp(K * s_opt), "prefactor": pref,
            "s_opt": s_opt, "k": K}


def mte_topology_b(model):
    """MTE for the bistable Allee-like topology.

    Evaluates the printed prefactor with the u_+/w_+ - u_-/w_- correction
    integral between the threshold x1 and the carrying capacity x2 and the
    |lam'(x1)| lam'(x2) curvature factor.
    """
    rr = single_step_rates(model)
    opt = lambda_opt_single_step(model)
    K = model.system_size
    eqs = _interior_equilibria(model)
    unstable = [s for s, tag in eqs if tag == "unstable" and s > 0]
    stable = [s for s, tag in eqs if tag == "stable" and s > 0]
    if not unstable or not stable:
        raise ValueError("topology-b requires interior threshold and carrying capacity")
    x1, x2 = unstable[0], stable[-1]
    if not (0 < x1 < x2):
        raise ValueError("fixed points must satisfy 0 < x1 < x2")
    if rr["u_p"] is None or rr["u_m"] is None:
        raise ValueError("topology-b prefactor requires the u_r corrections")
    s_opt = _quad_log_endpoint(
        lambda x: np.log(rr["w_m"](x) / rr["w_p"](x)), x2, x1)
    corr = _quad_log_endpoint(
        lambda x: rr["u_p"](x) / rr["w_p"](x) - rr["u_m"](x) / rr["w_m"](x), x1, x2)
    l1 = float(opt.lambda_opt_prime(x1))
    l2 = float(opt.lambda_opt_prime(x2))
    pref = (2 * math.pi * math.exp(corr)
            / (float(rr["w_p"](x2)) * math.sqrt(abs(l1) * l2)))
    return {"tau": pref * math.exp(K * s_opt), "prefactor": pref,
            "s_opt": s_opt, "k": K}
