"""Diffusion simulation and the 1D exact oracles.

Euler-Maruyama integration, first-exit Monte Carlo, the Dynkin boundary
value problem for the mean first exit time, the Kramers escape formula,
and the quasi-stationary escape-time quadrature.  The Monte Carlo and the
two analytic routes deliberately overlap so they can cross-validate.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.linalg import solve_banded


@dataclass
class SimConfig:
    """Integration and ensemble settings for the diffusion engines."""
    dt: float = 1e-2
    t_max: float = 100.0
    seed: int = 0
    n_samples: int = 1
    exit_predicate: callable = None

    def __post_init__(self):
        if self.dt <= 0 or self.t_max <= 0:
            raise ValueError("dt and t_max must be positive")
        if self.dt >= self.t_max:
            raise ValueError("dt must be smaller than t_max")
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")


@dataclass
class EnsembleSummary:
    """Moments of a Monte Carlo ensemble with reproducibility metadata."""
    n: int
    mean: float
    variance: float
    std_error: float
    cv: float
    n_censored: int = 0
    seed: int = None
    extra: dict = None

    @classmethod
    def from_samples(cls, samples, n_censored=0, seed=None, extra=None):
        samples = np.asarray(samples, dtype=float)
        n = samples.size
        mean = float(samples.mean()) if n else math.nan
        var = float(samples.var(ddof=1)) if n > 1 else 0.0
        se = math.sqrt(var / n) if n else math.nan
        cv = se / mean if mean not in (0.0,) and n else math.inf
        return cls(n=n, mean=mean, variance=var, std_error=se, cv=cv,
                   n_censored=n_censored, seed=seed, extra=extra or {})

    def to_dict(self):
        d = dict(n=self.n, mean=self.mean, variance=self.variance,
                 std_error=self.std_error, cv=self.cv, n_censored=self.n_censored)
        if self.seed is not None:
            d["seed"] = self.seed
        if self.extra:
            d.update(self.extra)
        return d


def _noise_increments(rng, n, noise_dim, D, dt):
    return rng.normal(0.0, math.sqrt(D * dt), size=(n, noise_dim))


def euler_maruyama(model, x0, cfg, record=True):
    """Integrate one trajectory of  xdot = f + sigma eta.

    X_{n+1} = X_n + f(X_n) dt + sigma(X_n) deta_n with deta_n drawn from
    N(0, D dt I).  Deterministic given (seed, dt).  Raises FloatingPointError
    with the step index if the state leaves the representable range.

    Returns (t, X): times of shape (n_steps+1,) and states (n_steps+1, dim).
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be finite")
    rng = np.random.default_rng(cfg.seed)
    n_steps = int(round(cfg.t_max / cfg.dt))
    t = np.arange(n_steps + 1) * cfg.dt
    x = x0.copy()
    traj = np.empty((n_steps + 1, model.dim)) if record else None
    if record:
        traj[0] = x
    for k in range(n_steps):
        deta = rng.normal(0.0, math.sqrt(model.noise_intensity * cfg.dt),
                          size=model.noise_dim)
        x = x + model.drift(x) * cfg.dt + model.diffusion(x) @ deta
        if not np.all(np.isfinite(x)):
            raise FloatingPointError(f"blow-up at step {k + 1}")
        if record:
            traj[k + 1] = x
        if cfg.exit_predicate is not None and cfg.exit_predicate(x):
            if record:
                return t[:k + 2], traj[:k + 2]
            return t[:k + 2], x[None, :]
    if record:
        return t, traj
    return t, x[None, :]


def _exit_times_chunk(model, x0, domain, dt, t_max, n, seed):
    """Vectorized first-exit times for one worker; censored entries are nan.

    Exited paths are dropped from the working set each step, so the cost is
    proportional to the total surviving path-time.  The exit time is
    linearly interpolated inside the crossing step.
    """
    rng = np.random.default_rng(seed)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    x = np.tile(x0, (n, 1))
    idx = np.arange(n)
    times = np.full(n, np.nan)
    n_steps = int(round(t_max / dt))
    sqD = math.sqrt(model.noise_intensity * dt)
    for k in range(n_steps):
        if idx.size == 0:
            break
        deta = rng.normal(0.0, sqD, size=(idx.size, model.noise_dim))
        fi = model.drift(x)
        si = model.diffusion(x)
        xn = x + fi * dt + np.einsum('nij,nj->ni', si, deta)
        inside = np.asarray(domain(xn)).reshape(-1)
        if not inside.all():
            exited = ~inside
            frac = _crossing_fraction(domain, x[exited], xn[exited])
            times[idx[exited]] = (k + frac) * dt
            x = xn[inside]
            idx = idx[inside]
        else:
            x = xn
    return times


def _crossing_fraction(domain, x_in, x_out):
    """Fraction along [x_in, x_out] where the domain boundary is crossed."""
    lo = np.zeros(len(x_in))
    hi = np.ones(len(x_in))
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        xm = x_in + mid[:, None] * (x_out - x_in)
        inside = np.asarray(domain(xm)).reshape(-1)
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return 0.5 * (lo + hi)


def mean_exit_time_mc(model, x0, domain, cfg, workers=1):
    """Monte Carlo mean first exit time from a domain.

    `domain` is a predicate or an (lo, hi) interval for 1D models.  Censored
    paths (still inside at t_max) are excluded from the mean but counted.
    Raises RuntimeError when every path is censored.
    """
    dom = _as_domain(domain)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if not np.all(np.asarray(dom(x0[None, :])).reshape(-1)):
        raise ValueError("x0 must lie inside the domain")
    seeds = np.random.SeedSequence(cfg.seed).spawn(max(workers, 1))
    counts = _split_counts(cfg.n_samples, max(workers, 1))
    if workers <= 1:
        all_times = _exit_times_chunk(model, x0, dom, cfg.dt, cfg.t_max,
                                      cfg.n_samples, seeds[0])
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futs = [ex.submit(_exit_times_chunk, model, x0, dom, cfg.dt,
                              cfg.t_max, c, s)
                    for c, s in zip(counts, seeds) if c > 0]
            all_times = np.concatenate([f.result() for f in futs])
    censored = int(np.isnan(all_times).sum())
    good = all_times[~np.isnan(all_times)]
    if good.size == 0:
        raise RuntimeError("all paths censored: t_max too small")
    summary = EnsembleSummary.from_samples(good, n_censored=censored, seed=cfg.seed)
    summary.extra = {"ln_mean": math.log(summary.mean)} if summary.mean > 0 else {}
    return summary


def _as_domain(domain):
    if callable(domain):
        return domain
    lo, hi = domain

    def inside(x):
        x = np.asarray(x)
        v = x[..., 0] if x.ndim > 1 else x
        return (v > lo) & (v < hi)

    return inside


def _split_counts(n, workers):
    base = n // workers
    out = [base] * workers
    for i in range(n - base * workers):
        out[i] += 1
    return out


def dynkin_solve_1d(model, domain, grid_n=1000):
    """Mean first exit time by the Dynkin boundary value problem.

    Solves f tau' + (D a(x)/2) tau'' = -1 with tau = 0 at both (absorbing)
    interval ends by second-order central differences and a tridiagonal
    solve.  Returns (grid, tau).
    """
    if model.dim != 1:
        raise ValueError("dynkin_solve_1d requires a 1D model")
    lo, hi = domain
    y = np.linspace(lo, hi, grid_n + 1)
    h = (hi - lo) / grid_n
    yi = y[1:-1]
    f = np.asarray(model.drift(yi[:, None])).reshape(-1)
    a = np.asarray(model.a(yi[:, None])).reshape(-1)
    Da = model.noise_intensity * a
    if np.any(Da <= 0):
        raise ValueError("degenerate diffusion on the grid")
    # f (tau_{i+1}-tau_{i-1})/(2h) + Da/2 (tau_{i+1}-2tau_i+tau_{i-1})/h^2 = -1
    m = grid_n - 1
    lower = Da / (2 * h**2) - f / (2 * h)
    diag = -Da / h**2
    upper = Da / (2 * h**2) + f / (2 * h)
    ab = np.zeros((3, m))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    rhs = -np.ones(m)
    tau = np.empty(grid_n + 1)
    tau[0] = tau[-1] = 0.0
    tau[1:-1] = solve_banded((1, 1), ab, rhs)
    return y, tau


def kramers_mte(pot, D, warn_threshold=3.0):
    """Kramers escape time  (2 pi / sqrt(U''_min |U''_max|)) exp(2 dU / D).

    Requires positive curvature at the well bottom and negative curvature at
    the barrier top; warns (via the returned dict) when dU/D is below
    `warn_threshold`, where the asymptotics degrade.
    """
    umin = float(pot.d2U(pot.x_min))
    umax = float(pot.d2U(pot.x_max))
    if umin <= 0 or umax >= 0:
        raise ValueError("curvatures must satisfy U''(x_min) > 0 and U''(x_max) < 0")
    dU = pot.barrier_height
    prefactor = 2 * math.pi / math.sqrt(umin * abs(umax))
    tau = prefactor * math.exp(2 * dU / D)
    shallow = dU / D < warn_threshold
    return {"tau": tau, "prefactor": prefactor, "barrier": dU,
            "shallow_barrier_warning": bool(shallow)}


def escape_time_quadrature(pot, D, x1=None, x2=None, A=None):
    """Quasi-stationary escape time  tau = P / J  by adaptive quadrature.

    tau = (2/D) int_{x1}^{x2} exp(-2U/D) dx * int_{x_min}^{A} exp(2U/D) dx,
    with x1 < x_min < x2 < x_max < A.  Converges to the Kramers formula as
    D -> 0.
    """
    width = pot.x_max - pot.x_min
    if x1 is None:
        x1 = pot.x_min - width
    if x2 is None:
        x2 = 0.5 * (pot.x_min + pot.x_max)
    if A is None:
        A = pot.x_max + width
    if not (x1 < pot.x_min < x2 < pot.x_max < A):
        raise ValueError("need x1 < x_min < x2 < x_max < A")
    U = pot.potential
    I1, e1 = integrate.quad(lambda x: math.exp(-2 * U(x) / D), x1, x2,
                            epsabs=0.0, epsrel=1e-11, limit=500)
    I2, e2 = integrate.quad(lambda x: math.exp(2 * U(x) / D), pot.x_min, A,
                            epsabs=0.0, epsrel=1e-11, limit=500)
    if not (np.isfinite(I1) and np.isfinite(I2)):
        raise RuntimeError("quadrature failed to converge")
    return 2 / D * I1 * I2
