"""Exit-probability Monte Carlo with optimal-path-driven importance sampling.

The biased dynamics  xdot = f + sigma (b + eta)  mean-shift the noise; per
increment the unbiased weight is the Gaussian density ratio

    l = p(deta~) / p~(deta~) = exp(-b . deta~ / D + |b|^2 dt / (2D)),

accumulated in log space along each path (deta~ is the realized biased
increment).  With b = 0 the machinery reduces bit-for-bit to plain Monte
Carlo on the same random stream.
"""

import math
from dataclasses import dataclass

import numpy as np

from .sde import _as_domain, _split_counts


@dataclass
class BiasSchedule:
    """Piecewise-linear noise-space control b(t) on a time grid.

    Outside [t[0], t[-1]] the control is zero: paths shorter than the
    schedule truncate it, longer paths extend with b = 0.
    """
    times: np.ndarray
    values: np.ndarray  # (n_times, noise_dim)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if self.values.shape[0] != self.times.shape[0]:
            self.values = self.values.T
        if not np.all(np.isfinite(self.values)):
            raise ValueError("bias schedule must be finite")

    @classmethod
    def zero(cls, noise_dim=1):
        return cls(times=np.array([0.0, 1.0]), values=np.zeros((2, noise_dim)))

    @classmethod
    def from_path(cls, path, model):
        """Control b = sigma(x)' lambda along a solved optimal path."""
        if path.momenta is None:
            raise ValueError("path carries no momenta; solve with a momentum-producing method")
        t = path.times if path.times is not None else path.grid
        sig = model.diffusion(path.states)
        b = np.einsum("nji,nj->ni", sig, path.momenta)
        return cls(times=np.asarray(t, dtype=float), values=b)

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        out = np.empty(np.shape(t) + (self.values.shape[1],))
        for j in range(self.values.shape[1]):
            out[..., j] = np.interp(t, self.times, self.values[:, j],
                                    left=0.0, right=0.0)
        return out

    def is_zero(self):
        return not np.any(self.values)


@dataclass
class ISEstimate:
    """Importance-sampled (or plain) exit probability estimate."""
    p_hat: float
    variance: float
    std_error: float
    cv: float
    n: int
    hit_count: int
    log10_p: float = None
    seed: int = None

    def to_dict(self):
        return {k: getattr(self, k) for k in
                ("p_hat", "variance", "std_error", "cv", "n", "hit_count",
                 "log10_p", "seed")}


def _simulate_exit(model, x0, domain, t_f, dt, n, seed, bias, absorb):
    """Shared biased/unbiased ensemble integrator.

    Draws follow a fixed per-step order so a zero bias consumes the random
    stream identically to the unbiased run.  Returns (outside_at_tf, logw).
    With absorb=True, paths are frozen at first exit and count as outside.
    """
    rng = np.random.default_rng(seed)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    x = np.tile(x0, (n, 1))
    logw = np.zeros(n)
    alive = np.ones(n, dtype=bool)
    out_flag = np.zeros(n, dtype=bool)
    D = model.noise_intensity
    sq = math.sqrt(D * dt)
    n_steps = int(round(t_f / dt))
    have_bias = bias is not None
    for k in range(n_steps):
        deta = rng.normal(0.0, sq, size=(n, model.noise_dim))
        if not alive.any():
            continue  # keep consuming the stream for reproducibility
        t = k * dt
        if have_bias:
            b = bias.evaluate(t)
            deta_b = deta + b * dt
        else:
            b = None
            deta_b = deta
        idx = np.flatnonzero(alive)
        xi = x[idx]
        fi = model.drift(xi)
        si = model.diffusion(xi)
        x[idx] = xi + fi * dt + np.einsum("nij,nj->ni", si, deta_b[idx])
        if have_bias and b is not None and np.any(b):
            logw[idx] += (-(deta_b[idx] @ b) / D + float(b @ b) * dt / (2 * D))
        if absorb:
            inside = np.asarray(domain(x[idx])).reshape(-1)
            newly_out = idx[~inside]
            out_flag[newly_out] = True
            alive[newly_out] = False
    if not absorb:
        out_flag = ~np.asarray(domain(x)).reshape(-1)
    return out_flag, logw


def _estimate(out_flag, logw, n, seed):
    if np.any(logw != 0.0):
        if out_flag.any():
            lw = logw[out_flag]
            mx = float(np.max(lw))
            w = np.exp(lw - mx)
            p = math.exp(mx + math.log(np.sum(w))) / n
            # variance per the weighted second moment: (E~[I l^2] - p^2)/n
            second = math.exp(2 * mx) * float(np.sum(w * w))
            var = (second / n - p * p) / n
        else:
            p, var = 0.0, 0.0
    else:
        p = out_flag.mean()
        var = p * (1 - p) / n
    var = max(var, 0.0)
    se = math.sqrt(var)
    cv = se / p if p > 0 else math.inf
    return ISEstimate(p_hat=float(p), variance=float(var), std_error=float(se),
                      cv=float(cv), n=int(n), hit_count=int(out_flag.sum()),
                      log10_p=(math.log10(p) if p > 0 else -math.inf), seed=seed)


def mc_exit_probability(model, x0, domain, t_f, n, seed=0, dt=1e-2,
                        absorb=False, workers=1):
    """Plain Monte Carlo estimate of P(x(t_f) outside the domain).

    Variance P(1-P)/n and CV sqrt(1-P)/sqrt(nP) of the Bernoulli estimator.
    With absorb=True the exit is treated as absorbing (first passage by
    t_f), which is the meaningful event for models whose drift blows up
    past the boundary.
    """
    dom = _as_domain(domain)
    flags, logw = _run_chunks(model, x0, dom, t_f, dt, n, seed, None, absorb,
                              workers)
    return _estimate(flags, logw, n, seed)


def is_exit_probability(model, x0, domain, t_f, bias, n, seed=0, dt=1e-2,
                        absorb=False, workers=1):
    """Importance-sampled exit probability with likelihood-ratio reweighting.

    `bias` is a BiasSchedule (zero schedule allowed, reproducing the plain
    estimator exactly on a shared stream).  Weights are accumulated in log
    space; bounded schedules therefore cannot overflow the estimate.
    """
    dom = _as_domain(domain)
    if bias is not None and bias.is_zero():
        bias = None
    flags, logw = _run_chunks(model, x0, dom, t_f, dt, n, seed, bias, absorb,
                              workers)
    return _estimate(flags, logw, n, seed)


def _run_chunks(model, x0, dom, t_f, dt, n, seed, bias, absorb, workers):
    if workers is None or workers <= 1:
        return _simulate_exit(model, x0, dom, t_f, dt, n, seed, bias, absorb)
    from concurrent.futures import ProcessPoolExecutor
    seeds = np.random.SeedSequence(seed).spawn(workers)
    counts = _split_counts(n, workers)
    flags, logws = [], []
    with ProcessPoolExecutor(max_workers=workers) as ex:
        futs = [ex.submit(_simulate_exit, model, x0, dom, t_f, dt, c, s, bias,
                          absorb)
                for c, s in zip(counts, seeds) if c > 0]
        for f in futs:
            fl, lw = f.result()
            flags.append(fl)
            logws.append(lw)
    return np.concatenate(flags), np.concatenate(logws)


def soliton_position_tail(model, xi_targets, t_f, n, seed=0, dt=2e-3,
                          grid_n=None, return_paths=False):
    """Tail probabilities P(|Xi(t_f)| beyond target) for the filtered soliton.

    For each target final position the bias comes from the finite-horizon
    minimum action path with fixed final Xi and free final (A, Omega); the
    estimate is P(Xi(t_f) >= xi_f) (or <= for negative targets).  Returns a
    list of (xi_f, p_hat, std_error).
    """
    from .paths.mam import mam_relax

    x_eq = model.equilibrium("pulse").state
    results = []
    paths = []
    if grid_n is None:
        grid_n = max(200, int(round(t_f * 100)))
    for i, xi_f in enumerate(xi_targets):
        if xi_f == 0.0:
            est = mc_exit_probability(model, x_eq, lambda x: x[..., 2] < 0.0,
                                      t_f, n, seed=seed + i, dt=dt)
            results.append((float(xi_f), est.p_hat, est.std_error))
            paths.append(None)
            continue
        sign = 1.0 if xi_f > 0 else -1.0
        target = np.array([x_eq[0], 0.0, xi_f])
        rep = mam_relax(model, x_eq, target, t_f, grid_n=grid_n,
                        free_final=np.array([True, True, False]))
        sched = BiasSchedule.from_path(rep.path, model)
        dom = _make_tail_domain(sign, xi_f)
        est = is_exit_probability(model, x_eq, dom, t_f, sched, n,
                                  seed=seed + i, dt=dt)
        results.append((float(xi_f), est.p_hat, est.std_error))
        paths.append(rep)
    if return_paths:
        return results, paths
    return results


def _make_tail_domain(sign, xi_f):
    def inside(x):
        return sign * (np.asarray(x)[..., 2] - xi_f) < 0.0
    return inside
