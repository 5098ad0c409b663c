"""Exact stochastic simulation of jump processes (Doob-Gillespie).

Waiting times are exponential with mean 1/a0; the event channel is chosen
by cumulative comparison in declared reaction order.  Extinction ensembles
for 1D single-step models run through a compiled kernel that samples the
same process; general models fall back to the pure-Python sampler.
"""

import math
from dataclasses import dataclass

import numpy as np

from .sde import EnsembleSummary


@dataclass
class JumpTrajectory:
    """Event-resolved sample path of a jump process."""
    times: np.ndarray          # event times, strictly increasing, t[0] = 0
    states: np.ndarray         # (n_events + 1, dim) integer states
    terminal: str              # "absorbed" | "time-limit" | "frozen"

    @property
    def final_time(self):
        return float(self.times[-1])

    @property
    def final_state(self):
        return self.states[-1]


def gillespie(model, x0, t_max=math.inf, seed=0, record=True, max_events=None):
    """Sample one trajectory by the stochastic simulation algorithm.

    At each step the waiting time is tau = (1/a0) ln(1/r1) and channel i
    fires when r2 falls in its cumulative-rate interval, with channels
    scanned in declared order.  Stops at an absorbing state, at t_max, or
    when all rates vanish at a non-absorbing state (terminal = "frozen").
    """
    x = np.atleast_1d(np.asarray(x0, dtype=np.int64))
    if np.any(x < 0):
        raise ValueError("x0 must have nonnegative integer components")
    rng = np.random.default_rng(seed)
    increments = np.stack([r.increment for r in model.reactions])
    t = 0.0
    times = [0.0]
    states = [x.copy()] if record else None
    terminal = "time-limit"
    n_ev = 0
    while True:
        if model.is_absorbing(x):
            terminal = "absorbed"
            break
        rates = model.rates(x)
        a0 = rates.sum()
        if a0 <= 0.0:
            terminal = "frozen"
            break
        r1 = rng.random()
        tau = math.log(1.0 / r1) / a0
        if t + tau > t_max:
            t = t_max
            terminal = "time-limit"
            break
        t += tau
        r2 = rng.random() * a0
        acc = 0.0
        for i in range(len(rates)):
            acc += rates[i]
            if r2 < acc:
                break
        x = x + increments[i]
        n_ev += 1
        if record:
            times.append(t)
            states.append(x.copy())
        if max_events is not None and n_ev >= max_events:
            terminal = "time-limit"
            break
    if record:
        return JumpTrajectory(np.asarray(times),
                              np.stack(states).astype(np.int64), terminal)
    return JumpTrajectory(np.array([0.0, t]), np.stack([np.atleast_1d(x0), x]),
                          terminal)


def _single_step_1d(model):
    return model.dim == 1 and all(abs(int(r.increment[0])) == 1
                                  for r in model.reactions)


def build_rate_tables(model, x_cap=None):
    """Exact up/down rate tables for a 1D single-step model.

    The table extends until the chain above the table top is unreachable
    (cumulative log down/up ratio > 745, i.e. probability underflows) or a
    hard cap is hit.  Returns (inv_a0, p_up) with zero rows marking frozen
    states.
    """
    if not _single_step_1d(model):
        raise ValueError("rate tables require a 1D model with +-1 increments")
    K = model.system_size

    def updn(X):
        rates = model.rates(np.array([X], dtype=np.int64))
        up = sum(r for r, rx in zip(rates, model.reactions) if rx.increment[0] > 0)
        dn = sum(r for r, rx in zip(rates, model.reactions) if rx.increment[0] < 0)
        return up, dn

    if x_cap is None:
        x_cap = int(np.ceil(2 * K)) + 8
    ups, dns = [], []
    X = 0
    log_excess = 0.0
    hard_cap = int(np.ceil(100 * K)) + 1000
    while True:
        up, dn = updn(X)
        ups.append(up)
        dns.append(dn)
        if X > x_cap:
            if up <= 0:
                break
            log_excess += math.log(dn / up) if dn > 0 else 745.0
            if log_excess > 745.0:
                break
        if X >= hard_cap:
            raise RuntimeError("rate table cap exceeded; model escapes to infinity?")
        X += 1
    a_up = np.asarray(ups)
    a_dn = np.asarray(dns)
    a_up[-1] = 0.0  # top of table is reflecting; unreachable by construction
    a0 = a_up + a_dn
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_a0 = np.where(a0 > 0, 1.0 / np.where(a0 > 0, a0, 1.0), 0.0)
        p_up = np.where(a0 > 0, a_up / np.where(a0 > 0, a0, 1.0), 0.0)
    return inv_a0, p_up


def extinction_time_ensemble(model, x0, n_samples, seed=0, t_max=math.inf,
                             workers=None):
    """Ensemble of absorption times with ln(mean) emitted for slope fits.

    1D single-step models run through the compiled kernel (per-sample
    seeds, thread-count independent); other models loop the Python sampler.
    Censored realizations are excluded from the mean but counted.
    """
    ss = np.random.SeedSequence(seed)
    sample_seeds = ss.generate_state(n_samples, dtype=np.uint64)
    if _single_step_1d(model):
        from . import _ssa_kernels as k
        if workers is not None:
            import numba
            old = numba.get_num_threads()
            numba.set_num_threads(max(1, int(workers)))
        try:
            inv_a0, p_up = build_rate_tables(model)
            x0i = int(np.atleast_1d(x0)[0])
            use_gamma = math.isinf(t_max)
            raw = k.extinction_times_batch(inv_a0, p_up, x0i, sample_seeds,
                                           t_max, use_gamma)
        finally:
            if workers is not None:
                numba.set_num_threads(old)
        if np.any(raw == k.STATUS_FROZEN):
            raise RuntimeError("frozen state reached (all rates zero, not absorbing)")
        if np.any(raw == k.STATUS_OVERFLOW):
            raise RuntimeError("state exceeded rate table")
        censored = int(np.sum(raw == k.STATUS_CENSORED))
        times = raw[raw >= 0.0]
    else:
        times_list = []
        censored = 0
        for s in sample_seeds:
            tr = gillespie(model, x0, t_max=t_max, seed=int(s), record=False)
            if tr.terminal == "absorbed":
                times_list.append(tr.final_time)
            elif tr.terminal == "frozen":
                raise RuntimeError("frozen state reached (all rates zero, not absorbing)")
            else:
                censored += 1
        times = np.asarray(times_list)
    if times.size == 0:
        raise RuntimeError("all realizations censored: t_max too small")
    summary = EnsembleSummary.from_samples(times, n_censored=censored, seed=seed)
    summary.extra = {"ln_mean": math.log(summary.mean)}
    return summary


def exact_mte_1d(model, x0):
    """Exact mean absorption time of the 1D chain by a tridiagonal solve.

    Independent oracle for the sampled ensembles: solves the first-passage
    recursion a_up (tau_{X+1} - tau_X) + a_dn (tau_{X-1} - tau_X) = -1 with
    tau_0 = 0 and a reflecting table top.
    """
    from scipy.linalg import solve_banded
    inv_a0, p_up = build_rate_tables(model)
    with np.errstate(divide="ignore"):
        a0 = np.where(inv_a0 > 0, 1.0 / np.where(inv_a0 > 0, inv_a0, 1.0), 0.0)
    a_up = p_up * a0
    a_dn = a0 - a_up
    N = len(a0) - 1
    m = N
    ab = np.zeros((3, m))
    for X in range(1, N + 1):
        j = X - 1
        ab[1, j] = -(a_up[X] + a_dn[X])
        if j > 0:
            ab[2, j - 1] = a_dn[X]
        if j < m - 1:
            ab[0, j + 1] = a_up[X]
    tau = solve_banded((1, 1), ab, -np.ones(m))
    x0i = int(np.atleast_1d(x0)[0])
    return float(tau[x0i - 1])
