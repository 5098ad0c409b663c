"""Model abstractions: continuous-noise diffusions and discrete jump processes.

Evaluator convention: drift/diffusion/rate callables are pure functions of
the state and accept numpy arrays with the state in the last axis, so the
engines can evaluate whole ensembles or whole paths in one call.
"""

import numpy as np
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Equilibrium:
    """A named fixed point of the deterministic flow."""
    label: str
    state: np.ndarray
    stability: str  # "stable" | "saddle" | "unstable"

    def __post_init__(self):
        object.__setattr__(self, "state", np.atleast_1d(np.asarray(self.state, dtype=float)))


@dataclass(frozen=True)
class DiffusionModel:
    """SDE  xdot = f(x) + sigma(x) eta,  E[deta deta'] = D I dt.

    Parameters
    ----------
    dim : int
        State dimension.
    drift : callable
        f(x), maps (..., dim) -> (..., dim).
    diffusion : callable
        sigma(x), maps (..., dim) -> (..., dim, noise_dim).
    noise_dim : int
        Number of independent noise channels.
    noise_intensity : float
        Noise intensity D multiplying the identity in the increment
        covariance.
    domain : callable or None
        Predicate x -> bool array; True means inside Omega.
    equilibria : list of Equilibrium
    nondegenerate : bool
        Promise that a(x) = sigma sigma' is positive definite on the domain.
    """
    dim: int
    drift: callable
    diffusion: callable
    noise_dim: int
    noise_intensity: float
    domain: callable = None
    equilibria: tuple = ()
    nondegenerate: bool = True
    name: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1 or self.noise_dim < 1:
            raise ValueError("dim and noise_dim must be positive")
        if self.noise_intensity < 0:
            raise ValueError("noise intensity D must be nonnegative")

    def a(self, x):
        """Diffusion tensor a(x) = sigma(x) sigma(x)', shape (..., dim, dim)."""
        s = self.diffusion(np.asarray(x, dtype=float))
        return s @ np.swapaxes(s, -1, -2)

    def equilibrium(self, label):
        for eq in self.equilibria:
            if eq.label == label:
                return eq
        raise KeyError(f"no equilibrium labelled {label!r}")


@dataclass(frozen=True)
class Reaction:
    """One jump channel of a population model.

    The transition rate at integer population X admits the expansion
    W(X) = K w(X/K) + u(X/K) + O(1/K).  `exact_rate`, when given, evaluates
    W(X) exactly as written for the model (used by the Gillespie engine);
    otherwise the engine reconstructs K w + u and clips at zero.
    """
    increment: np.ndarray
    w: callable
    u: callable = None
    exact_rate: callable = None
    w_prime: callable = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "increment",
                           np.atleast_1d(np.asarray(self.increment, dtype=np.int64)))


@dataclass(frozen=True)
class JumpModel:
    """Master-equation model with scaled rates w_r, u_r and system size K."""
    dim: int
    reactions: tuple
    system_size: float
    absorbing_states: tuple = ()
    equilibria: tuple = ()
    name: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.system_size <= 0:
            raise ValueError("system size K must be positive")
        object.__setattr__(self, "reactions", tuple(self.reactions))
        object.__setattr__(self, "absorbing_states",
                           tuple(np.atleast_1d(np.asarray(s, dtype=np.int64))
                                 for s in self.absorbing_states))

    def rates(self, X):
        """Exact transition rates at integer state X, in declared order."""
        X = np.asarray(X)
        out = np.empty(len(self.reactions))
        for i, r in enumerate(self.reactions):
            if r.exact_rate is not None:
                out[i] = r.exact_rate(X)
            else:
                x = X / self.system_size
                w = self.system_size * r.w(x) + (r.u(x) if r.u is not None else 0.0)
                out[i] = max(w, 0.0)
        return out

    def mean_field(self, x):
        """Rescaled deterministic rate  xdot = sum_r r w_r(x)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(np.broadcast_shapes(x.shape, (self.dim,)) if x.ndim else (self.dim,))
        if self.dim == 1:
            out = np.zeros_like(x, dtype=float)
            for r in self.reactions:
                out = out + r.increment[0] * r.w(x)
            return out
        for r in self.reactions:
            out = out + r.increment * r.w(x)
        return out

    def is_absorbing(self, X):
        X = np.atleast_1d(np.asarray(X, dtype=np.int64))
        return any(np.array_equal(X, s) for s in self.absorbing_states)

    def equilibrium(self, label):
        for eq in self.equilibria:
            if eq.label == label:
                return eq
        raise KeyError(f"no equilibrium labelled {label!r}")


@dataclass(frozen=True)
class PotentialModel:
    """Scalar gradient system  xdot = -U'(x) + eta.

    Carries the potential with its first two derivatives and the locations
    of the well bottom and barrier top.
    """
    potential: callable
    dU: callable
    d2U: callable
    x_min: float
    x_max: float
    name: str = ""
    params: dict = field(default_factory=dict)

    @property
    def barrier_height(self):
        return float(self.potential(self.x_max) - self.potential(self.x_min))

    def to_diffusion(self, D, domain=None):
        """Induced DiffusionModel with additive unit noise."""
        dU = self.dU
        stable = Equilibrium("well", [self.x_min], "stable")
        saddle = Equilibrium("barrier", [self.x_max], "saddle")
        return DiffusionModel(
            dim=1,
            drift=lambda x: -dU(x),
            diffusion=lambda x: np.ones(np.shape(x) + (1,)),
            noise_dim=1,
            noise_intensity=D,
            domain=domain,
            equilibria=(stable, saddle),
            name=self.name,
            params=dict(self.params, D=D),
        )
