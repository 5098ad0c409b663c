"""Discretized optimal-path containers and the action functional."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class DiscretizedPath:
    """A solver-produced path sample.

    parameterization is "time" (grid holds t_k) or "arclength" (grid holds
    normalized arclength fractions, with reconstructed times in `times`
    when available).  States are (N+1, dim); momenta optional (N+1, dim).
    """
    parameterization: str
    grid: np.ndarray
    states: np.ndarray
    momenta: np.ndarray = None
    times: np.ndarray = None

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        if self.states.shape[0] != self.grid.shape[0]:
            self.states = self.states.T
        if self.momenta is not None:
            self.momenta = np.atleast_2d(np.asarray(self.momenta, dtype=float))
            if self.momenta.shape[0] != self.grid.shape[0]:
                self.momenta = self.momenta.T
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("path grid must be strictly increasing")

    @property
    def n_segments(self):
        return len(self.grid) - 1

    @property
    def dim(self):
        return self.states.shape[1]

    @property
    def step_sizes(self):
        return np.diff(self.grid)

    def velocities(self):
        """Central-difference velocities on the grid (one-sided at the ends)."""
        if self.parameterization != "time":
            raise ValueError("velocities need a time parameterization")
        return np.gradient(self.states, self.grid, axis=0)


@dataclass
class ActionReport:
    """Result of a path solve."""
    action: float
    path: DiscretizedPath
    residual: float
    iterations: int
    converged: bool
    info: dict = field(default_factory=dict)


def action_functional(path, model):
    """Freidlin-Wentzell action  S = 1/2 int (xdot-f)' a^{-1} (xdot-f) dt.

    Composite trapezoid on the path grid with central-difference velocity
    reconstruction.  Requires a time-parameterized path.
    """
    if isinstance(path, tuple):
        t, x = path
        path = DiscretizedPath("time", t, x)
    v = path.velocities()
    f = model.drift(path.states)
    a = model.a(path.states)
    z = v - f
    if not np.all(np.isfinite(z)):
        raise ValueError("non-finite velocities on path")
    zsolve = np.linalg.solve(a, z[..., None])[..., 0]
    lagr = 0.5 * np.einsum("ni,ni->n", z, zsolve)
    return float(np.trapezoid(lagr, path.grid))
