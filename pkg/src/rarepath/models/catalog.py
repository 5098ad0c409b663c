"""Built-in example systems with their exact parameterizations.

Diffusion examples: cubic_well, quartic_well, ou, laser3d, filter3d.
Jump examples: sis, allee.

Every builder validates its parameters against the schema in `SCHEMAS`;
unknown or missing entries raise ValueError with the field named, which the
CLI maps to exit code 2.
"""

import numpy as np

from .base import DiffusionModel, JumpModel, PotentialModel, Reaction, Equilibrium

_REQUIRED = object()

SCHEMAS = {
    "cubic_well": {"d": 0.25},
    "quartic_well": {"d": 0.25},
    "ou": {"theta": 1.0, "d": 1.0},
    "sis": {"r0": _REQUIRED, "k": _REQUIRED},
    "allee": {"mu": 0.2, "alpha": 1.5, "sigma_c": 3.0, "k": _REQUIRED},
    "laser3d": {"c0": 1.0, "c1": 0.1, "c2": 0.2, "d1": 0.5, "d2": 0.1,
                "omega": 1.0, "d": 0.05},
    "filter3d": {"c1": -0.1, "c2": 0.3, "d": 0.05},
}


def _check_params(name, params):
    schema = SCHEMAS[name]
    params = {k.lower(): v for k, v in params.items()}
    unknown = set(params) - set(schema)
    if unknown:
        raise ValueError(f"{name}: unknown parameter(s) {sorted(unknown)}")
    out = {}
    for key, default in schema.items():
        if key in params:
            out[key] = float(params[key])
        elif default is _REQUIRED:
            raise ValueError(f"{name}: missing required parameter '{key}'")
        else:
            out[key] = float(default)
    return out


def cubic_well_potential():
    """U(x) = -x^3 + (3/4)x: single well at -1/2 with barrier 1/2 at +1/2."""
    return PotentialModel(
        potential=lambda x: -x**3 + 0.75 * x,
        dU=lambda x: -3.0 * x**2 + 0.75,
        d2U=lambda x: -6.0 * x,
        x_min=-0.5,
        x_max=0.5,
        name="cubic_well",
    )


def quartic_well_potential():
    """Symmetric double well U(x) = x^4/4 - x^2/2 with barrier height 1/4."""
    return PotentialModel(
        potential=lambda x: x**4 / 4 - x**2 / 2,
        dU=lambda x: x**3 - x,
        d2U=lambda x: 3.0 * x**2 - 1.0,
        x_min=-1.0,
        x_max=0.0,
        name="quartic_well",
    )


# Default escape domain for the cubic well.  The right edge sits past the
# saddle so recrossings are counted, but close enough that the downhill
# ride contributes negligibly to the exit time; the left edge approximates
# -infinity (the drift grows quadratically there).
CUBIC_WELL_DOMAIN = (-2.0, 0.75)


def _interval_domain(lo, hi):
    def inside(x):
        x = np.asarray(x)
        v = x[..., 0] if x.ndim and x.shape[-1:] == (1,) else x
        return (v > lo) & (v < hi)
    return inside


def _build_cubic_well(p):
    pot = cubic_well_potential()
    return pot.to_diffusion(p["d"], domain=_interval_domain(*CUBIC_WELL_DOMAIN)), pot


def _build_quartic_well(p):
    pot = quartic_well_potential()
    return pot.to_diffusion(p["d"], domain=_interval_domain(-2.5, 2.5)), pot


def _build_ou(p):
    th = p["theta"]
    if th <= 0:
        raise ValueError("ou: theta must be positive")
    return DiffusionModel(
        dim=1,
        drift=lambda x: -th * x,
        diffusion=lambda x: np.ones(np.shape(x) + (1,)),
        noise_dim=1,
        noise_intensity=p["d"],
        equilibria=(Equilibrium("origin", [0.0], "stable"),),
        name="ou",
        params=p,
    ), None


def _build_sis(p):
    r0, K = p["r0"], p["k"]
    if r0 <= 0:
        raise ValueError("sis: r0 must be positive")
    if K <= 0:
        raise ValueError("sis: k must be positive")
    infection = Reaction(
        increment=[+1],
        w=lambda i: r0 * (1.0 - i) * i,
        u=lambda i: np.zeros_like(np.asarray(i, dtype=float)),
        exact_rate=lambda X: (r0 / K) * X[0] * max(K - X[0], 0.0),
        w_prime=lambda i: r0 * (1.0 - 2.0 * i),
        label="infection",
    )
    recovery = Reaction(
        increment=[-1],
        w=lambda i: np.asarray(i, dtype=float),
        u=lambda i: np.zeros_like(np.asarray(i, dtype=float)),
        exact_rate=lambda X: float(X[0]),
        w_prime=lambda i: np.ones_like(np.asarray(i, dtype=float)),
        label="recovery",
    )
    eqs = [Equilibrium("extinct", [0.0], "unstable" if r0 > 1 else "stable")]
    if r0 > 1:
        eqs.append(Equilibrium("endemic", [1.0 - 1.0 / r0], "stable"))
    return JumpModel(
        dim=1,
        reactions=(infection, recovery),
        system_size=K,
        absorbing_states=([0],),
        equilibria=tuple(eqs),
        name="sis",
        params=p,
    ), eqs


def _build_allee(p):
    mu, alpha, sc, K = p["mu"], p["alpha"], p["sigma_c"], p["k"]
    for key in ("mu", "alpha", "sigma_c", "k"):
        if p[key] <= 0:
            raise ValueError(f"allee: {key} must be positive")
    disc = 9 * alpha**2 - 24 * sc * mu
    if disc < 0:
        raise ValueError("allee: 9 alpha^2 - 24 sigma_c mu < 0, no interior fixed points")
    x1 = (3 * alpha - np.sqrt(disc)) / (2 * sc)
    x2 = (3 * alpha + np.sqrt(disc)) / (2 * sc)
    death = Reaction(
        increment=[-1],
        w=lambda x: mu * np.asarray(x, dtype=float),
        u=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        exact_rate=lambda X: mu * X[0],
        w_prime=lambda x: mu * np.ones_like(np.asarray(x, dtype=float)),
        label="death",
    )
    birth = Reaction(
        increment=[+1],
        w=lambda x: alpha * np.asarray(x, dtype=float)**2 / 2,
        u=lambda x: -alpha * np.asarray(x, dtype=float) / 2,
        exact_rate=lambda X: alpha * X[0] * (X[0] - 1) / (2 * K),
        w_prime=lambda x: alpha * np.asarray(x, dtype=float),
        label="birth",
    )
    overcrowding = Reaction(
        increment=[-1],
        w=lambda x: sc * np.asarray(x, dtype=float)**3 / 6,
        u=lambda x: -sc * np.asarray(x, dtype=float)**2 / 2,
        exact_rate=lambda X: sc * X[0] * (X[0] - 1) * (X[0] - 2) / (6 * K**2),
        w_prime=lambda x: sc * np.asarray(x, dtype=float)**2 / 2,
        label="overcrowding",
    )
    eqs = [
        Equilibrium("extinct", [0.0], "stable"),
        Equilibrium("threshold", [x1], "unstable"),
        Equilibrium("carrying_capacity", [x2], "stable"),
    ]
    return JumpModel(
        dim=1,
        reactions=(death, birth, overcrowding),
        system_size=K,
        absorbing_states=([0],),
        equilibria=tuple(eqs),
        name="allee",
        params=p,
    ), eqs


def laser_drift(p):
    c0, c1, c2, d1, d2, om = p["c0"], p["c1"], p["c2"], p["d1"], p["d2"], p["omega"]

    def drift(x):
        x = np.asarray(x, dtype=float)
        x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
        f1 = (-2 * c1 * x1 + (4 / 3 * d1 - 2 / 3 * c2) * x1**3
              - 16 / 15 * d2 * x1**5 - 2 * c2 * x1 * x2**2)
        f2 = (-4 / 3 * c2 * x1**2 * x2
              - np.pi * c0 * om**2 / np.sinh(np.pi * om / (2 * x1))
              * np.sin(om * x3) / (2 * x1**3))
        f3 = x2
        return np.stack([f1, f2, f3], axis=-1)

    return drift


def filter_drift(p):
    c1, c2 = p["c1"], p["c2"]

    def drift(x):
        x = np.asarray(x, dtype=float)
        x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
        f1 = -2 * c1 * x1 - 2 / 3 * c2 * x1**3 - 2 * c2 * x1 * x2**2
        f2 = -4 / 3 * c2 * x1**2 * x2
        f3 = x2
        return np.stack([f1, f2, f3], axis=-1)

    return drift


def soliton_diffusion(x):
    """Shared diffusivity matrix of the reduced soliton models (laser/filter)."""
    x = np.asarray(x, dtype=float)
    x1, x3 = x[..., 0], x[..., 2]
    s = np.zeros(x.shape[:-1] + (3, 3))
    s[..., 0, 0] = np.sqrt(x1)
    s[..., 1, 1] = np.sqrt(x1 / 3)
    s[..., 2, 0] = -x3 / np.sqrt(x1)
    s[..., 2, 2] = np.sqrt(np.pi**2 / (12 * x1**3) + x3**2 / x1)
    return s


def _build_laser3d(p):
    from .laser import laser_equilibria
    eqs = laser_equilibria(p, n_values=(0, 1))
    return DiffusionModel(
        dim=3,
        drift=laser_drift(p),
        diffusion=soliton_diffusion,
        noise_dim=3,
        noise_intensity=p["d"],
        equilibria=tuple(eqs),
        name="laser3d",
        params=p,
    ), None


def _build_filter3d(p):
    c1, c2 = p["c1"], p["c2"]
    if c1 >= 0:
        raise ValueError("filter3d: compensatory gain requires c1 < 0")
    if c2 <= 0:
        raise ValueError("filter3d: c2 must be positive")
    A0 = np.sqrt(-3 * c1 / c2)
    eqs = (Equilibrium("pulse", [A0, 0.0, 0.0], "stable"),)
    return DiffusionModel(
        dim=3,
        drift=filter_drift(p),
        diffusion=soliton_diffusion,
        noise_dim=3,
        noise_intensity=p["d"],
        equilibria=eqs,
        name="filter3d",
        params=p,
    ), None


_BUILDERS = {
    "cubic_well": _build_cubic_well,
    "quartic_well": _build_quartic_well,
    "ou": _build_ou,
    "sis": _build_sis,
    "allee": _build_allee,
    "laser3d": _build_laser3d,
    "filter3d": _build_filter3d,
}


def builtin_model(name, params=None, **kw):
    """Construct a built-in model by name.

    Parameters may be given as a mapping and/or keyword arguments; keywords
    win.  Raises ValueError for an unknown name, an unknown parameter, or a
    missing required parameter.
    """
    key = name.lower()
    if key not in _BUILDERS:
        raise ValueError(f"unknown model '{name}'; available: {sorted(_BUILDERS)}")
    merged = dict(params or {})
    merged.update(kw)
    p = _check_params(key, merged)
    model, _ = _BUILDERS[key](p)
    return model


def builtin_potential(name, **kw):
    """The PotentialModel behind a potential-well builtin."""
    key = name.lower()
    if key == "cubic_well":
        return cubic_well_potential()
    if key == "quartic_well":
        return quartic_well_potential()
    raise ValueError(f"'{name}' is not a potential-well model")
