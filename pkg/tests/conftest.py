"""Shared helpers: config builders and the brute-force quadrature oracle."""

import numpy as np

from qcollide.config import parse_config


def make_config(**overrides):
    """SimulationConfig from a compact dict, mirror gamma=0.5 tau=1 by default."""
    data = {
        "coupling": {"shape": "mirror", "gamma": 0.5, "phi": 0.0, "tau": 1.0},
        "omega0": 0.0,
        "dt": 1 / 64,
        "t_max": 4.0,
    }
    coupling = overrides.pop("coupling", None)
    if coupling is not None:
        data["coupling"] = coupling
    if "n_steps" in overrides:
        data.pop("t_max")
    data.update(overrides)
    return parse_config(data)


def brute_force_lag_weight(kernel, support, lag, dt, nodes=320):
    """Independent cell average of a smooth kernel part for one integer lag.

    Dense 2-D iterated trapezoid over the (n, m) grid cell with the inner
    integration limits clipped exactly to the kernel support band, so the
    integrand stays smooth.  ``nodes`` trapezoid intervals per direction.
    """
    t_primes = np.linspace(0.0, dt, nodes + 1)
    outer = np.empty(nodes + 1, dtype=complex)
    for j, tp in enumerate(t_primes):
        lo = max(lag * dt, tp)
        hi = min((lag + 1) * dt, tp + support)
        if hi <= lo:
            outer[j] = 0.0
            continue
        ss = np.linspace(lo, hi, nodes + 1)
        vals = np.array([kernel(s - tp) for s in ss], dtype=complex)
        outer[j] = np.trapezoid(vals, ss)
    return complex(np.trapezoid(outer, t_primes) / dt)
