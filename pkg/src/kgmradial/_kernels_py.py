"""Pure numpy collocation kernels (reference backend)."""

import numpy as np


def energy_sums(u, phi, vshift, w, p):
    """Return ``sum w u^2 vshift``, ``sum w u^2 phi``, ``sum w u^2 phi^2`` and ``sum w |u|^p``."""
    u2w = w * u * u
    return (
        float(np.sum(vshift * u2w)),
        float(np.sum(phi * u2w)),
        float(np.sum(phi * phi * u2w)),
        float(np.sum(w * np.abs(u) ** p)),
    )


def gradient_density(u, phi, vshift, omega, p):
    """Nodal ``(vshift + 2 omega phi - phi^2) u - |u|^(p-2) u``."""
    return (vshift + (2.0 * omega - phi) * phi) * u - np.abs(u) ** (p - 2.0) * u


def power_sum(u, w, p):
    return float(np.sum(w * np.abs(u) ** p))


def ratio_grid_min(k, t, s):
    """``min_k (k^2 + t) k^(-2s)`` over the supplied grid."""
    return float(np.min((k * k + t) * k ** (-2.0 * s)))
