"""Backend selection for the collocation kernels.

The compiled extension is used when it imports; setting the environment
variable ``KGMRADIAL_PURE_PYTHON=1`` forces the numpy fallback.
"""

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("KGMRADIAL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py


def _c(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def energy_sums(u, phi, vshift, w, p, backend=None):
    impl = _kernels_py if backend == "python" else _impl
    return tuple(float(x) for x in impl.energy_sums(_c(u), _c(phi), _c(vshift), _c(w), float(p)))


def gradient_density(u, phi, vshift, omega, p, backend=None):
    impl = _kernels_py if backend == "python" else _impl
    return np.asarray(impl.gradient_density(_c(u), _c(phi), _c(vshift), float(omega), float(p)))


def power_sum(u, w, p, backend=None):
    impl = _kernels_py if backend == "python" else _impl
    return float(impl.power_sum(_c(u), _c(w), float(p)))


def ratio_grid_min(k, t, s, backend=None):
    impl = _kernels_py if backend == "python" else _impl
    return float(impl.ratio_grid_min(_c(k), float(t), float(s)))
