"""Radial sine-spectral discretization of the ball ``|x| < R`` in three dimensions.

A radial function is expanded as ``u(r) = sum_n c_n sin(k_n r) / r`` with
``k_n = n pi / R``.  Each basis function is an eigenfunction of ``-Delta``
with eigenvalue ``k_n^2`` and Dirichlet data at ``r = R``, and
``w(r) = r u(r)`` is a plain sine series, so nodal values and coefficients are
linked by a type-I discrete sine transform on the nodes ``r_j = j R/(N+1)``:

    c_n = 2/(N+1) sum_j w_j sin(pi n j/(N+1)),   w_j = sum_n c_n sin(pi n j/(N+1)).

Every basis function has ``||phi_n||_2^2 = 2 pi R`` (``MODE_NORM``), and the
nodal quadrature ``w_j = 4 pi r_j^2 R/(N+1)`` reproduces that Parseval
identity exactly.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft

from . import kernels
from .errors import DomainError, GridMismatchError

__all__ = [
    "RadialGrid",
    "RadialField",
    "OperatorSymbol",
    "make_grid",
    "transform",
    "apply_operator",
    "bilinear_b_alpha",
    "norms",
    "lq_norm",
    "l2_norm_sq",
    "grad_norm_sq",
    "h1_norm_sq",
    "w_norm_sq",
    "mode_field",
]


def _workers():
    try:
        return max(1, int(os.environ.get("THREADS", "1")))
    except ValueError:
        return 1


def _dst(x):
    return scipy.fft.dst(x, type=1, workers=_workers())


def _readonly(a):
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RadialGrid:
    R: float
    N: int

    def __post_init__(self):
        if not (np.isfinite(self.R) and self.R > 0):
            raise DomainError(f"R must be positive, got {self.R}")
        if int(self.N) != self.N or self.N < 8:
            raise DomainError(f"N must be an integer >= 8, got {self.N}")
        object.__setattr__(self, "R", float(self.R))
        object.__setattr__(self, "N", int(self.N))

    @property
    def h(self) -> float:
        return self.R / (self.N + 1)

    @property
    def mode_norm(self) -> float:
        """``||sin(k_n r)/r||_2^2 = 2 pi R`` for every mode."""
        return 2.0 * math.pi * self.R

    @cached_property
    def r(self) -> np.ndarray:
        return _readonly(np.arange(1, self.N + 1) * self.h)

    @cached_property
    def k(self) -> np.ndarray:
        return _readonly(np.arange(1, self.N + 1) * (math.pi / self.R))

    @cached_property
    def weights(self) -> np.ndarray:
        return _readonly(4.0 * math.pi * self.r ** 2 * self.h)

    def to_modes(self, values: np.ndarray) -> np.ndarray:
        return _dst(self.r * values) / (self.N + 1)

    def to_values(self, modes: np.ndarray) -> np.ndarray:
        return 0.5 * _dst(modes) / self.r

    def project(self, nodal: np.ndarray) -> np.ndarray:
        """``(int f phi_n dx)_n`` for nodal ``f`` under the grid quadrature."""
        return self.mode_norm * self.to_modes(nodal)

    def metadata(self) -> dict:
        return {"R": self.R, "N": self.N}


def make_grid(R: float, N: int) -> RadialGrid:
    return RadialGrid(R, N)


class RadialField:
    """A radial function held as nodal values and/or sine-mode coefficients.

    ``current`` names the representation that was set last; the other one is
    computed on first access and cached. Fields are treated as immutable
    values: arithmetic returns new fields.
    """

    __slots__ = ("grid", "_values", "_modes", "current")

    def __init__(self, grid: RadialGrid, values=None, modes=None):
        if (values is None) == (modes is None):
            raise ValueError("give exactly one of values or modes")
        self.grid = grid
        self._values = None
        self._modes = None
        if values is not None:
            values = np.array(values, dtype=float)
            if values.shape != (grid.N,):
                raise GridMismatchError(f"expected {grid.N} nodal values, got shape {values.shape}")
            self._values = values
            self.current = "values"
        else:
            modes = np.array(modes, dtype=float)
            if modes.shape != (grid.N,):
                raise GridMismatchError(f"expected {grid.N} modes, got shape {modes.shape}")
            self._modes = modes
            self.current = "modes"

    @classmethod
    def from_function(cls, grid: RadialGrid, func) -> "RadialField":
        return cls(grid, values=func(grid.r))

    @classmethod
    def zeros(cls, grid: RadialGrid) -> "RadialField":
        return cls(grid, modes=np.zeros(grid.N))

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = self.grid.to_values(self._modes)
        return self._values

    @property
    def modes(self) -> np.ndarray:
        if self._modes is None:
            self._modes = self.grid.to_modes(self._values)
        return self._modes

    def _check(self, other):
        if self.grid != other.grid:
            raise GridMismatchError(f"fields live on different grids: {self.grid} vs {other.grid}")

    def __add__(self, other):
        self._check(other)
        return RadialField(self.grid, modes=self.modes + other.modes)

    def __sub__(self, other):
        self._check(other)
        return RadialField(self.grid, modes=self.modes - other.modes)

    def __mul__(self, a):
        return RadialField(self.grid, modes=float(a) * self.modes)

    __rmul__ = __mul__

    def __neg__(self):
        return RadialField(self.grid, modes=-self.modes)

    def is_zero(self) -> bool:
        return not np.any(self.modes)

    def to_csv(self, path, header=("r", "u")) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(header)
            for r, v in zip(self.grid.r, self.values):
                wr.writerow((repr(float(r)), repr(float(v))))

    def to_json_dict(self) -> dict:
        return {**self.grid.metadata(), "modes": [float(c) for c in self.modes]}

    @classmethod
    def from_json_dict(cls, data: dict) -> "RadialField":
        return cls(make_grid(data["R"], data["N"]), modes=data["modes"])

    @classmethod
    def from_csv(cls, path, grid: RadialGrid) -> "RadialField":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))[1:]
        r = np.array([float(a) for a, _ in rows])
        if r.shape != grid.r.shape or not np.allclose(r, grid.r, rtol=1e-14, atol=0.0):
            raise GridMismatchError("CSV nodes do not match the grid")
        return cls(grid, values=[float(b) for _, b in rows])

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict())


def mode_field(grid: RadialGrid, n: int, amplitude: float = 1.0) -> RadialField:
    """The basis function ``amplitude * sin(k_n r)/r`` (1-based ``n``)."""
    c = np.zeros(grid.N)
    c[n - 1] = amplitude
    return RadialField(grid, modes=c)


def transform(field: RadialField, target: str) -> RadialField:
    """Return a field whose current representation is ``target``."""
    if target not in ("modes", "values"):
        raise ValueError(f"target must be 'modes' or 'values', got {target!r}")
    if field.current == target:
        return field
    if target == "modes":
        return RadialField(field.grid, modes=field.grid.to_modes(field.values))
    return RadialField(field.grid, values=field.grid.to_values(field.modes))


class OperatorSymbol:
    """Per-mode multiplier ``sigma_n = k_n^2 + alpha k_n^(2s)`` plus a shift."""

    def __init__(self, grid: RadialGrid, s: float, alpha: float, shift: float = 0.0):
        self.grid = grid
        self.s = float(s)
        self.alpha = float(alpha)
        self.shift = float(shift)
        k = grid.k
        if self.alpha == 0.0:
            sigma = k * k
        else:
            sigma = k * k + self.alpha * k ** (2.0 * self.s)
        self.sigma = _readonly(sigma)

    @classmethod
    def for_params(cls, grid: RadialGrid, params, shift: float = 0.0) -> "OperatorSymbol":
        return cls(grid, params.s, params.alpha, shift)

    @property
    def values(self) -> np.ndarray:
        return self.sigma + self.shift if self.shift else self.sigma

    def shifted(self, tau: float) -> "OperatorSymbol":
        return OperatorSymbol(self.grid, self.s, self.alpha, tau)


def apply_operator(field: RadialField, symbol: OperatorSymbol) -> RadialField:
    if field.grid != symbol.grid:
        raise GridMismatchError("field and symbol live on different grids")
    return RadialField(field.grid, modes=symbol.values * field.modes)


def _symbol(grid, params_or_symbol):
    if isinstance(params_or_symbol, OperatorSymbol):
        if params_or_symbol.grid != grid:
            raise GridMismatchError("symbol lives on a different grid")
        return params_or_symbol.sigma
    return OperatorSymbol.for_params(grid, params_or_symbol).sigma


def bilinear_b_alpha(u: RadialField, v: RadialField, params) -> float:
    """``int grad u . grad v + alpha int (-Delta)^(s/2) u (-Delta)^(s/2) v``.

    ``params`` may be a ``ModelParams`` or a prebuilt ``OperatorSymbol``.
    Summed as ``sigma * (c_u * c_v)`` so that swapping the arguments is exact.
    """
    u._check(v)
    sigma = _symbol(u.grid, params)
    return u.grid.mode_norm * float(np.sum(sigma * (u.modes * v.modes)))


def l2_norm_sq(u: RadialField, method: str = "parseval") -> float:
    if method == "parseval":
        return u.grid.mode_norm * float(np.sum(u.modes * u.modes))
    if method == "quadrature":
        return float(np.sum(u.grid.weights * u.values * u.values))
    raise ValueError(f"unknown method {method!r}")


def grad_norm_sq(u: RadialField) -> float:
    k = u.grid.k
    return u.grid.mode_norm * float(np.sum((k * u.modes) ** 2))


def h1_norm_sq(u: RadialField) -> float:
    k = u.grid.k
    return u.grid.mode_norm * float(np.sum((1.0 + k * k) * u.modes ** 2))


def w_norm_sq(u: RadialField, potential) -> float:
    """``||u||_H1^2 + int (V - V0) u^2``."""
    vv = potential(u.grid.r) - potential.V0
    return h1_norm_sq(u) + float(np.sum(u.grid.weights * vv * u.values ** 2))


def lq_norm(u: RadialField, q: float) -> float:
    if not 2.0 <= q <= 6.0:
        raise DomainError(f"q must lie in [2, 6], got {q}")
    return kernels.power_sum(u.values, u.grid.weights, q) ** (1.0 / q)


def norms(u: RadialField, q: float = 2.0, potential=None) -> dict:
    """L2, Lq, gradient, H1 and (with a potential) W norms of ``u``."""
    out = {
        "L2": math.sqrt(l2_norm_sq(u)),
        "Lq": lq_norm(u, q),
        "grad": math.sqrt(grad_norm_sq(u)),
        "H1": math.sqrt(h1_norm_sq(u)),
    }
    if potential is not None:
        out["W"] = math.sqrt(w_norm_sq(u, potential))
    return out
