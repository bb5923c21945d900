"""Reduced energy ``J``, its derivative, and the two-field functional ``F``.

All integrals use the grid quadrature (nodal terms) or Parseval (operator
terms).  ``phi_u`` solves the discrete Galerkin field equation, so the
discrete ``J`` equals ``F(u, phi_u)`` and its derivative is ``F'_u(u, phi_u)``
exactly, not only in the continuum limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .electrostatic import DEFAULT_PHI_TOL, PhiSolution, solve_phi
from .errors import GridMismatchError
from .radial import (
    OperatorSymbol,
    RadialField,
    bilinear_b_alpha,
    grad_norm_sq,
    h1_norm_sq,
    lq_norm,
)

__all__ = [
    "EnergyBreakdown",
    "Gradient",
    "energy_J",
    "evaluate",
    "full_F",
    "gradient_J",
    "dual_action",
    "preconditioner_shift",
    "sobolev_constant",
    "geometry_radius",
    "sphere_infimum",
]


@dataclass
class EnergyBreakdown:
    quadratic: float
    coupling: float
    nonlinear: float
    total: float

    def to_dict(self) -> dict:
        return {
            "quadratic": self.quadratic,
            "coupling": self.coupling,
            "nonlinear": self.nonlinear,
            "total": self.total,
        }


def _vshift(params, grid):
    return params.potential(grid.r) - params.omega ** 2


def evaluate(u: RadialField, params, phi: PhiSolution | None = None, phi_tol: float = DEFAULT_PHI_TOL):
    """Energy breakdown of ``u`` together with the ``phi_u`` solve used for it."""
    if phi is None:
        phi = solve_phi(u, params.omega, tol=phi_tol)
    grid = u.grid
    quad_v, phi_u2, phi2_u2, power = kernels.energy_sums(
        u.values, phi.phi.values, _vshift(params, grid), grid.weights, params.p
    )
    quadratic = 0.5 * bilinear_b_alpha(u, u, params) + 0.5 * quad_v
    # equals (omega/2) int phi_u u^2 once the field equation holds, and is
    # stationary in phi, so the phi solve error enters only at second order
    coupling = params.omega * phi_u2 - 0.5 * phi2_u2 - 0.5 * grad_norm_sq(phi.phi)
    nonlinear = -power / params.p
    total = quadratic + coupling + nonlinear
    return EnergyBreakdown(quadratic, coupling, nonlinear, total), phi


def energy_J(u: RadialField, params, phi_tol: float = DEFAULT_PHI_TOL) -> EnergyBreakdown:
    return evaluate(u, params, phi_tol=phi_tol)[0]


def full_F(u: RadialField, phi: RadialField, params) -> float:
    """``F(u, phi)`` for an arbitrary pair on one grid."""
    u._check(phi)
    grid = u.grid
    uv, pv = u.values, phi.values
    wq = grid.weights
    V = params.potential(grid.r)
    u2w = wq * uv * uv
    return (
        0.5 * bilinear_b_alpha(u, u, params)
        + 0.5 * float(np.sum(V * u2w))
        - 0.5 * float(np.sum((params.omega - pv) ** 2 * u2w))
        - kernels.power_sum(uv, wq, params.p) / params.p
        - 0.5 * grad_norm_sq(phi)
    )


def preconditioner_shift(params, grid) -> float:
    """Shift ``tau_P`` of the inner product ``sum (sigma_n + tau_P) a_n b_n``.

    ``max(1, 1 + gamma)``, raised further if needed so every ``sigma_n + tau_P``
    is at least 1.
    """
    from .spectrum import compute_gamma

    sigma = OperatorSymbol.for_params(grid, params).sigma
    return max(1.0, 1.0 + compute_gamma(params), 1.0 - float(sigma.min()))


class Gradient:
    """Derivative ``J'(u)`` as a dual vector and as a Riesz representative.

    ``dual[n] = J'(u)[phi_n]`` for the basis functions ``phi_n``; ``field`` is
    the representative in the shifted inner product, and ``norm`` its norm
    (equal to the dual norm of ``J'(u)``).
    """

    def __init__(self, grid, dual, weight, tau):
        self.grid = grid
        self.dual = dual
        self.weight = weight
        self.tau = tau
        self._field = None

    @property
    def field(self) -> RadialField:
        if self._field is None:
            self._field = RadialField(self.grid, modes=self.dual / (self.grid.mode_norm * self.weight))
        return self._field

    @property
    def norm(self) -> float:
        return math.sqrt(float(np.sum(self.dual * self.dual / self.weight)) / self.grid.mode_norm)

    def action(self, v: RadialField) -> float:
        """``J'(u)[v]``."""
        if v.grid != self.grid:
            raise GridMismatchError("direction lives on a different grid")
        return float(np.sum(self.dual * v.modes))

    def inner(self, a: RadialField, b: RadialField) -> float:
        return self.grid.mode_norm * float(np.sum(self.weight * a.modes * b.modes))


def _dual_vector(u, phi_values, params, sigma):
    grid = u.grid
    f = kernels.gradient_density(u.values, phi_values, _vshift(params, grid), params.omega, params.p)
    return grid.mode_norm * (sigma * u.modes + grid.to_modes(f))


def gradient_J(u: RadialField, params, phi: PhiSolution | None = None, tau: float | None = None,
               phi_tol: float = DEFAULT_PHI_TOL) -> Gradient:
    grid = u.grid
    if phi is None:
        phi = solve_phi(u, params.omega, tol=phi_tol)
    if tau is None:
        tau = preconditioner_shift(params, grid)
    sigma = OperatorSymbol.for_params(grid, params).sigma
    dual = _dual_vector(u, phi.phi.values, params, sigma)
    return Gradient(grid, dual, sigma + tau, tau)


def dual_action(u: RadialField, v: RadialField, params, phi_tol: float = DEFAULT_PHI_TOL) -> float:
    """``J'(u)[v]``."""
    return gradient_J(u, params, phi_tol=phi_tol, tau=1.0).action(v)


def sobolev_constant(fields, p: float) -> float:
    """Discrete estimate ``max ||u||_p / ||u||_H1`` over the given fields."""
    return max(lq_norm(u, p) / math.sqrt(h1_norm_sq(u)) for u in fields)


def geometry_radius(cmin: float, cp: float, p: float) -> float:
    """Radius bound ``(p cmin / (2 C_p^p))^(1/(p-2))`` below which ``J > 0`` on the sphere."""
    return (p * cmin / (2.0 * cp ** p)) ** (1.0 / (p - 2.0))


def sphere_infimum(params, directions, rho: float) -> float:
    """``min J(rho u / ||u||_H1)`` over the given directions."""
    vals = []
    for u in directions:
        scaled = (rho / math.sqrt(h1_norm_sq(u))) * u
        vals.append(energy_J(scaled, params).total)
    return min(vals)
