"""Electrostatic reduction ``u -> phi_u``.

For fixed ``u`` the field equation ``-Delta phi = (omega - phi) u^2`` is the
linear, symmetric positive definite problem ``(-Delta + u^2) phi = omega u^2``.
In sine-mode coefficients ``a`` it reads

    k^2 a + P(u^2 phi(a)) = omega P(u^2),

with ``P`` the nodal-to-mode transform.  This is exactly the Galerkin system of
the weak equation under the grid quadrature, so ``phi`` is solved by
conjugate gradients preconditioned with the inverse Laplacian ``k^-2``.
``phi(R) = 0`` stands in for decay at infinity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalError
from .radial import RadialField, grad_norm_sq

__all__ = ["PhiSolution", "solve_phi", "phi_identity_residual", "DEFAULT_PHI_TOL"]

DEFAULT_PHI_TOL = 1e-13


@dataclass
class PhiSolution:
    phi: RadialField
    iterations: int
    residual: float
    history: list = field(default_factory=list, repr=False)


def _pcg(apply_A, b, precond, tol, max_iter):
    x = np.zeros_like(b)
    r = b.copy()
    bnorm = float(np.linalg.norm(b))
    z = precond * r
    d = z.copy()
    rz = float(r @ z)
    history = [1.0]
    for it in range(1, max_iter + 1):
        Ad = apply_A(d)
        step = rz / float(d @ Ad)
        x += step * d
        r -= step * Ad
        rel = float(np.linalg.norm(r)) / bnorm
        history.append(rel)
        if rel <= tol:
            return x, it, history
        z = precond * r
        rz_new = float(r @ z)
        d = z + (rz_new / rz) * d
        rz = rz_new
    return x, max_iter, history


def solve_phi(u: RadialField, omega: float, tol: float = DEFAULT_PHI_TOL, max_iter: int = 500) -> PhiSolution:
    """Solve ``-Delta phi + u^2 phi = omega u^2`` with Dirichlet data at ``R``.

    Returns a solution whose relative algebraic residual (Euclidean norm of the
    mode-space residual over that of the right-hand side) is at most ``tol``.
    Raises ``NumericalError`` with the residual history on non-convergence.
    """
    if not 0.0 < tol <= 1e-4:
        raise DomainError(f"tol must lie in (0, 1e-4], got {tol}")
    grid = u.grid
    uv = u.values
    if not np.all(np.isfinite(uv)):
        raise DomainError("u must be finite")
    u2 = uv * uv
    if not np.any(u2):
        return PhiSolution(RadialField.zeros(grid), 0, 0.0, [0.0])
    k2 = grid.k * grid.k
    b = omega * grid.to_modes(u2)

    def apply_A(a):
        return k2 * a + grid.to_modes(u2 * grid.to_values(a))

    x, its, history = _pcg(apply_A, b, 1.0 / k2, tol, max_iter)
    if history[-1] > tol:
        raise NumericalError(
            f"PCG for phi stalled at relative residual {history[-1]:.3e} after {max_iter} iterations",
            history=history,
            tol=tol,
        )
    return PhiSolution(RadialField(grid, modes=x), its, history[-1], history)


def phi_identity_residual(u: RadialField, phi: RadialField, omega: float) -> float:
    """Relative mismatch in ``int |grad phi|^2 = int (omega - phi) phi u^2``."""
    u._check(phi)
    lhs = grad_norm_sq(phi)
    pv = phi.values
    uv = u.values
    rhs = float(np.sum(u.grid.weights * (omega - pv) * pv * uv * uv))
    return abs(lhs - rhs) / max(abs(lhs), np.finfo(float).eps)
