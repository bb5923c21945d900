"""Independent reference computations used to cross-check the main code paths.

Nothing here shares numerics with the production routines it checks: closed
forms, brute-force minimization, direct singular-integral quadrature, an ODE
shooting method and a dense eigen-solve built from explicitly sampled basis
functions.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import scipy.linalg
from scipy import integrate, optimize, special

from . import kernels

__all__ = [
    "normalization_closed_form",
    "alpha0_bruteforce",
    "frac_laplacian_gaussian_hyp",
    "frac_laplacian_gaussian_quad",
    "newtonian_gaussian",
    "shooting_ground_state",
    "dense_eigen_oracle",
]


def normalization_closed_form(s: float) -> float:
    """``2^(2s) s Gamma(3/2 + s) / (pi^(3/2) Gamma(1 - s))``."""
    return 2.0 ** (2 * s) * s * special.gamma(1.5 + s) / (math.pi ** 1.5 * special.gamma(1.0 - s))


_K_GRID = np.logspace(-8, 8, 4001)


def alpha0_bruteforce(s: float, t: float) -> float:
    """``inf_k (k^2 + t) / k^(2s)`` by grid search plus bounded refinement."""
    vals = (_K_GRID ** 2 + t) * _K_GRID ** (-2.0 * s)
    j = int(np.argmin(vals))
    best = kernels.ratio_grid_min(_K_GRID, t, s)
    lo, hi = _K_GRID[max(j - 1, 0)], _K_GRID[min(j + 1, len(_K_GRID) - 1)]

    def f(logk):
        k = math.exp(logk)
        return (k * k + t) * k ** (-2.0 * s)

    res = optimize.minimize_scalar(f, bounds=(math.log(lo), math.log(hi)), method="bounded",
                                   options={"xatol": 1e-12})
    return min(best, float(res.fun))


def frac_laplacian_gaussian_hyp(r, s: float):
    """``(-Delta)^s exp(-|x|^2)`` in three dimensions via its Fourier closed form."""
    r = np.asarray(r, dtype=float)
    pref = 2.0 ** (2 * s) * special.gamma(1.5 + s) / special.gamma(1.5)
    return pref * special.hyp1f1(1.5 + s, 1.5, -r * r)


def frac_laplacian_gaussian_quad(r: float, s: float, c_s: float) -> float:
    """Same quantity from the singular integral with normalization ``c_s``.

    Averages ``exp(-|y|^2)`` over spheres ``|y - x| = rho`` analytically and
    integrates ``4 pi rho^(-1-2s) (f(r) - average)`` over ``rho``.
    """
    f0 = math.exp(-r * r)

    def gap(rho):
        x = 2.0 * r * rho
        if x >= 1.0:
            return f0 - (math.exp(-(r - rho) ** 2) - math.exp(-(r + rho) ** 2)) / (2.0 * x)
        # small spheres: f(r) [1 - exp(-rho^2) sinh(x)/x] without cancellation
        shc_m1 = x * x / 6.0 * (1.0 + x * x / 20.0 * (1.0 + x * x / 42.0)) if x < 1e-2 else math.sinh(x) / x - 1.0
        return f0 * (-math.expm1(-rho * rho) * (1.0 + shc_m1) - shc_m1)

    def integrand(rho):
        return gap(rho) * rho ** (-1.0 - 2.0 * s)

    # on [0, d] use f(r) - average = -rho^2 Delta f / 6 + O(rho^4), integrated exactly
    d = 1e-4
    lap = (4.0 * r * r - 6.0) * f0
    total = -lap / 6.0 * d ** (2.0 - 2.0 * s) / (2.0 - 2.0 * s)
    brk = sorted(b for b in {d, max(r - 4.0, 2 * d), r, r + 6.0} if b >= d)
    for a, b in zip(brk[:-1], brk[1:]):
        if b > a:
            total += integrate.quad(integrand, a, b, epsabs=1e-13, epsrel=1e-10, limit=400)[0]
    # beyond r + 6 the average is below 1e-15 of f0; integrate the power tail exactly
    total += f0 * (r + 6.0) ** (-2.0 * s) / (2.0 * s)
    return 4.0 * math.pi * c_s * total


def newtonian_gaussian(r, omega: float, amplitude: float, R: float):
    """Leading-order ``phi_u`` for ``u = amplitude * exp(-r^2)`` with ``phi(R) = 0``.

    Solves ``-Delta phi = omega amplitude^2 exp(-2 r^2)`` in closed form.
    """
    r = np.asarray(r, dtype=float)
    a = 2.0
    c = omega * amplitude ** 2 * math.sqrt(math.pi) / (4.0 * a ** 1.5)
    free = c * special.erf(math.sqrt(a) * r) / r
    return free - c * special.erf(math.sqrt(a) * R) / R


@lru_cache(maxsize=8)
def shooting_ground_state(m: float = 1.0, r_max: float = 12.0, iters: int = 200):
    """Positive radial ground state of ``-Delta u + m^2 u = u^3``.

    Bisects on ``u(0)`` for the unit-mass problem, then rescales
    ``u_m(r) = m Q(m r)``.  Returns ``(u0, profile)`` where ``profile(r)`` is
    trustworthy for ``m r`` up to about ``r_max / 2``.
    """

    def rhs(r, y):
        u, v = y
        return [v, -2.0 * v / r + u - u ** 3]

    def shoot(u0):
        r0 = 1e-6
        y0 = [u0 + r0 * r0 * (u0 - u0 ** 3) / 6.0, r0 * (u0 - u0 ** 3) / 3.0]

        def crossed(r, y):
            return y[0]

        def turned(r, y):
            return y[1]

        crossed.terminal = True
        turned.terminal = True
        turned.direction = 1
        sol = integrate.solve_ivp(rhs, (r0, r_max), y0, rtol=1e-12, atol=1e-14,
                                  events=(crossed, turned), dense_output=True)
        if sol.t_events[0].size:
            return 1, sol
        if sol.t_events[1].size:
            return -1, sol
        return 0, sol

    lo, hi = 4.0, 4.7
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        sign, _ = shoot(mid)
        if sign > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-14:
            break
    u0 = 0.5 * (lo + hi)
    _, sol = shoot(lo)
    t_end = sol.t[-1]

    def profile(r):
        rr = np.clip(np.asarray(r, dtype=float) * m, 1e-6, t_end)
        return m * sol.sol(rr)[0]

    return m * u0, profile


def dense_eigen_oracle(params, grid, K: int):
    """Eigenvalues from explicitly sampled basis functions.

    Builds stiffness and mass matrices by quadrature of ``sin(k_n r)/r`` at the
    nodes and calls a generalized dense symmetric solver.
    """
    r = grid.r
    B = np.sin(np.outer(r, grid.k)) / r[:, None]
    w = grid.weights
    V = params.potential(r)
    mass = B.T @ (w[:, None] * B)
    k = grid.k
    sigma = k * k + params.alpha * k ** (2.0 * params.s)
    stiff = np.diag(2.0 * math.pi * grid.R * sigma) + B.T @ ((w * V)[:, None] * B)
    stiff = 0.5 * (stiff + stiff.T)
    mass = 0.5 * (mass + mass.T)
    lam, vecs = scipy.linalg.eigh(stiff, mass)
    return lam[:K], vecs[:, :K]
