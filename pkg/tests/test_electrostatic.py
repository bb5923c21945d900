import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgmradial import DomainError, RadialField, RadialGrid, solve_phi
from kgmradial import oracles
from kgmradial.electrostatic import phi_identity_residual
from kgmradial.verify import random_bumps


@pytest.fixture(scope="module")
def grid():
    return RadialGrid(20.0, 511)


def gaussian(grid, amp=1.0, width=1.0):
    return RadialField.from_function(grid, lambda r: amp * np.exp(-((r / width) ** 2)))


def test_zero_source_gives_zero(grid):
    sol = solve_phi(RadialField.zeros(grid), 1.0)
    assert sol.phi.is_zero() and sol.iterations == 0
    assert phi_identity_residual(RadialField.zeros(grid), sol.phi, 1.0) == 0.0


def test_bounds_for_gaussian(grid):
    u = gaussian(grid, 3.0)
    phi = solve_phi(u, 1.0).phi.values
    on = np.abs(u.values) > 1e-8
    assert phi[on].min() >= -1e-12 and phi[on].max() <= 1.0 + 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.05, 5.0))
def test_bounds_random_bumps(seed, omega):
    grid = RadialGrid(20.0, 255)
    u = random_bumps(grid, np.random.default_rng(seed), amp=(-4.0, 4.0))
    phi = solve_phi(u, omega).phi.values
    on = np.abs(u.values) > 1e-8
    slack = 1e-12 * omega
    assert phi[on].min() >= -slack and phi[on].max() <= omega + slack


@pytest.mark.parametrize("amp", [0.1, 1.0, 10.0])
def test_identity_across_amplitudes(grid, amp):
    u = gaussian(grid, amp)
    phi = solve_phi(u, 1.0, tol=1e-10).phi
    assert phi_identity_residual(u, phi, 1.0) <= 1e-8


def test_newtonian_limit_gaussian(grid):
    errs = []
    for A in (1e-3, 5e-4):
        phi = solve_phi(gaussian(grid, A), 0.4).phi.values
        ref = oracles.newtonian_gaussian(grid.r, 0.4, A, grid.R)
        errs.append(np.max(np.abs(phi - ref)) / np.max(np.abs(ref)))
    assert errs[0] < 1e-5
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.02)


def test_newtonian_limit_uniform_ball(grid):
    """Smoothed ball of radius a: interior w(a^2/2 - r^2/6), exterior w a^3/(3r), shifted so phi(R)=0."""
    a, delta, A, w = 3.0, 0.1, 1e-3, 0.8
    dens = 1.0 / (1.0 + np.exp((grid.r - a) / delta))
    u = RadialField(grid, values=A * np.sqrt(dens))
    phi = solve_phi(u, w).phi.values
    # the exterior potential depends only on the total charge, which the smoothing keeps to O(delta^2)
    q = float(np.sum(grid.weights * dens)) / (4 * math.pi)
    out = grid.r > a + 15 * delta
    ext = w * A ** 2 * q * (1 / grid.r[out] - 1 / grid.R)
    assert np.max(np.abs(phi[out] / ext - 1)) < 1e-5
    inside = grid.r < a - 15 * delta
    ball = w * A ** 2 * ((a * a / 2 - grid.r[inside] ** 2 / 6) - a ** 3 / (3 * grid.R))
    assert np.max(np.abs(phi[inside] / ball - 1)) < 5e-3


def test_tolerance_is_met(grid, rng):
    u = random_bumps(grid, rng)
    sol = solve_phi(u, 1.0, tol=1e-9)
    assert sol.residual <= 1e-9 and sol.history[-1] == sol.residual


@pytest.mark.parametrize("tol", [0.0, 1e-3])
def test_tolerance_domain(grid, tol):
    with pytest.raises(DomainError):
        solve_phi(gaussian(grid), 1.0, tol=tol)


def test_nonfinite_input(grid):
    bad = gaussian(grid).values.copy()
    bad[3] = np.nan
    with pytest.raises(DomainError):
        solve_phi(RadialField(grid, values=bad), 1.0)
