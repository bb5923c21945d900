import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgmradial import ModelParams, PotentialSpec, RadialField, RadialGrid, energy_J, full_F, gradient_J, solve_phi
from kgmradial.functional import dual_action, evaluate, geometry_radius, preconditioner_shift
from kgmradial.radial import OperatorSymbol, bilinear_b_alpha, mode_field
from kgmradial.verify import fd_ratio, random_bumps


@pytest.fixture(scope="module")
def grid():
    return RadialGrid(20.0, 255)


def params(alpha=0.0, p=4.0, omega=0.3, s=0.5):
    return ModelParams(s, alpha, p, omega, PotentialSpec.constant(1.0))


def test_energy_at_zero(grid):
    assert energy_J(RadialField.zeros(grid), params()).total == 0.0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-0.5, 1.0), st.floats(2.2, 5.8))
def test_energy_is_even(seed, alpha, p):
    grid = RadialGrid(20.0, 127)
    u = random_bumps(grid, np.random.default_rng(seed), amp=(-2.0, 2.0))
    P = params(alpha, p)
    a, b = energy_J(u, P).total, energy_J(-u, P).total
    assert a == pytest.approx(b, rel=1e-10, abs=1e-12)


def test_energy_equals_two_field_functional(grid, rng):
    P = params(-0.3)
    for _ in range(5):
        u = random_bumps(grid, rng)
        J, phi = evaluate(u, P)
        assert full_F(u, phi.phi, P) == pytest.approx(J.total, rel=1e-8)


def test_energy_matches_reduced_closed_form(grid, rng):
    """J = B/2 + int (V - w^2) u^2 / 2 + (w/2) int phi_u u^2 - int |u|^p / p once phi_u solves its equation."""
    P = params(-0.3, p=3.5)
    w = grid.weights
    for _ in range(5):
        u = random_bumps(grid, rng, amp=(-2.0, 2.0))
        phi = solve_phi(u, P.omega).phi.values
        uv = u.values
        ref = (0.5 * bilinear_b_alpha(u, u, P) + 0.5 * np.sum(w * (1.0 - P.omega ** 2) * uv ** 2)
               + 0.5 * P.omega * np.sum(w * phi * uv ** 2) - np.sum(w * np.abs(uv) ** P.p) / P.p)
        assert energy_J(u, P).total == pytest.approx(float(ref), rel=1e-9)


def test_two_field_functional_trivial_cases(grid):
    P = params()
    zero = RadialField.zeros(grid)
    assert full_F(zero, zero, P) == 0.0
    phi = mode_field(grid, 2, 0.1)
    assert full_F(zero, phi, P) == pytest.approx(-0.5 * 0.01 * grid.k[1] ** 2 * grid.mode_norm, rel=1e-14)


def test_phi_is_stationary_for_F(grid, rng):
    P = params(-0.2)
    u = random_bumps(grid, rng)
    phi = solve_phi(u, P.omega).phi
    scale = abs(full_F(u, phi, P))
    for _ in range(10):
        psi = random_bumps(grid, rng, amp=(-1.0, 1.0))
        h = 1e-4
        d = (full_F(u, phi + h * psi, P) - full_F(u, phi - h * psi, P)) / (2 * h)
        assert abs(d) <= 1e-6 * max(scale, 1.0)


def test_derivative_at_zero(grid, rng):
    g = gradient_J(RadialField.zeros(grid), params())
    assert not np.any(g.dual)
    assert g.action(random_bumps(grid, rng)) == 0.0


@pytest.mark.parametrize("alpha", [0.0, -0.3, 0.7])
def test_finite_difference_order(grid, rng, alpha):
    P = params(alpha)
    for _ in range(3):
        r = fd_ratio(random_bumps(grid, rng), random_bumps(grid, rng, amp=(10.0, 30.0)), P)
        assert 3.5 <= r <= 4.5


def test_finite_difference_agreement_generic_p(grid, rng):
    # p < 4: the error is still small even though the order can drift near zeros of u
    P = params(-0.3, p=3.0)
    u, v = random_bumps(grid, rng), random_bumps(grid, rng)
    exact = dual_action(u, v, P)
    h = 1e-5
    fd = (energy_J(u + h * v, P).total - energy_J(u - h * v, P).total) / (2 * h)
    assert fd == pytest.approx(exact, rel=1e-6)


def test_riesz_representative(grid, rng):
    P = params(-0.5)
    u = random_bumps(grid, rng)
    g = gradient_J(u, P)
    for _ in range(3):
        v = random_bumps(grid, rng, amp=(-1.0, 1.0))
        assert g.inner(g.field, v) == pytest.approx(g.action(v), rel=1e-12)
    assert g.norm == pytest.approx(math.sqrt(g.inner(g.field, g.field)), rel=1e-12)


def test_preconditioner_shift_is_positive_definite(grid):
    for alpha in (0.0, -0.5, -1.5):
        P = params(alpha)
        tau = preconditioner_shift(P, grid)
        assert tau >= 1.0
        assert np.min(OperatorSymbol.for_params(grid, P).sigma + tau) >= 1.0


def test_geometry_radius_formula():
    assert geometry_radius(0.5, 1.0, 4.0) == pytest.approx(1.0)
    assert geometry_radius(0.8, 2.0, 3.0) == pytest.approx(3 * 0.8 / (2 * 8.0))
