import math

import numpy as np
import pytest
from scipy.integrate import quad

from kgmradial import (
    AdmissibilityError,
    DomainError,
    ModelParams,
    PotentialSpec,
    RadialField,
    RadialGrid,
    SolveOptions,
    alpha0,
    mountain_pass_solve,
    pde_residuals,
    solve_phi,
)
from kgmradial import oracles
from kgmradial.functional import gradient_J
from kgmradial.mountain_pass import find_descent_endpoint, gaussian_seed

GRID = RadialGrid(20.0, 255)


def P(alpha=0.0, omega=0.3, p=4.0, m=1.0):
    return ModelParams(0.5, alpha, p, omega, PotentialSpec.constant(m))


@pytest.fixture(scope="module")
def solved():
    return mountain_pass_solve(P(), GRID)


def test_descent_endpoint():
    seed = gaussian_seed(GRID)
    e, t = find_descent_endpoint(seed, P())
    from kgmradial import energy_J

    assert np.isfinite(t) and energy_J(e, P()).total <= -1.0
    assert t == 1.0 or energy_J(0.5 * e, P()).total > -1.0


def test_descent_endpoint_rejects_zero_seed():
    with pytest.raises(DomainError):
        find_descent_endpoint(RadialField.zeros(GRID), P())


def test_near_threshold_endpoint():
    # lowering alpha lowers J pointwise along the ray, so the endpoint cannot move outward
    a0 = alpha0(0.5, 1.0 - 0.3 ** 2)
    seed = gaussian_seed(GRID, 0.2, 1.0)
    _, t0 = find_descent_endpoint(seed, P(0.0))
    e1, t1 = find_descent_endpoint(seed, P(-0.99 * a0))
    assert np.isfinite(t1) and t1 <= t0
    from kgmradial import energy_J

    assert energy_J(e1, P(-0.99 * a0)).total <= -1.0


def test_solver_converges(solved):
    res = solved
    assert res.converged and res.grad_norm <= 1e-6
    assert res.energy.total > 0
    assert max(res.residual_u, res.residual_phi) <= 1e-5
    u = res.u.values
    assert u[0] > 0 and np.all(np.diff(u[GRID.r < 15]) < 0)
    assert abs(u[-1]) < 1e-6 * u[0]


def test_steps_never_raise_path_maximum(solved):
    after, before = np.array(solved.max_energy_history), np.array(solved.pre_step_history)
    assert after.size == before.size == solved.iterations
    assert np.all(after <= before)


def test_converged_solution_is_critical_in_every_basis_direction(solved):
    g = gradient_J(solved.u, P(), tau=1.0)
    # J'(u)[phi_n] / ||phi_n||_H1 with ||phi_n||_H1^2 = (1 + k_n^2) 2 pi R
    scaled = np.abs(g.dual) / np.sqrt((1 + GRID.k ** 2) * GRID.mode_norm)
    assert scaled.max() <= 1e-6


def test_report_fields(solved):
    d = solved.to_dict()
    for key in ("converged", "iterations", "energy", "grad_norm", "residual_u", "residual_phi", "params", "grid",
                "solver", "endpoint_scale", "u_max", "phi_max", "max_energy_history"):
        assert key in d
    assert 0 < d["phi_max"] <= 0.3


def test_inadmissible_is_rejected_before_work():
    a0 = alpha0(0.5, 1.0 - 0.3 ** 2)
    with pytest.raises(AdmissibilityError) as exc:
        mountain_pass_solve(P(-1.01 * a0), GRID)
    assert exc.value.report.violated_conditions == ["threshold"]


def test_iteration_cap_gives_unconverged_result():
    res = mountain_pass_solve(P(), GRID, SolveOptions(max_iters=1))
    assert not res.converged and res.iterations == 1


def test_residuals_trivial_cases():
    zero = RadialField.zeros(GRID)
    assert pde_residuals(zero, zero, P()) == (0.0, 0.0)
    u = gaussian_seed(GRID)
    _, rphi = pde_residuals(u, zero, P())
    assert rphi > 0.5
    _, rphi = pde_residuals(u, solve_phi(u, 0.3).phi, P())
    assert rphi < 1e-12


def test_small_frequency_limit_matches_shooting_ground_state():
    """As omega -> 0 the solution approaches the ground state of -Lap u + u = u^3."""
    u0, profile = oracles.shooting_ground_state(1.0)
    res = mountain_pass_solve(P(omega=0.01), GRID)
    assert res.converged
    u = res.u.values
    near = GRID.r < 6
    assert np.max(np.abs(u[near] - profile(GRID.r[near]))) < 1e-4 * u0
    # on the limit problem's Nehari set the energy reduces to (1/4) int u^4
    limit = quad(lambda r: math.pi * r * r * float(profile(np.array([r]))[0]) ** 4, 0.0, 12.0, limit=200)[0]
    assert res.energy.total == pytest.approx(limit, rel=1e-3)


def test_shooting_oracle_value():
    u0, _ = oracles.shooting_ground_state(1.0)
    assert u0 == pytest.approx(4.337387681, abs=1e-8)
    u2, _ = oracles.shooting_ground_state(2.0)
    assert u2 == pytest.approx(2 * u0, rel=1e-14)


def test_coercive_potential_solve():
    params = ModelParams(0.5, -0.3, 4.0, 0.3, PotentialSpec.coercive("r**2", v0=0.0))
    res = mountain_pass_solve(params, RadialGrid(10.0, 127))
    assert res.converged and res.k0 == 1 and res.energy.total > 0


@pytest.mark.parametrize("kwargs", [dict(M=1), dict(tol=0.0), dict(max_iters=-1), dict(seed_width=0.0)])
def test_options_validation(kwargs):
    with pytest.raises(DomainError):
        SolveOptions(**kwargs)
