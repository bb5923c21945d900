"""Property suite behind ``kgmradial verify``.

Runs the invariant and oracle checks of every module on the configured grid
and model, and returns a machine-readable summary.  Checks that depend on
spectral accuracy are expected to fail on very coarse grids; that is the point
of running them on the user's grid.
"""

from __future__ import annotations

import math

import numpy as np

from . import oracles
from .electrostatic import solve_phi, phi_identity_residual
from .errors import InfeasibleError
from .functional import energy_J, evaluate, full_F, gradient_J, geometry_radius, sobolev_constant, sphere_infimum
from .mountain_pass import SolveOptions, mountain_pass_solve
from .params import (
    ModelParams,
    PotentialSpec,
    alpha0,
    check_admissible,
    feasible_epsilon,
    normalization_constant,
)
from .radial import RadialField, RadialGrid, l2_norm_sq, w_norm_sq
from .spectrum import (
    bilinear_b_alpha_v,
    compute_gamma,
    eigen_decomposition,
    rayleigh_min_check,
)

__all__ = ["random_bumps", "fd_ratio", "run_suite"]

SEED = 20240601


def random_bumps(grid: RadialGrid, rng, n: int = 3, amp=(0.5, 2.0), centers=(0.0, 5.0), widths=(0.6, 2.0)) -> RadialField:
    """Sum of ``n`` Gaussian bumps with random centers, widths and amplitudes."""
    c = rng.uniform(*centers, n)
    w = rng.uniform(*widths, n)
    a = rng.uniform(*amp, n)
    r = grid.r
    vals = sum(ai * np.exp(-(((r - ci) / wi) ** 2)) for ai, ci, wi in zip(a, c, w))
    return RadialField(grid, values=vals)


def fd_ratio(u, v, params, h: float = 1e-4) -> float:
    """Error ratio of central differences of ``J`` against ``J'(u)[v]`` when ``h`` halves."""
    exact = gradient_J(u, params).action(v)
    errs = []
    for step in (h, h / 2):
        fd = (energy_J(u + step * v, params).total - energy_J(u - step * v, params).total) / (2 * step)
        errs.append(abs(fd - exact))
    return errs[0] / errs[1] if errs[1] > 0 else math.inf


class _Suite:
    def __init__(self):
        self.checks = []

    def record(self, module, name, value, threshold, passed, note=None):
        entry = {"module": module, "name": name, "passed": bool(passed),
                 "value": None if value is None else float(value), "threshold": float(threshold)}
        if note:
            entry["note"] = note
        self.checks.append(entry)

    def guard(self, module, name, threshold, fn):
        try:
            fn()
        except Exception as exc:  # a crash is a failed check, reported by name
            self.record(module, name, None, threshold, False, note=f"{type(exc).__name__}: {exc}")


def _params_checks(S, rng):
    def alpha0_check():
        worst = 0.0
        for _ in range(50):
            s, t = rng.uniform(0.02, 0.98), rng.uniform(0.05, 50.0)
            worst = max(worst, abs(alpha0(s, t) / oracles.alpha0_bruteforce(s, t) - 1.0))
        S.record("params", "alpha0_vs_bruteforce", worst, 1e-5, worst <= 1e-5)

    def cs_check():
        worst = abs(normalization_constant(0.5) - 1.0 / math.pi ** 2)
        for s in (0.1, 0.25, 0.75, 0.9):
            worst = max(worst, abs(normalization_constant(s) / oracles.normalization_closed_form(s) - 1.0))
        S.record("params", "normalization_constant", worst, 1e-6, worst <= 1e-6)

    def feasible_check():
        mismatches = 0
        for _ in range(50):
            p = rng.uniform(2.2, 5.8)
            m = rng.uniform(0.3, 2.0)
            w = rng.uniform(0.05, 1.5)
            s = rng.uniform(0.05, 0.95)
            a = rng.uniform(-4.0, 2.0)
            P = ModelParams(s, a, p, w, PotentialSpec.constant(m))
            ok = check_admissible(P).admissible
            try:
                feasible_epsilon(P, case="palais_smale")
                feas = True
            except InfeasibleError:
                feas = False
            mismatches += ok != feas
        S.record("params", "feasible_iff_admissible", mismatches, 0, mismatches == 0)

    S.guard("params", "alpha0_vs_bruteforce", 1e-5, alpha0_check)
    S.guard("params", "normalization_constant", 1e-6, cs_check)
    S.guard("params", "feasible_iff_admissible", 0, feasible_check)


def _radial_checks(S, grid, rng):
    def parseval():
        u = random_bumps(grid, rng)
        q, pv = l2_norm_sq(u, "quadrature"), l2_norm_sq(u, "parseval")
        err = abs(q - pv) / pv
        S.record("radial", "parseval_identity", err, 1e-12, err <= 1e-12)

    def roundtrip():
        u = random_bumps(grid, rng)
        back = grid.to_values(grid.to_modes(u.values))
        err = float(np.max(np.abs(back - u.values)) / np.max(np.abs(u.values)))
        S.record("radial", "transform_roundtrip", err, 1e-12, err <= 1e-12)

    def gaussian():
        u = RadialField.from_function(grid, lambda r: np.exp(-r * r))
        err = abs(l2_norm_sq(u) / (math.pi / 2) ** 1.5 - 1.0)
        S.record("radial", "gaussian_l2_norm", err, 1e-8, err <= 1e-8)

    def fractional():
        u = RadialField.from_function(grid, lambda r: np.exp(-r * r))
        worst = 0.0
        for s in (0.25, 0.75):
            approx = grid.to_values(grid.k ** (2 * s) * u.modes)
            mask = grid.r <= 3.0
            exact = oracles.frac_laplacian_gaussian_hyp(grid.r[mask], s)
            worst = max(worst, float(np.max(np.abs(approx[mask] - exact))) if mask.any() else math.inf)
        S.record("radial", "fractional_laplacian_gaussian", worst, 1e-4, worst <= 1e-4)

    for name, fn, th in (("parseval_identity", parseval, 1e-12), ("transform_roundtrip", roundtrip, 1e-12),
                         ("gaussian_l2_norm", gaussian, 1e-8),
                         ("fractional_laplacian_gaussian", fractional, 1e-4)):
        S.guard("radial", name, th, fn)


def _electrostatic_checks(S, grid, params, rng):
    tol = 1e-13
    w = params.omega

    def bounds_identity():
        worst_b, worst_i = 0.0, 0.0
        for _ in range(10):
            u = random_bumps(grid, rng, amp=(0.2, 4.0))
            phi = solve_phi(u, w, tol=tol).phi
            support = np.abs(u.values) > 1e-8
            pv = phi.values[support]
            worst_b = max(worst_b, float(max(-pv.min(), pv.max() - w, 0.0)) / w)
            worst_i = max(worst_i, phi_identity_residual(u, phi, w))
        S.record("electrostatic", "phi_bounds", worst_b, 10 * tol, worst_b <= 10 * tol)
        S.record("electrostatic", "phi_identity", worst_i, 1e-8, worst_i <= 1e-8)

    def newtonian():
        A = 1e-3
        u = RadialField.from_function(grid, lambda r: A * np.exp(-r * r))
        phi = solve_phi(u, w, tol=tol).phi.values
        ref = oracles.newtonian_gaussian(grid.r, w, A, grid.R)
        err = float(np.max(np.abs(phi - ref)) / np.max(np.abs(ref)))
        S.record("electrostatic", "newtonian_limit", err, 1e-5, err <= 1e-5)

    try:
        bounds_identity()
    except Exception as exc:
        S.record("electrostatic", "phi_bounds", None, 10 * tol, False, note=f"{type(exc).__name__}: {exc}")
        S.record("electrostatic", "phi_identity", None, 1e-8, False, note=f"{type(exc).__name__}: {exc}")
    S.guard("electrostatic", "newtonian_limit", 1e-5, newtonian)


def _functional_checks(S, grid, params, rng):
    def basics():
        zero = RadialField.zeros(grid)
        j0 = abs(energy_J(zero, params).total)
        S.record("functional", "J_at_zero", j0, 0.0, j0 == 0.0)
        worst_even, worst_f = 0.0, 0.0
        for _ in range(5):
            u = random_bumps(grid, rng)
            jp, phi = evaluate(u, params)
            jm = energy_J(-u, params)
            worst_even = max(worst_even, abs(jp.total - jm.total) / max(abs(jp.total), 1e-300))
            f = full_F(u, phi.phi, params)
            worst_f = max(worst_f, abs(f - jp.total) / max(abs(jp.total), 1e-300))
        S.record("functional", "J_even", worst_even, 1e-10, worst_even <= 1e-10)
        S.record("functional", "J_equals_F", worst_f, 1e-8, worst_f <= 1e-8)
        d0 = float(np.max(np.abs(gradient_J(zero, params).dual)))
        S.record("functional", "gradient_at_zero", d0, 0.0, d0 == 0.0)

    def fd():
        ratios = [fd_ratio(random_bumps(grid, rng), random_bumps(grid, rng, amp=(10.0, 30.0)), params)
                  for _ in range(5)]
        bad = max(abs(r - 4.0) for r in ratios)
        S.record("functional", "finite_difference_order", bad, 0.5, bad <= 0.5)

    try:
        basics()
    except Exception as exc:
        for name, th in (("J_at_zero", 0.0), ("J_even", 1e-10), ("J_equals_F", 1e-8), ("gradient_at_zero", 0.0)):
            S.record("functional", name, None, th, False, note=f"{type(exc).__name__}: {exc}")
    if params.p >= 4.0:
        S.guard("functional", "finite_difference_order", 0.5, fd)


def _solve_checks(S, grid, params, options, rng):
    def solve():
        res = mountain_pass_solve(params, grid, options)
        S.record("mountain_pass", "converged", res.grad_norm, options.tol, res.converged)
        worst = max(res.residual_u, res.residual_phi)
        S.record("mountain_pass", "weak_residuals", worst, 1e-5, worst <= 1e-5)
        # each deformation step must not raise the path maximum it started from
        after, before = np.asarray(res.max_energy_history), np.asarray(res.pre_step_history)
        rise = float(np.max(after - before)) if after.size else 0.0
        S.record("mountain_pass", "steps_do_not_raise_path_max", max(rise, 0.0), 0.0, rise <= 0.0)
        if params.potential.is_constant:
            consts = feasible_epsilon(params)
            # the solution's own direction keeps the sampled infimum below the ray maximum J(u*)
            dirs = [random_bumps(grid, rng) for _ in range(20)] + [res.u]
            cp = sobolev_constant(dirs, params.p)
            rho = geometry_radius(consts.cmin, cp, params.p) * (2.0 / params.p) ** (1.0 / (params.p - 2.0))
            delta = sphere_infimum(params, dirs, rho)
            ok = delta > 0.0 and res.energy.total >= delta
            S.record("mountain_pass", "level_above_barrier", res.energy.total - delta, 0.0, ok)

    S.guard("mountain_pass", "solve", 0.0, solve)


def _spectrum_checks(S, grid, rng):
    osc = ModelParams(0.5, 0.0, 4.0, 0.3, PotentialSpec.coercive("r**2", v0=0.0))
    K = max(1, min(5, grid.N // 4))

    def oscillator():
        res = eigen_decomposition(osc, K, grid)
        ladder = 3.0 + 4.0 * np.arange(K)
        err = float(np.max(np.abs(res.lambdas / ladder - 1.0)))
        S.record("spectrum", "oscillator_ladder", err, 1e-3, err <= 1e-3)
        fields = res.eigenfields
        gram = np.array([[float(np.sum(grid.weights * a.values * b.values)) for b in fields] for a in fields])
        orth = float(np.max(np.abs(gram - np.eye(K))))
        S.record("spectrum", "orthonormality", orth, 1e-8, orth <= 1e-8)
        boff = 0.0
        for i in range(K):
            for j in range(K):
                if i != j:
                    boff = max(boff, abs(bilinear_b_alpha_v(fields[i], fields[j], osc)) / (1.0 + abs(res.lambdas[i])))
        S.record("spectrum", "b_orthogonality", boff, 1e-8, boff <= 1e-8)
        ray = max(rayleigh_min_check(res, k) for k in range(1, K + 1))
        S.record("spectrum", "rayleigh_min", ray, 1e-6, ray <= 1e-6)

    def dense():
        small = RadialGrid(8.0, 32)
        P = ModelParams(0.5, -0.4, 4.0, 0.3, PotentialSpec.coercive("r**2", v0=0.0))
        lam, _ = oracles.dense_eigen_oracle(P, small, 8)
        worst = 0.0
        for method in ("dense", "lanczos"):
            res = eigen_decomposition(P, 8, small, method=method)
            worst = max(worst, float(np.max(np.abs(res.lambdas - lam))))
        S.record("spectrum", "dense_oracle", worst, 1e-10, worst <= 1e-10)

    def garding():
        P = ModelParams(0.5, -1.0, 4.0, 0.3, PotentialSpec.coercive("r**2", v0=0.0))
        gamma = compute_gamma(P)
        worst = math.inf
        for _ in range(20):
            u = random_bumps(grid, rng, amp=(-2.0, 2.0))
            lhs = bilinear_b_alpha_v(u, u, P) + gamma * l2_norm_sq(u)
            worst = min(worst, lhs - 0.5 * w_norm_sq(u, P.potential))
        S.record("spectrum", "garding_bound", -min(worst, 0.0), 0.0, worst >= 0.0)

    S.guard("spectrum", "oscillator_ladder", 1e-3, oscillator)
    S.guard("spectrum", "dense_oracle", 1e-10, dense)
    S.guard("spectrum", "garding_bound", 0.0, garding)


def run_suite(params: ModelParams, grid: RadialGrid, options: SolveOptions | None = None) -> dict:
    """Run every check; returns ``{"passed", "grid", "checks", "failures"}``."""
    rng = np.random.default_rng(SEED)
    S = _Suite()
    _params_checks(S, rng)
    _radial_checks(S, grid, rng)
    _electrostatic_checks(S, grid, params, rng)
    _functional_checks(S, grid, params, rng)
    if params.potential.is_constant and not check_admissible(params).admissible:
        S.record("mountain_pass", "solve", None, 0.0, False, note="model parameters are not admissible")
    else:
        _solve_checks(S, grid, params, options or SolveOptions(), rng)
    _spectrum_checks(S, grid, rng)
    failures = [f"{c['module']}.{c['name']}" for c in S.checks if not c["passed"]]
    return {
        "passed": not failures,
        "grid": grid.metadata(),
        "params": params.to_dict(),
        "checks": S.checks,
        "failures": failures,
    }
