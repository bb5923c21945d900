import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kgmradial import (
    DomainError,
    GridMismatchError,
    ModelParams,
    OperatorSymbol,
    PotentialSpec,
    RadialField,
    RadialGrid,
    feasible_epsilon,
    normalization_constant,
)
from kgmradial import oracles
from kgmradial.radial import (
    apply_operator,
    bilinear_b_alpha,
    grad_norm_sq,
    h1_norm_sq,
    l2_norm_sq,
    lq_norm,
    mode_field,
    norms,
    transform,
    w_norm_sq,
)
from kgmradial.verify import random_bumps


def test_grid_nodes_and_frequencies():
    g = RadialGrid(20.0, 255)
    assert g.r[0] == 0.078125
    assert g.k[0] == pytest.approx(math.pi / 20, rel=1e-15)
    assert RadialGrid(1.0, 8).k[-1] == pytest.approx(8 * math.pi, rel=1e-15)


def test_grid_weights_integrate_ball_volume():
    # the node rule misses the boundary layer, so the deficit is 3/(2N) to leading order
    g = RadialGrid(20.0, 255)
    N = g.N
    ratio = g.weights.sum() / (4 / 3 * math.pi * g.R ** 3)
    assert ratio == pytest.approx(N * (2 * N + 1) / (2 * (N + 1) ** 2), rel=1e-13)
    assert abs(ratio - 1) < 6e-3


@pytest.mark.parametrize("R, N", [(0.0, 16), (-1.0, 16), (5.0, 7), (5.0, 10.5)])
def test_grid_validation(R, N):
    with pytest.raises(DomainError):
        RadialGrid(R, N)


def test_first_mode_transform():
    g = RadialGrid(20.0, 127)
    u = RadialField(g, values=np.sin(math.pi * g.r / g.R) / g.r)
    c = u.modes
    assert c[0] == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(c[1:])) < 1e-12


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, 64, elements=st.floats(-1e3, 1e3)))
def test_transform_roundtrip(vals):
    g = RadialGrid(7.0, 64)
    u = RadialField(g, values=vals)
    back = transform(transform(u, "modes"), "values")
    scale = max(np.max(np.abs(vals)), 1e-300)
    assert np.max(np.abs(back.values - vals)) <= 1e-12 * scale


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, 48, elements=st.floats(-10, 10)))
def test_parseval_two_ways(vals):
    g = RadialGrid(5.0, 48)
    u = RadialField(g, values=vals)
    a, b = l2_norm_sq(u), l2_norm_sq(u, "quadrature")
    assert a == pytest.approx(b, rel=1e-10, abs=1e-300)


def test_gaussian_spectral_decay():
    g = RadialGrid(20.0, 511)
    c = RadialField.from_function(g, lambda r: np.exp(-r * r)).modes
    assert np.max(np.abs(c[255:])) < 1e-10


def test_gaussian_l2_norm():
    g = RadialGrid(20.0, 511)
    u = RadialField.from_function(g, lambda r: np.exp(-r * r))
    assert l2_norm_sq(u) == pytest.approx(math.pi ** 1.5 / (2 * math.sqrt(2)), abs=1e-6)


def test_mode_norms():
    g = RadialGrid(20.0, 127)
    m1 = mode_field(g, 1)
    assert l2_norm_sq(m1) == pytest.approx(2 * math.pi * g.R, rel=1e-12)
    assert grad_norm_sq(m1) == pytest.approx(g.k[0] ** 2 * 2 * math.pi * g.R, rel=1e-12)


def test_symbol_and_laplacian():
    g = RadialGrid(10.0, 64)
    sym = OperatorSymbol(g, 0.5, 1.0)
    assert np.allclose(sym.sigma, g.k ** 2 + g.k, rtol=1e-15)
    lap = OperatorSymbol(g, 0.5, 0.0)
    out = apply_operator(mode_field(g, 3), lap)
    assert out.modes[2] == pytest.approx(g.k[2] ** 2, rel=1e-15)
    assert np.count_nonzero(out.modes) == 1


def test_bilinear_form_examples():
    g = RadialGrid(10.0, 64)
    params = ModelParams(0.5, -0.7, 4.0, 0.3, PotentialSpec.constant(1.0))
    assert bilinear_b_alpha(mode_field(g, 2), mode_field(g, 5), params) == 0.0
    p0 = ModelParams(0.5, 0.0, 4.0, 0.3, PotentialSpec.constant(1.0))
    assert bilinear_b_alpha(mode_field(g, 1), mode_field(g, 1), p0) == pytest.approx(
        g.k[0] ** 2 * 2 * math.pi * g.R, rel=1e-14)


def test_bilinear_form_symmetric(rng):
    g = RadialGrid(10.0, 64)
    params = ModelParams(0.3, -0.7, 4.0, 0.3, PotentialSpec.constant(1.0))
    u, v = random_bumps(g, rng), random_bumps(g, rng)
    assert bilinear_b_alpha(u, v, params) == bilinear_b_alpha(v, u, params)


@pytest.mark.parametrize("alpha", [0.0, 0.5, -0.3, -0.8])
def test_quadratic_lower_bound(alpha, rng):
    g = RadialGrid(20.0, 255)
    params = ModelParams(0.5, alpha, 4.0, 0.3, PotentialSpec.constant(1.0))
    cmin = feasible_epsilon(params).cmin
    gap = 1.0 - 0.3 ** 2
    for _ in range(100):
        u = random_bumps(g, rng, amp=(-2.0, 2.0))
        lhs = bilinear_b_alpha(u, u, params) + gap * l2_norm_sq(u)
        assert lhs >= cmin * h1_norm_sq(u) * (1 - 1e-12)


def test_fractional_laplacian_against_singular_integral():
    g = RadialGrid(40.0, 2047)
    s = 0.75
    u = RadialField.from_function(g, lambda r: np.exp(-r * r))
    frac = apply_operator(u, OperatorSymbol(g, s, 1.0))
    lap = apply_operator(u, OperatorSymbol(g, s, 0.0))
    vals = (frac - lap).values
    cs = normalization_constant(s)
    for r0 in (0.5, 1.0, 2.0):
        j = int(np.argmin(np.abs(g.r - r0)))
        ref = oracles.frac_laplacian_gaussian_quad(float(g.r[j]), s, cs)
        assert vals[j] == pytest.approx(ref, rel=1e-4)


def test_singular_integral_oracle_matches_fourier_form():
    for s in (0.25, 0.5, 0.75):
        cs = normalization_constant(s)
        for r in (0.0, 5e-5, 0.3, 1.0, 2.5, 4.5):
            hyp = float(oracles.frac_laplacian_gaussian_hyp(r, s))
            assert oracles.frac_laplacian_gaussian_quad(r, s, cs) == pytest.approx(hyp, rel=1e-9, abs=1e-12)


def test_norms_bundle(rng):
    g = RadialGrid(20.0, 127)
    u = random_bumps(g, rng)
    V = PotentialSpec.coercive("r**2 + 1")
    out = norms(u, 4.0, V)
    assert out["H1"] ** 2 == pytest.approx(out["L2"] ** 2 + out["grad"] ** 2, rel=1e-12)
    assert out["W"] >= out["H1"]
    assert w_norm_sq(u, PotentialSpec.constant(2.0)) == pytest.approx(h1_norm_sq(u), rel=1e-14)
    with pytest.raises(DomainError):
        lq_norm(u, 7.0)


def test_grid_mismatch():
    a = mode_field(RadialGrid(10.0, 32), 1)
    b = mode_field(RadialGrid(11.0, 32), 1)
    with pytest.raises(GridMismatchError):
        a + b


def test_csv_roundtrip(tmp_path, rng):
    g = RadialGrid(20.0, 63)
    u = random_bumps(g, rng)
    u.to_csv(tmp_path / "u.csv")
    back = RadialField.from_csv(tmp_path / "u.csv", g)
    assert np.array_equal(back.values, u.values)
    with pytest.raises(GridMismatchError):
        RadialField.from_csv(tmp_path / "u.csv", RadialGrid(21.0, 63))


def test_json_roundtrip(rng):
    g = RadialGrid(20.0, 63)
    u = random_bumps(g, rng)
    back = RadialField.from_json_dict(u.to_json_dict())
    assert np.array_equal(back.modes, u.modes)
