import numpy as np
import pytest
from scipy.integrate import quad

from micro_reynolds.errors import EllipticityError, RangeError
from micro_reynolds.homogenization import fem
from micro_reynolds.homogenization.cell import (
    cell_mesh,
    flow_factors,
    laminate_bounds,
    sample_quadrature,
    solve_correctors,
)
from micro_reynolds.model.coefficients import theta_phi
from micro_reynolds.model.params import FluidParams
from micro_reynolds.model.roughness import RoughnessProfile
from micro_reynolds.model.samples import CoefficientField
from micro_reynolds.oracle.check import observed_order


def _solve(profile, params, n):
    field = sample_quadrature(profile, params, n)
    cell = solve_correctors(field, params, n)
    return field, cell, flow_factors(cell, field, params)


@pytest.mark.parametrize("alpha", [1.0, 2.0])
def test_constant_roughness(alpha):
    params = FluidParams(N2=0.25, Rc=1.0, alpha=alpha, beta=1.0, s=(1.0, 0.5))
    _, cell, factors = _solve(RoughnessProfile.constant(1.0), params, 16)
    assert np.abs(cell.grad_q).max() <= 1e-10
    coef = theta_phi(1.0, params)
    np.testing.assert_allclose(factors.K1, coef.theta1 * np.eye(2), atol=1e-10)
    np.testing.assert_allclose(factors.K2, coef.phi1 * np.eye(2), atol=1e-10)
    assert factors.L1 == pytest.approx(coef.theta2, abs=1e-10)
    assert factors.L2 == pytest.approx(coef.phi2, abs=1e-10)


def test_correctors_follow_separable_data(unit_params):
    _, cell, _ = _solve(RoughnessProfile.cosine(1.0, (0.3, 0.0)), unit_params, 32)
    # q1 varies along z1 only, q2 vanishes
    np.testing.assert_allclose(cell.q1, np.broadcast_to(cell.q1[0], cell.q1.shape), atol=1e-10)
    assert np.abs(cell.q1).max() > 1e-3
    assert np.abs(cell.q2).max() < 1e-10


def test_mean_and_residual(alpha2_params):
    params = alpha2_params.with_s((1.0, -0.5))
    _, cell, _ = _solve(RoughnessProfile.cosine(1.0, (0.2, 0.1)), params, 32)
    assert max(abs(m) for m in cell.mean) <= 1e-13
    assert cell.residual <= 1e-12
    assert cell.q1.shape == cell.q2.shape == (32, 32)
    assert cell.grad_q.shape == (32 * 32, 4, 2, 2)


def test_galerkin_orthogonality(unit_params):
    params = unit_params.with_s((1.0, 0.0))
    field, cell, _ = _solve(RoughnessProfile.cosine(1.0, (0.2, 0.1)), params, 16)
    mesh = cell_mesh(16)
    # int (Theta_1 (grad q^1 + e_1) - Theta_2 s_1 e_1) . grad phi_a = 0 for every node
    flux = field.theta1[..., None] * (cell.grad_q[..., 0] + np.array([1.0, 0.0]))
    flux[..., 0] -= field.theta2 * params.s[0]
    residual = fem.flux_load(mesh, flux)
    scale = np.abs(fem.flux_load(mesh, field.theta1[..., None] * np.array([1.0, 0.0]))).max()
    assert np.abs(residual).max() <= 1e-10 * scale


def test_symmetric_and_bounded(unit_params):
    field, cell, factors = _solve(RoughnessProfile.cosine(1.0, (0.3, 0.2)), unit_params, 32)
    assert factors.symmetry_defect <= 1e-10
    harmonic, arithmetic = laminate_bounds(field, cell.mesh)
    eigvals = np.linalg.eigvalsh(0.5 * (factors.K1 + factors.K1.T))
    assert np.all(eigvals > 0)
    assert harmonic * (1 - 1e-12) <= eigvals.min()
    assert eigvals.max() <= arithmetic * (1 + 1e-12)


def test_laminate(unit_params):
    profile = RoughnessProfile.cosine(1.0, (0.3, 0.0))
    _, _, factors = _solve(profile, unit_params, 64)
    theta1 = lambda z1: theta_phi(float(profile(z1, 0.0)), unit_params).theta1
    harmonic = 1.0 / quad(lambda z1: 1.0 / theta1(z1), -0.5, 0.5)[0]
    arithmetic = quad(theta1, -0.5, 0.5)[0]
    assert factors.K1[0, 0] == pytest.approx(harmonic, rel=5e-3)
    assert factors.K1[1, 1] == pytest.approx(arithmetic, rel=1e-6)
    assert abs(factors.K1[0, 1]) <= 1e-10
    assert abs(factors.K1[1, 0]) <= 1e-10


def test_translation_by_full_cell(alpha2_params):
    _, _, base = _solve(RoughnessProfile.cosine(1.0, (0.2, 0.1)), alpha2_params, 16)
    _, _, shifted = _solve(RoughnessProfile.cosine(1.0, (0.2, 0.1), phase=(1.0, -1.0)), alpha2_params, 16)
    np.testing.assert_allclose(shifted.K1, base.K1, atol=1e-12)
    np.testing.assert_allclose(shifted.K2, base.K2, atol=1e-12)
    assert shifted.L1 == pytest.approx(base.L1, abs=1e-12)
    assert shifted.L2 == pytest.approx(base.L2, abs=1e-12)


def test_quadrature_thread_determinism(alpha2_params):
    profile = RoughnessProfile.cosine(1.0, (0.2, 0.1))
    single = sample_quadrature(profile, alpha2_params, 16, threads=1)
    multi = sample_quadrature(profile, alpha2_params, 16, threads=3)
    for a, b in zip(single.sample.astuple(), multi.sample.astuple()):
        np.testing.assert_array_equal(a, b)
    assert single.theta1.shape == (16 * 16, 4)


def test_ellipticity(unit_params):
    field = sample_quadrature(RoughnessProfile.constant(1.0), unit_params, 8)
    theta1 = field.theta1.copy()
    theta1[5, 2] = -1.0
    broken = CoefficientField(field.points, field.h, theta1, field.theta2, field.phi1, field.phi2)
    with pytest.raises(EllipticityError) as info:
        solve_correctors(broken, unit_params, 8)
    assert info.value.location == tuple(field.points[5, 2])
    assert info.value.exit_code == 4


def test_small_grid(unit_params):
    with pytest.raises(RangeError):
        cell_mesh(4)


@pytest.mark.slow
def test_self_convergence(unit_params):
    profile = RoughnessProfile.cosine(1.0, (0.3, 0.0))
    K11 = [_solve(profile, unit_params, n)[2].K1[0, 0] for n in (32, 64, 128)]
    assert observed_order(*K11) >= 1.9
