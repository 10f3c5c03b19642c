import numpy as np
import pytest
from scipy import integrate
from scipy.special import eval_jacobi, gamma

from dopg.basis import (
    Side,
    SpatialBasisConfig,
    TemporalBasisConfig,
    affine_to_standard,
    domain_scale_factor,
    frac_deriv_legendre,
    frac_deriv_temporal,
    frac_integral_polyfrac,
    spatial_basis_eval,
    spatial_basis_table,
    spatial_test_eval,
    temporal_basis_eval,
    temporal_test_eval,
    test_scale as sigma_test,
    trial_scale,
)
from dopg.errors import EvaluationError, ParameterError
from oracles import QUAD, rl_legendre, rl_polyfrac


def test_affine_map():
    assert affine_to_standard(0.3, 0.3, 2.0) == -1.0
    assert affine_to_standard(1.15, 0.3, 2.0) == pytest.approx(0.0, abs=1e-15)
    assert affine_to_standard(1.5, 0.0, 2.0) == 0.5
    with pytest.raises(ParameterError):
        affine_to_standard(0.0, 1.0, 1.0)


def test_scales():
    np.testing.assert_array_equal(trial_scale([1, 2, 3, 4]), [1, 3, 1, 3])
    np.testing.assert_array_equal(sigma_test([1, 2, 3, 4]), [-1, 3, -1, 3])


def test_spatial_functions_vanish_at_ends():
    tab = spatial_basis_table(50, np.array([-1.0, 1.0]))
    assert np.abs(tab).max() <= 1e-12
    tab = spatial_basis_table(50, np.array([-1.0, 1.0]), test=True)
    assert np.abs(tab).max() <= 1e-12


def test_spatial_hand_values():
    assert spatial_basis_eval(1, 0.5) == pytest.approx(-1.125, rel=1e-15)
    assert spatial_test_eval(1, 0.5) == pytest.approx(1.125, rel=1e-15)
    assert spatial_test_eval(2, 0.0) == 0.0
    with pytest.raises(ParameterError):
        spatial_basis_eval(0, 0.1)


def test_temporal_functions():
    assert temporal_basis_eval(3, 0.3, -1.0) == 0.0
    assert temporal_test_eval(3, 0.3, 1.0) == 0.0
    assert temporal_basis_eval(1, 0.5, 0.0) == pytest.approx(1.0)
    assert temporal_test_eval(1, 0.5, 0.0) == pytest.approx(-1.0)
    # P_1^{a,b}(x) = (a - b)/2 + (a + b + 2) x / 2, so P_1^{-0.3,0.3}(0.4) = -0.3 + 0.4
    assert temporal_basis_eval(2, 0.3, 0.4) == pytest.approx(3 * 1.4**0.3 * 0.1, rel=1e-13)
    with pytest.raises(ParameterError):
        temporal_basis_eval(1, 1.0, 0.0)


@pytest.mark.parametrize("r", [1, 2, 3, 6])
def test_temporal_mirror_identity(r):
    eta = np.linspace(-0.9, 0.9, 7)
    # P^{a,b}(-x) = (-1)^n P^{b,a}(x) gives Psi_r(eta) = (-1)^(r-1) sigma~_r / sigma_r psi_r(-eta)
    ratio = sigma_test(r) / trial_scale(r)
    np.testing.assert_allclose(
        temporal_test_eval(r, 0.35, eta), (-1) ** (r - 1) * ratio * temporal_basis_eval(r, 0.35, -eta), rtol=1e-13
    )


def test_legendre_derivative_special_values():
    xi = np.array([-0.5, 0.0, 0.7])
    np.testing.assert_allclose(frac_deriv_legendre("left", 0, 0.3, xi), (1 + xi) ** -0.3 / gamma(0.7), rtol=1e-14)
    assert frac_deriv_legendre("left", 1, 0.5, 0.0) == pytest.approx(0.5641895835, rel=1e-9)


@pytest.mark.parametrize("n", [0, 1, 4, 7])
def test_legendre_derivative_mirror(n):
    xi = np.linspace(-0.8, 0.8, 9)
    np.testing.assert_allclose(
        frac_deriv_legendre(Side.RIGHT, n, 0.4, xi), (-1) ** n * frac_deriv_legendre(Side.LEFT, n, 0.4, -xi), rtol=1e-12
    )


@pytest.mark.parametrize("side,n,sigma,x", [("left", 3, 0.3, 0.2), ("right", 5, 0.8, -0.4), ("left", 8, 0.65, 0.9)])
def test_legendre_derivative_against_rl_quadrature(side, n, sigma, x):
    assert frac_deriv_legendre(side, n, sigma, x) == pytest.approx(rl_legendre(side, n, sigma, x), rel=1e-9)


def test_temporal_derivative_collapses_to_constant():
    eta = np.linspace(-0.9, 0.9, 5)
    np.testing.assert_allclose(frac_deriv_temporal("left", 1, 0.5, 0.5, eta), gamma(1.5), rtol=1e-14)
    ref = rl_polyfrac("left", 1, 0.5, 0.5, 0.3)
    assert ref == pytest.approx(gamma(1.5), rel=1e-9)


def test_temporal_derivative_polynomial_when_sigma_equals_tau():
    eta = np.linspace(-0.9, 0.9, 5)
    n, tau = 4, 0.35
    expected = trial_scale(n) * gamma(n + tau) / gamma(n) * eval_jacobi(n - 1, 0, 0, eta)
    np.testing.assert_allclose(frac_deriv_temporal("left", n, tau, tau, eta), expected, rtol=1e-13)


def test_temporal_zero_order_is_identity():
    eta = np.linspace(-0.9, 0.9, 5)
    np.testing.assert_allclose(frac_deriv_temporal("left", 3, 0.4, 0.0, eta), temporal_basis_eval(3, 0.4, eta), rtol=1e-14)
    np.testing.assert_allclose(frac_deriv_temporal("right", 3, 0.4, 0.0, eta), temporal_test_eval(3, 0.4, eta), rtol=1e-14)


def test_temporal_derivative_against_rl_quadrature():
    val = frac_deriv_temporal("left", 2, 0.4, 0.25, 0.3)
    assert val == pytest.approx(trial_scale(2) * rl_polyfrac("left", 2, 0.4, 0.25, 0.3), rel=1e-9)
    val = frac_deriv_temporal("right", 3, 0.2, 0.45, -0.6)
    assert val == pytest.approx(sigma_test(3) * rl_polyfrac("right", 3, 0.2, 0.45, -0.6), rel=1e-9)


def test_singular_endpoints_raise():
    with pytest.raises(EvaluationError):
        frac_deriv_legendre("left", 2, 0.3, -1.0)
    with pytest.raises(EvaluationError):
        frac_deriv_legendre("right", 2, 0.3, 1.0)
    with pytest.raises(EvaluationError):
        frac_deriv_temporal("left", 2, 0.2, 0.4, -1.0)
    # regular endpoint is fine
    assert np.isfinite(frac_deriv_legendre("left", 2, 0.3, 1.0))


def test_derivative_parameter_checks():
    with pytest.raises(ParameterError):
        frac_deriv_legendre("left", 2, 1.0, 0.0)
    with pytest.raises(ParameterError):
        frac_deriv_legendre("up", 2, 0.5, 0.0)
    with pytest.raises(ParameterError):
        frac_deriv_temporal("left", 2, 0.3, 1.0, 0.0)


def test_fractional_integral_against_quadrature():
    n, a, b, s, x = 3, 0.3, -0.3, 0.4, 0.25
    f = lambda y: eval_jacobi(n, a, b, y)
    # I^s[(1+y)^b P](x) = 1/Gamma(s) int_{-1}^x (1+y)^b (x-y)^(s-1) P(y) dy
    val, _ = integrate.quad(f, -1.0, x, weight="alg", wvar=(b, s - 1.0), **QUAD)
    assert frac_integral_polyfrac("left", n, a, b, s, x) == pytest.approx(val / gamma(s), rel=1e-10)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_integral_then_derivative_roundtrip(n):
    # left integral of order s of (1+x)^tau P^{-tau,tau} has exponent tau+s; differentiating by s returns it
    tau, s = 0.3, 0.2
    x = np.random.default_rng(n).uniform(-0.9, 0.9, 6)
    g = gamma(n - 1 + tau + 1) / gamma(n - 1 + tau + s + 1)
    back = frac_deriv_temporal("left", n, tau + s, s, x) / trial_scale(n)
    integ = frac_integral_polyfrac("left", n - 1, -tau, tau, s, x)
    np.testing.assert_allclose(integ / g, (1 + x) ** (tau + s) * eval_jacobi(n - 1, -tau - s, tau + s, x), rtol=1e-12)
    original = temporal_basis_eval(n, tau, x) / trial_scale(n)
    # D^s of (1+x)^(tau+s) P^{-(tau+s),tau+s} is Gamma(n+tau+s)/Gamma(n+tau) (1+x)^tau P^{-tau,tau}
    np.testing.assert_allclose(back * gamma(n + tau) / gamma(n + tau + s), original, rtol=1e-10)


def test_domain_scale_factor():
    assert domain_scale_factor(0.7, 2.0) == 1.0
    assert domain_scale_factor(1.0, 4.0) == 0.5
    assert domain_scale_factor(0.5, 8.0) == pytest.approx(0.5)


def test_configs_validate():
    with pytest.raises(ParameterError):
        TemporalBasisConfig(0, 0.3)
    with pytest.raises(ParameterError):
        TemporalBasisConfig(3, 0.3, T=0.0)
    with pytest.raises(ParameterError):
        SpatialBasisConfig(3, 1.0, -1.0)
    assert SpatialBasisConfig(3, 0.0, 3.0).length == 3.0
