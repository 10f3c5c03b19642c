import numpy as np
import pytest

from dopg.basis import spatial_basis_eval, temporal_basis_eval
from dopg.errors import DomainError, ParameterError
from dopg.postproc import (
    CSV_COLUMNS,
    GridSpec,
    eval_on_grid,
    eval_solution,
    fit_rate,
    linf_error,
)
from dopg.solver import SolutionTensor


def tensor(coeffs, tau_b=0.3, T=2.0, bounds=None):
    coeffs = np.asarray(coeffs, dtype=float)
    bounds = bounds or ((-1.0, 1.0),) * (coeffs.ndim - 1)
    return SolutionTensor(coeffs, tau_b, T, tuple(bounds))


def naive(U, t, xs):
    total = 0.0
    for idx in np.ndindex(U.shape):
        term = U.coeffs[idx] * temporal_basis_eval(idx[0] + 1, U.tau_b, 2 * t / U.T - 1)
        for j, (a, b) in enumerate(U.bounds):
            term *= spatial_basis_eval(idx[j + 1] + 1, 2 * (xs[j] - a) / (b - a) - 1)
        total += term
    return total


def test_zero_tensor_evaluates_to_zero():
    U = tensor(np.zeros((3, 4, 2)))
    pts = np.array([[0.5, 0.1, -0.3], [1.9, 0.9, 0.0]])
    assert np.all(eval_solution(U, pts) == 0)


def test_single_mode_matches_basis_function():
    c = np.zeros((3, 4))
    c[1, 2] = 1.0
    U = tensor(c)
    pts = np.array([[0.7, 0.25], [1.3, -0.6]])
    ref = [temporal_basis_eval(2, 0.3, t - 1) * spatial_basis_eval(3, x) for t, x in pts]
    np.testing.assert_allclose(eval_solution(U, pts), ref, rtol=1e-13)


def test_against_naive_sum_3d_mapped_domain():
    rng = np.random.default_rng(3)
    U = tensor(rng.standard_normal((3, 3, 2, 4)), bounds=((0.0, 2.0), (-1.0, 1.0), (1.0, 4.0)))
    pts = np.column_stack([rng.uniform(0, 2, 6), rng.uniform(0, 2, 6), rng.uniform(-1, 1, 6), rng.uniform(1, 4, 6)])
    ref = [naive(U, p[0], p[1:]) for p in pts]
    np.testing.assert_allclose(eval_solution(U, pts), ref, atol=1e-13 * np.abs(ref).max())


def test_evaluation_is_linear():
    rng = np.random.default_rng(4)
    A, B = rng.standard_normal((2, 3, 5))
    pts = np.column_stack([rng.uniform(0, 2, 8), rng.uniform(-1, 1, 8)])
    lhs = eval_solution(tensor(2 * A - 3 * B), pts)
    rhs = 2 * eval_solution(tensor(A), pts) - 3 * eval_solution(tensor(B), pts)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_grid_evaluation_matches_scattered():
    rng = np.random.default_rng(5)
    U = tensor(rng.standard_normal((3, 4, 3)))
    axes = GridSpec(7).axes(U.T, U.bounds)
    grid = eval_on_grid(U, axes)
    T, X, Y = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([T.ravel(), X.ravel(), Y.ravel()])
    np.testing.assert_allclose(grid.ravel(), eval_solution(U, pts), atol=1e-13)


def test_points_outside_domain_rejected():
    U = tensor(np.ones((2, 2)))
    with pytest.raises(DomainError):
        eval_solution(U, [[0.5, 1.5]])
    with pytest.raises(DomainError):
        eval_solution(U, [[2.5, 0.0]])
    with pytest.raises(ParameterError):
        eval_solution(U, [[0.5, 0.0, 0.0]])


class Separable:
    """Exact representation of a single product mode, used as a reference solution."""

    def __init__(self, n, m, tau_b=0.3, T=2.0):
        self.n, self.m, self.tau_b, self.T = n, m, tau_b, T

    def grid_factors(self, t, xs):
        return [temporal_basis_eval(self.n, self.tau_b, 2 * t / self.T - 1), spatial_basis_eval(self.m, xs[0])]


def test_reconstruction_has_zero_error():
    c = np.zeros((3, 4))
    c[1, 3] = 1.0
    rep = linf_error(tensor(c), Separable(2, 4), 51)
    assert rep.linf <= 1e-13
    # the plain callable path gives the same answer
    f = lambda t, x: temporal_basis_eval(2, 0.3, t - 1) * spatial_basis_eval(4, x)
    assert linf_error(tensor(c), f, 51).linf <= 1e-13


def test_error_stable_under_grid_refinement():
    c = np.zeros((3, 4))
    c[0, 0] = 1.0
    exact = lambda t, x: t * np.sin(np.pi * x)
    coarse = linf_error(tensor(c), exact, 101).linf
    fine = linf_error(tensor(c), exact, 201).linf
    assert abs(coarse - fine) <= 0.05 * fine


def test_l2_bounded_by_linf():
    rng = np.random.default_rng(6)
    U = tensor(rng.standard_normal((2, 3)))
    rep = linf_error(U, lambda t, x: 0 * t + 0 * x, 41)
    measure = 2.0 * 0.99 * 2.0
    assert 0 < rep.l2 <= rep.linf * np.sqrt(measure) * (1 + 1e-12)


def test_error_report_csv():
    rep = linf_error(tensor(np.ones((2, 2))), lambda t, x: 0 * t + 0 * x, 11, seconds=0.5)
    lines = rep.to_csv().strip().splitlines()
    assert lines[0].split(",") == list(CSV_COLUMNS)
    assert lines[1].startswith("2x2,")


def test_rate_of_synthetic_power_law():
    hist = [(m, 3.0 * m**-4.0) for m in (2, 4, 8, 16, 32)]
    fit = fit_rate(hist)
    assert fit.rate == pytest.approx(4.0, abs=1e-6)
    assert fit.monotone and fit.residual <= 1e-10


def test_rate_stops_at_plateau():
    hist = [(2, 1e-2), (3, 1e-5), (4, 1e-8), (5, 1e-11), (6, 5e-14), (7, 8e-14), (8, 4e-14)]
    fit = fit_rate(hist, floor=1e-13)
    assert fit.used == (1, 2, 3, 4)
    assert fit.monotone


def test_rate_input_checks():
    with pytest.raises(ParameterError):
        fit_rate([(1, 1.0), (2, 0.5)])
    with pytest.raises(ParameterError):
        fit_rate([(1, 1.0), (3, 0.5), (2, 0.1)])
    with pytest.raises(ParameterError):
        fit_rate([(1, 1.0), (2, 0.0), (3, 0.1)])


def test_grid_spec_checks():
    with pytest.raises(ParameterError):
        GridSpec(1)
    with pytest.raises(ParameterError):
        GridSpec(10, 0.0)
