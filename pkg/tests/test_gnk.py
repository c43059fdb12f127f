import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stirflow import gnk
from stirflow.boundary import CurveSpec, DomainSpec, discretize
from conftest import bc_residual


def _analytic_bounded(b):
    """A function analytic on the fluid side of a bounded test domain:
    polynomial part plus poles inside each hole and outside the vessel."""
    poles = [b.eta[b.curve_slice(j)].mean() for j in range(1, b.ncurves)]
    poles.append(3.5 + 1j)

    def f(z):
        out = 0.2 * z ** 2 - 0.1j * z + 0.05
        for k, p in enumerate(poles):
            out = out + (0.3 + 0.1j * k) / (z - p)
        return out
    return f


def _analytic_unbounded(b):
    poles = [b.eta[b.curve_slice(j)].mean() for j in range(b.ncurves)]

    def f(z):
        out = 0j
        for k, p in enumerate(poles):
            out = out + (0.4 - 0.2j * k) / (z - p)
        return out
    return f


def test_unit_disk_kernel_values(unit_disk):
    sys = gnk.kernel_system(unit_disk)
    N, M1 = gnk.eval_kernels(sys, 3, 40)
    assert abs(N + 1 / (2 * np.pi)) < 1e-13
    assert abs(M1) < 1e-13
    Nd, M1d = gnk.eval_kernels(sys, 7, 7)
    assert abs(Nd + 1 / (2 * np.pi)) < 1e-13
    assert abs(M1d) < 1e-13


def test_assembled_matches_matrix_free(annular3):
    sys = gnk.kernel_system(annular3)
    rng = np.random.default_rng(0)
    x = rng.standard_normal(annular3.total)
    N = gnk.assemble_N(sys)
    M = gnk.assemble_M(sys)
    assert np.abs(N @ x - gnk.apply_N(sys, x)).max() < 1e-13
    assert np.abs(M @ x - gnk.apply_M(sys, x)).max() < 1e-13


def test_solve_recovers_analytic_function_bounded(annular3):
    f = _analytic_bounded(annular3)
    sys = gnk.kernel_system(annular3)
    gamma = (sys.A * f(annular3.eta)).real
    rh = gnk.solve_rh(sys, gamma)
    assert np.abs(rh.f_boundary - f(annular3.eta)).max() < 1e-11
    assert np.abs(rh.h.values).max() < 1e-11
    assert max(bc_residual(annular3, sys, rh)) < 1e-11


def test_solve_recovers_analytic_function_unbounded(two_circles_unbounded):
    b = two_circles_unbounded
    f = _analytic_unbounded(b)
    sys = gnk.kernel_system(b)
    gamma = (sys.A * f(b.eta)).real
    rh = gnk.solve_rh(sys, gamma)
    assert np.abs(rh.f_boundary - f(b.eta)).max() < 1e-11
    assert np.abs(rh.h.values).max() < 1e-11


def test_h_deviation_reported_small(annular3):
    sys = gnk.kernel_system(annular3)
    gamma = (sys.A * _analytic_bounded(annular3)(annular3.eta)).real
    rh = gnk.solve_rh(sys, gamma)
    assert rh.h_deviation < 1e-11
    assert rh.residual <= 1e-13


def test_nonconvergence_raises(annular3):
    sys = gnk.kernel_system(annular3)
    gamma = np.cos(annular3.t)
    opts = gnk.SolverOptions(gmres_tol=1e-14, max_iterations=2)
    with pytest.raises(gnk.SolverConvergenceError) as exc:
        gnk.solve_rh(sys, gamma, opts)
    assert exc.value.residual is not None


def test_cauchy_eval_interior_values_and_derivative(annular3):
    f = _analytic_bounded(annular3)
    targets = np.array([0.1 + 0.05j, -0.2 - 0.3j, 0.05 + 0.45j])
    vals = gnk.cauchy_eval(annular3, f(annular3.eta), targets)
    assert np.abs(vals - f(targets)).max() < 1e-11
    eps = 1e-6
    dnum = (f(targets + eps) - f(targets - eps)) / (2 * eps)
    dvals = gnk.cauchy_eval(annular3, f(annular3.eta), targets, derivative=1)
    assert np.abs(dvals - dnum).max() < 1e-5


def test_treecode_backend_matches_dense(annular3):
    sd = gnk.kernel_system(annular3, backend="dense")
    stc = gnk.kernel_system(annular3, backend="treecode")
    rng = np.random.default_rng(1)
    x = rng.standard_normal(annular3.total)
    assert np.abs(gnk.apply_N(sd, x) - gnk.apply_N(stc, x)).max() < 1e-10
    assert np.abs(gnk.apply_M(sd, x) - gnk.apply_M(stc, x)).max() < 1e-10


def test_explicit_theta_changes_A(two_circles_unbounded):
    b = two_circles_unbounded
    sys = gnk.kernel_system(b, theta=(0.0, 0.0))
    assert np.abs(sys.A - 1j).max() < 1e-14  # e^{i pi/2} for unbounded


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 500), st.floats(-2, 2), st.floats(-2, 2))
def test_apply_N_linearity(seed, a, c):
    dom = DomainSpec(False, (CurveSpec.circle(-1, 0.4),
                             CurveSpec.circle(1, 0.4)))
    b = discretize(dom, 32)
    sys = gnk.kernel_system(b)
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal((2, b.total))
    lhs = gnk.apply_N(sys, a * x + c * y)
    rhs = a * gnk.apply_N(sys, x) + c * gnk.apply_N(sys, y)
    assert np.abs(lhs - rhs).max() < 1e-9 * (1 + abs(a) + abs(c))
