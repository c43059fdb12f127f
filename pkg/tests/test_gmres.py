import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stirflow.gmres import gmres


def _well_conditioned(rng, n):
    # identity plus a modest perturbation keeps the spectrum clustered
    return np.eye(n) + 0.3 * rng.standard_normal((n, n)) / np.sqrt(n)


def test_identity_converges_immediately():
    b = np.arange(1.0, 6.0)
    res = gmres(lambda x: x, b)
    assert res.converged
    assert res.iterations == 1
    assert np.allclose(res.x, b, atol=1e-14)


def test_matches_direct_solve():
    rng = np.random.default_rng(1)
    A = _well_conditioned(rng, 40)
    b = rng.standard_normal(40)
    res = gmres(lambda x: A @ x, b, tol=1e-14)
    assert res.converged
    assert np.abs(res.x - np.linalg.solve(A, b)).max() < 1e-10


def test_residual_matches_reported():
    rng = np.random.default_rng(2)
    A = _well_conditioned(rng, 30)
    b = rng.standard_normal(30)
    res = gmres(lambda x: A @ x, b, tol=1e-10)
    true_rel = np.linalg.norm(b - A @ res.x) / np.linalg.norm(b)
    assert abs(true_rel - res.relres) < 1e-12


def test_maxiter_reports_nonconvergence():
    rng = np.random.default_rng(3)
    A = _well_conditioned(rng, 50)
    b = rng.standard_normal(50)
    res = gmres(lambda x: A @ x, b, tol=1e-16, maxiter=2)
    assert not res.converged
    assert res.iterations == 2


def test_initial_guess_is_used():
    rng = np.random.default_rng(4)
    A = _well_conditioned(rng, 20)
    x = rng.standard_normal(20)
    res = gmres(lambda v: A @ v, A @ x, x0=x)
    assert res.converged
    assert res.iterations <= 1
    assert np.abs(res.x - x).max() < 1e-12


def test_zero_rhs_gives_zero():
    res = gmres(lambda x: 2 * x, np.zeros(7))
    assert res.converged
    assert np.all(res.x == 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 25), st.integers(0, 1000))
def test_random_systems_solved_to_tolerance(n, seed):
    rng = np.random.default_rng(seed)
    A = _well_conditioned(rng, n)
    b = rng.standard_normal(n)
    res = gmres(lambda x: A @ x, b, tol=1e-12, maxiter=n + 2)
    assert res.converged
    assert np.linalg.norm(A @ res.x - b) <= 1e-10 * max(np.linalg.norm(b), 1)
