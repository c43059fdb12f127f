import numpy as np
import pytest

from stirflow.boundary import CurveSpec, DomainSpec, FLUID, discretize
from stirflow.field import (FieldGrid, GridSpec, StirrerProblem,
                            circulation_and_flux, circulation_of,
                            potential_at, solve_flow, streamfunction_grid,
                            velocity_at)


def _single_circle(R=0.3, n=256):
    dom = DomainSpec(False, (CurveSpec.circle(0j, R),))
    return dom, discretize(dom, n)


def test_translating_cylinder_is_a_dipole():
    # circle of radius a moving with velocity U: w(z) = -U a^2 / z
    a, U = 0.3, 1.0
    dom, b = _single_circle(a)
    sol = solve_flow(StirrerProblem(dom, U=(U,), chi=(0.0,)), b)
    z = np.exp(1j * np.linspace(0, 2 * np.pi, 65)[:-1])
    w = potential_at(sol, z)
    exact = -U * a ** 2 / z
    # w is defined up to a real additive constant
    shift = (w - exact).mean()
    assert abs(shift.imag) < 1e-12
    assert np.abs(w - exact - shift).max() < 1e-12


def test_point_vortex_speed_and_circulation():
    dom, b = _single_circle(0.3)
    sol = solve_flow(StirrerProblem(dom, U=(0j,), chi=(1.0,)), b)
    for R in (0.5, 1.0, 2.0):
        z = R * np.exp(1j * np.linspace(0, 2 * np.pi, 17)[:-1])
        speed = np.abs(velocity_at(sol, z))
        assert np.abs(speed - 1 / (2 * np.pi * R)).max() < 1e-12
    assert abs(circulation_of(sol, 0) - 1.0) < 1e-8


def test_flux_through_rigid_stirrer_vanishes():
    dom, b = _single_circle(0.3)
    sol = solve_flow(StirrerProblem(dom, U=(0.7 - 0.2j,), chi=(0.5,)), b)
    circ, flux = circulation_and_flux(sol, 0)
    assert abs(flux) < 1e-8
    assert abs(circ - 0.5) < 1e-8


def test_velocity_is_linear_in_the_data():
    dom = DomainSpec(False, (CurveSpec.circle(-1, 0.3),
                             CurveSpec.circle(1, 0.3)))
    b = discretize(dom, 128)
    s1 = solve_flow(StirrerProblem(dom, U=(1.0, 0j), chi=(0.0, 0.0)), b)
    s2 = solve_flow(StirrerProblem(dom, U=(0j, 1j), chi=(0.0, 0.3)), b)
    s12 = solve_flow(StirrerProblem(dom, U=(1.0, 1j), chi=(0.0, 0.3)), b)
    z = np.array([0.0 + 0.5j, 2.5 - 1j, -0.1 - 2j])
    v = velocity_at(s1, z) + velocity_at(s2, z)
    assert np.abs(v - velocity_at(s12, z)).max() < 1e-11


def test_stationary_boundaries_have_constant_stream_function():
    dom = DomainSpec(True, (CurveSpec.circle(0j, 1.0),
                            CurveSpec.circle(0.4, 0.15)))
    b = discretize(dom, 256)
    sol = solve_flow(StirrerProblem(dom, U=(0j, 0j), chi=(0.0, 1.0)), b)
    psi = sol.w_boundary().imag
    for j in range(2):
        block = psi[b.curve_slice(j)]
        assert np.abs(block - block.mean()).max() < 1e-10


def test_no_slip_normal_velocity_on_moving_stirrer():
    # Re[-i w] = Re[-i conj(U) eta] + const on a rigid stirrer
    dom = DomainSpec(True, (CurveSpec.circle(0j, 1.0),
                            CurveSpec.circle(-0.3 + 0.2j, 0.12)))
    b = discretize(dom, 256)
    U = 0.8 + 0.3j
    sol = solve_flow(StirrerProblem(dom, U=(0j, U), chi=(0.0, 0.0)), b)
    res = (-1j * sol.w_boundary()).real \
        - (-1j * np.conj(U) * b.eta).real * (b.curve_of == 1)
    for j in range(2):
        block = res[b.curve_slice(j)]
        assert np.abs(block - block.mean()).max() < 1e-10


def test_anchor_outside_curve_rejected():
    dom, b = _single_circle(0.3)
    p = StirrerProblem(dom, U=(0j,), chi=(1.0,), anchors=(2.0 + 0j,))
    with pytest.raises(ValueError):
        solve_flow(p, b)


def test_data_length_validation():
    dom, _ = _single_circle()
    with pytest.raises(ValueError):
        StirrerProblem(dom, U=(1.0, 2.0), chi=(0.0,))


def test_bounded_vessel_data_forced_to_rest():
    dom = DomainSpec(True, (CurveSpec.circle(0j, 1.0),
                            CurveSpec.circle(0.4, 0.1)))
    p = StirrerProblem(dom, U=(5.0, 1.0), chi=(2.0, 0.0))
    assert p.U[0] == 0
    assert p.chi[0] == 0


def test_streamfunction_grid_masks_and_values():
    dom = DomainSpec(True, (CurveSpec.circle(0j, 1.0),
                            CurveSpec.circle(0.5, 0.1)))
    b = discretize(dom, 256)
    sol = solve_flow(StirrerProblem(dom, U=(0j, 1.0), chi=(0.0, 0.0)), b)
    fg = streamfunction_grid(sol, GridSpec(-1.2, 1.2, -1.2, 1.2, 40, 40))
    assert fg.psi.shape == (40, 40)
    fluid = fg.mask == FLUID
    assert np.isfinite(fg.psi[fluid]).all()
    assert np.isnan(fg.psi[~fluid]).all()
    assert fluid.sum() > 0.3 * fg.mask.size


def test_grid_must_overlap_fluid():
    dom, b = _single_circle(0.3)
    sol = solve_flow(StirrerProblem(dom, U=(1.0,), chi=(0.0,)), b)
    with pytest.raises(ValueError):
        streamfunction_grid(sol, GridSpec(-0.1, 0.1, -0.1, 0.1, 4, 4))
