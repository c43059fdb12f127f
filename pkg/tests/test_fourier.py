import numpy as np
from hypothesis import given, settings, strategies as st

from stirflow.fourier import per_curve, signed_freqs, trig_derivative


def _nodes(n):
    return np.arange(n) * (2.0 * np.pi / n)


def test_single_mode():
    t = _nodes(64)
    f = np.exp(1j * t)
    df = trig_derivative(f)
    assert np.abs(df - 1j * np.exp(1j * t)).max() < 1e-12


def test_constant_is_flat():
    df = trig_derivative(np.full(32, 3.7 + 0j))
    assert np.abs(df).max() < 1e-14


def test_joukowski_image_derivative():
    # circle of radius R through z + R^2/z, against the closed form
    R = 0.8
    t = _nodes(256)
    eta = R * np.exp(1j * t)
    f = eta + R**2 / eta
    df_exact = 1j * eta - 1j * R**2 / eta
    assert np.abs(trig_derivative(f) - df_exact).max() < 1e-10


def test_real_imag_parts_differentiated_separately():
    t = _nodes(128)
    f = np.cos(3 * t) + 1j * np.sin(5 * t)
    df = trig_derivative(f)
    assert np.abs(df.real + 3 * np.sin(3 * t)).max() < 1e-12
    assert np.abs(df.imag - 5 * np.cos(5 * t)).max() < 1e-12


def test_signed_freqs_zeroes_nyquist():
    k = signed_freqs(8)
    assert k[4] == 0
    assert list(k[:4]) == [0, 1, 2, 3]
    assert list(k[5:]) == [-3, -2, -1]


def test_per_curve_blocks_are_independent():
    t = _nodes(64)
    flat = np.concatenate([np.cos(t), np.sin(2 * t)])
    out = per_curve(trig_derivative, flat, 64)
    assert np.abs(out[:64].real + np.sin(t)).max() < 1e-12
    assert np.abs(out[64:].real - 2 * np.cos(2 * t)).max() < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 10), st.integers(1, 10),
       st.floats(-3, 3), st.floats(-3, 3))
def test_derivative_is_linear(k1, k2, a, b):
    t = _nodes(64)
    f, g = np.exp(1j * k1 * t), np.exp(1j * k2 * t)
    lhs = trig_derivative(a * f + b * g)
    rhs = a * trig_derivative(f) + b * trig_derivative(g)
    assert np.abs(lhs - rhs).max() < 1e-10
