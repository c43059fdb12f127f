"""FFT helpers on uniform periodic grids: differentiation and conjugation."""

import numpy as np


def signed_freqs(n: int) -> np.ndarray:
    """Signed integer FFT frequencies with the Nyquist mode zeroed.

    Zeroing the Nyquist frequency keeps differentiation of real samples real
    and is spectrally negligible for resolved data.
    """
    k = np.fft.fftfreq(n, d=1.0 / n)
    k[n // 2] = 0.0
    return k


def trig_derivative(samples: np.ndarray) -> np.ndarray:
    """d/dt of 2pi-periodic samples on the uniform grid t_i = 2*pi*i/n.

    Real and imaginary parts are differentiated separately, so complex
    boundary data (e.g. map boundary values) is handled as two real series.
    """
    samples = np.asarray(samples)
    n = samples.shape[-1]
    if n % 2 != 0:
        raise ValueError("trig_derivative requires an even number of samples")
    ik = 1j * signed_freqs(n)
    if np.iscomplexobj(samples):
        dre = np.fft.ifft(ik * np.fft.fft(samples.real)).real
        dim = np.fft.ifft(ik * np.fft.fft(samples.imag)).real
        return dre + 1j * dim
    return np.fft.ifft(ik * np.fft.fft(samples)).real


def per_curve(fn, flat: np.ndarray, n: int) -> np.ndarray:
    """Apply a length-n periodic transform to each curve block of a flat array."""
    out = np.empty_like(flat, dtype=complex if np.iscomplexobj(flat) else float)
    for start in range(0, flat.size, n):
        out[start:start + n] = fn(flat[start:start + n])
    return out
