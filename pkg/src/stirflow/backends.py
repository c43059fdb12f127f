"""Pairwise Cauchy-sum backends.

Every discrete kernel application reduces to sums S(s) = sum_{t != s}
q_t / (eta_t - eta_s) over all nodes.  The ``dense`` backend evaluates them
directly in O(N^2); the ``treecode`` backend clusters far-field interactions
hierarchically.  Both are matrix-free from the caller's point of view.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = ["DenseBackend", "get_backend"]


@njit(cache=True)
def _cauchy_direct(ex, ey, qx, qy, out_x, out_y):
    n = ex.size
    for s in range(n):
        ax = 0.0
        ay = 0.0
        esx = ex[s]
        esy = ey[s]
        for t in range(n):
            if t == s:
                continue
            dx = ex[t] - esx
            dy = ey[t] - esy
            inv = 1.0 / (dx * dx + dy * dy)
            ax += (qx[t] * dx + qy[t] * dy) * inv
            ay += (qy[t] * dx - qx[t] * dy) * inv
        out_x[s] = ax
        out_y[s] = ay


@njit(cache=True)
def _cauchy_targets(ex, ey, qx, qy, zx, zy, pow2, out_x, out_y):
    """Sum q_t/(eta_t - z)^pow2 at external targets (no self-exclusion)."""
    for s in range(zx.size):
        ax = 0.0
        ay = 0.0
        for t in range(ex.size):
            dx = ex[t] - zx[s]
            dy = ey[t] - zy[s]
            r2 = dx * dx + dy * dy
            if pow2:
                # 1/d^2 = conj(d)^2 / |d|^4
                nx = dx * dx - dy * dy
                ny = -2.0 * dx * dy
                inv = 1.0 / (r2 * r2)
                ax += (qx[t] * nx - qy[t] * ny) * inv
                ay += (qy[t] * nx + qx[t] * ny) * inv
            else:
                inv = 1.0 / r2
                ax += (qx[t] * dx + qy[t] * dy) * inv
                ay += (qy[t] * dx - qx[t] * dy) * inv
        out_x[s] = ax
        out_y[s] = ay


class DenseBackend:
    """Direct O(N^2) reference backend."""

    name = "dense"

    def __init__(self, eta: np.ndarray):
        self._ex = np.ascontiguousarray(eta.real)
        self._ey = np.ascontiguousarray(eta.imag)

    def pair_sum(self, q: np.ndarray) -> np.ndarray:
        out_x = np.empty(self._ex.size)
        out_y = np.empty(self._ex.size)
        _cauchy_direct(self._ex, self._ey,
                       np.ascontiguousarray(q.real),
                       np.ascontiguousarray(q.imag), out_x, out_y)
        return out_x + 1j * out_y


def target_sum(eta: np.ndarray, q: np.ndarray, z: np.ndarray,
               squared: bool = False) -> np.ndarray:
    """sum_t q_t/(eta_t - z) (or squared denominator) at external targets."""
    out_x = np.empty(z.size)
    out_y = np.empty(z.size)
    _cauchy_targets(np.ascontiguousarray(eta.real),
                    np.ascontiguousarray(eta.imag),
                    np.ascontiguousarray(q.real),
                    np.ascontiguousarray(q.imag),
                    np.ascontiguousarray(z.real),
                    np.ascontiguousarray(z.imag),
                    squared, out_x, out_y)
    return out_x + 1j * out_y


def get_backend(name: str, eta: np.ndarray):
    if name == "dense":
        return DenseBackend(eta)
    if name == "treecode":
        from .treecode import TreecodeBackend
        return TreecodeBackend(eta)
    raise ValueError(f"unknown matvec backend {name!r}")
