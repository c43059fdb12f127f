"""Hierarchical evaluation of the pairwise Cauchy sum.

S(s) = sum_{t != s} q_t / (eta_t - eta_s) is evaluated by splitting the
nodes into a quadtree.  Well separated source clusters contribute through a
truncated Laurent expansion about the cluster center,

    sum_t q_t / (eta_t - z) = -sum_{k=0}^{p} m_k / (z - c)^{k+1},
    m_k = sum_t q_t (eta_t - c)^k,

whose truncation error decays like theta^(p+1) under the acceptance rule
|c_src - c_trg| > r_src / theta + r_trg.  The remaining near-field blocks
are summed directly.  Expansion coefficients are formed once per leaf and
shifted upward to parents, so a full evaluation costs O(N log N).
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = ["TreecodeBackend"]


@njit(cache=True)
def _far_blocks(zx, zy, cx, cy, mx, my, out_x, out_y):
    """Horner evaluation of -sum_k m_k / (z - c)^{k+1} for a batch of
    expansions (one row of mx/my per accepted source cluster)."""
    p1 = mx.shape[1]
    for a in range(cx.size):
        for s in range(zx.size):
            dx = zx[s] - cx[a]
            dy = zy[s] - cy[a]
            inv = 1.0 / (dx * dx + dy * dy)
            wx = dx * inv
            wy = -dy * inv
            hx = 0.0
            hy = 0.0
            for k in range(p1 - 1, -1, -1):
                tx = hx * wx - hy * wy + mx[a, k]
                hy = hx * wy + hy * wx + my[a, k]
                hx = tx
            out_x[s] -= hx * wx - hy * wy
            out_y[s] -= hx * wy + hy * wx


@njit(cache=True)
def _direct_block(ex, ey, qx, qy, zx, zy, out_x, out_y):
    for s in range(zx.size):
        ax = 0.0
        ay = 0.0
        for t in range(ex.size):
            dx = ex[t] - zx[s]
            dy = ey[t] - zy[s]
            r2 = dx * dx + dy * dy
            if r2 == 0.0:
                continue
            inv = 1.0 / r2
            ax += (qx[t] * dx + qy[t] * dy) * inv
            ay += (qy[t] * dx - qx[t] * dy) * inv
        out_x[s] += ax
        out_y[s] += ay


class _Node:
    __slots__ = ("idx", "center", "radius", "children", "coeffs")

    def __init__(self, idx, center, radius):
        self.idx = idx
        self.center = center
        self.radius = radius
        self.children = []
        self.coeffs = None


class TreecodeBackend:
    """Quadtree accelerated pair_sum, interchangeable with DenseBackend."""

    name = "treecode"

    def __init__(self, eta: np.ndarray, leaf_size: int = 128,
                 order: int = 36, theta: float = 0.5):
        if not 0.0 < theta < 1.0:
            raise ValueError("acceptance parameter theta must be in (0, 1)")
        self.eta = np.ascontiguousarray(eta, dtype=complex)
        self.leaf_size = int(leaf_size)
        self.order = int(order)
        self.theta = float(theta)
        k = np.arange(order + 1)
        self._binom_shift = _shift_binomials(order)
        self._k = k
        self._shift_pows = np.maximum(k[:, None] - k[None, :], 0)
        self.leaves: list[_Node] = []
        self.root = self._build(np.arange(eta.size))
        self._ex = np.ascontiguousarray(self.eta.real)
        self._ey = np.ascontiguousarray(self.eta.imag)

    def _build(self, idx: np.ndarray) -> _Node:
        pts = self.eta[idx]
        lo = complex(pts.real.min(), pts.imag.min())
        hi = complex(pts.real.max(), pts.imag.max())
        center = 0.5 * (lo + hi)
        radius = float(np.abs(pts - center).max())
        node = _Node(idx, center, radius)
        if idx.size <= self.leaf_size:
            self.leaves.append(node)
            return node
        right = pts.real >= center.real
        upper = pts.imag >= center.imag
        for quad in (right & upper, right & ~upper,
                     ~right & upper, ~right & ~upper):
            if quad.any():
                node.children.append(self._build(idx[quad]))
        if len(node.children) == 1:
            # degenerate split (coincident coordinates), force a halving
            node.children = [self._build(idx[: idx.size // 2]),
                             self._build(idx[idx.size // 2:])]
        return node

    def _upward(self, node: _Node, q: np.ndarray) -> np.ndarray:
        if not node.children:
            d = self.eta[node.idx] - node.center
            powers = np.ones((node.idx.size, self.order + 1), dtype=complex)
            np.cumprod(np.broadcast_to(d[:, None],
                                       (d.size, self.order)), axis=1,
                       out=powers[:, 1:])
            node.coeffs = q[node.idx] @ powers
            return node.coeffs
        coeffs = np.zeros(self.order + 1, dtype=complex)
        for child in node.children:
            m = self._upward(child, q)
            d = child.center - node.center
            dp = d ** self._k
            coeffs += (self._binom_shift * dp[self._shift_pows]) @ m
        node.coeffs = coeffs
        return coeffs

    def pair_sum(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=complex)
        self._upward(self.root, q)
        out = np.zeros(self.eta.size, dtype=complex)
        qx = np.ascontiguousarray(q.real)
        qy = np.ascontiguousarray(q.imag)
        for leaf in self.leaves:
            self._accumulate(leaf, qx, qy, out)
        return out

    def _accumulate(self, leaf: _Node, qx, qy, out):
        z = self.eta[leaf.idx]
        ox = np.zeros(z.size)
        oy = np.zeros(z.size)
        zx = np.ascontiguousarray(z.real)
        zy = np.ascontiguousarray(z.imag)
        accepted = []
        direct = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if abs(node.center - leaf.center) > (node.radius / self.theta
                                                 + leaf.radius):
                accepted.append(node)
            elif node.children:
                stack.extend(node.children)
            else:
                direct.append(node.idx)
        if accepted:
            c = np.array([a.center for a in accepted])
            m = np.array([a.coeffs for a in accepted])
            _far_blocks(zx, zy, np.ascontiguousarray(c.real),
                        np.ascontiguousarray(c.imag),
                        np.ascontiguousarray(m.real),
                        np.ascontiguousarray(m.imag), ox, oy)
        if direct:
            src = np.concatenate(direct)
            _direct_block(self._ex[src], self._ey[src], qx[src], qy[src],
                          zx, zy, ox, oy)
        out[leaf.idx] = ox + 1j * oy


def _shift_binomials(order: int) -> np.ndarray:
    """Lower-triangular binomial table C(k, j) used to re-center expansions."""
    b = np.zeros((order + 1, order + 1))
    b[:, 0] = 1.0
    for k in range(1, order + 1):
        b[k, 1:k + 1] = b[k - 1, 1:k + 1] + b[k - 1, :k]
    return b
