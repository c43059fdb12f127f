"""Generalized Neumann kernel machinery and the boundary integral solve.

The kernels are built from A(t) = exp(i*(pi/2 - theta_j)) * (eta(t) - alpha)
for bounded domains and A(t) = exp(i*(pi/2 - theta_j)) for unbounded ones,
with one angle theta_j per boundary component.  The boundary-value problem
Re[A f] = gamma + h is solved through the integral equation
(I - N) mu = -M gamma, after which h = [M mu - (I - N) gamma]/2 and
f = (gamma + h + i mu)/A on the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fourier
from .backends import get_backend, target_sum
from .boundary import DiscretizedBoundary, PiecewiseConstantFn
from .gmres import gmres

__all__ = [
    "KernelSystem",
    "RHSolution",
    "SolverOptions",
    "kernel_system",
    "eval_kernels",
    "apply_N",
    "apply_M",
    "assemble_N",
    "assemble_M",
    "solve_rh",
    "cauchy_eval",
    "SolverConvergenceError",
]

# theta == pi/2 on every curve makes A = eta - alpha (bounded) or A = 1
# (unbounded): the convention the stirrer problem needs.
FLOW_THETA = 0.5 * np.pi


class SolverConvergenceError(RuntimeError):
    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class SolverOptions:
    gmres_tol: float = 1e-14
    max_iterations: int = 100
    backend: str = "dense"


@dataclass(frozen=True)
class KernelSystem:
    boundary: DiscretizedBoundary
    theta: PiecewiseConstantFn
    alpha: complex
    A: np.ndarray
    Aprime_over_A: np.ndarray
    c: np.ndarray        # eta'/A, the Cauchy-sum charges factor
    Ndiag: np.ndarray    # diagonal limit of N
    M1diag: np.ndarray   # diagonal limit of the smooth part of M
    backend: object

    @property
    def n(self) -> int:
        return self.boundary.n


def kernel_system(b: DiscretizedBoundary, theta=None, alpha: complex = 0j,
                  backend: str = "dense") -> KernelSystem:
    """Build A, its logarithmic derivative, and the kernel diagonal limits."""
    if theta is None:
        theta = PiecewiseConstantFn.constant(FLOW_THETA, b.ncurves)
    elif not isinstance(theta, PiecewiseConstantFn):
        theta = PiecewiseConstantFn(tuple(theta))
    phase = np.exp(1j * (0.5 * np.pi - theta.expand(b)))
    if b.bounded:
        shifted = b.eta - alpha
        if np.any(np.abs(shifted) == 0):
            raise ValueError("alpha must lie strictly inside the fluid domain")
        A = phase * shifted
        ApA = b.deta / shifted
    else:
        A = phase
        ApA = np.zeros_like(b.eta)
    ratio = b.ddeta / b.deta
    Ndiag = (0.5 * ratio.imag - ApA.imag) / np.pi
    M1diag = (0.5 * ratio.real - ApA.real) / np.pi
    return KernelSystem(
        boundary=b, theta=theta, alpha=complex(alpha), A=A,
        Aprime_over_A=ApA, c=b.deta / A, Ndiag=Ndiag, M1diag=M1diag,
        backend=get_backend(backend, b.eta))


def eval_kernels(sys: KernelSystem, s: int, t: int) -> tuple[float, float]:
    """Pointwise (N(s,t), M1(s,t)) at node indices.

    M1 is the smooth remainder of M on a shared curve
    (M = -cot((s-t)/2)/(2 pi) + M1); across curves M1 equals M itself.
    """
    b = sys.boundary
    if s == t:
        return float(sys.Ndiag[s]), float(sys.M1diag[s])
    num = sys.A[s] * sys.c[t]
    d = b.eta[t] - b.eta[s]
    if d == 0:
        raise ValueError(f"coincident boundary points at nodes {s} and {t}")
    val = num / d
    nval = val.imag / np.pi
    mval = val.real / np.pi
    if b.curve_of[s] == b.curve_of[t]:
        mval += np.cos(0.5 * (b.t[s] - b.t[t])) / np.sin(
            0.5 * (b.t[s] - b.t[t])) / (2.0 * np.pi)
    return float(nval), float(mval)


def _pair_sum(sys: KernelSystem, values: np.ndarray) -> np.ndarray:
    return sys.backend.pair_sum(sys.c * values)


def apply_N(sys: KernelSystem, mu: np.ndarray) -> np.ndarray:
    """Trapezoidal application of the Fredholm operator N (matrix-free)."""
    mu = np.asarray(mu, dtype=float)
    b = sys.boundary
    if mu.size != b.total:
        raise ValueError("input length mismatch")
    S = _pair_sum(sys, mu)
    return (2.0 / b.n) * (sys.A * S).imag + (2.0 * np.pi / b.n) * sys.Ndiag * mu


def apply_M(sys: KernelSystem, gam: np.ndarray) -> np.ndarray:
    """Apply the singular operator M.

    Same-curve cotangent part is exact on the uniform grid: the trapezoidal
    sum of the raw kernel differs from the Fourier-multiplier value by
    exactly (2/n) d/dt, which is added spectrally per curve.
    """
    gam = np.asarray(gam, dtype=float)
    b = sys.boundary
    if gam.size != b.total:
        raise ValueError("input length mismatch")
    if b.n % 2 != 0:
        raise ValueError("even n required for the FFT cotangent split")
    S = _pair_sum(sys, gam)
    out = (2.0 / b.n) * (sys.A * S).real
    out += (2.0 * np.pi / b.n) * sys.M1diag * gam
    out += (2.0 / b.n) * fourier.per_curve(fourier.trig_derivative, gam, b.n)
    return out


def assemble_N(sys: KernelSystem) -> np.ndarray:
    """Dense matrix of the discrete operator behind apply_N (for tests and
    small systems)."""
    b = sys.boundary
    w = 2.0 * np.pi / b.n
    d = b.eta[None, :] - b.eta[:, None]
    np.fill_diagonal(d, 1.0)
    K = (sys.A[:, None] * sys.c[None, :] / d).imag / np.pi
    np.fill_diagonal(K, sys.Ndiag)
    return w * K


def _cot_correction_matrix(n: int) -> np.ndarray:
    """Circulant matrix of (2/n) d/dt on the uniform n-grid."""
    eye = np.eye(n)
    cols = np.array([fourier.trig_derivative(eye[i]) for i in range(n)]).T
    return (2.0 / n) * cols


def assemble_M(sys: KernelSystem) -> np.ndarray:
    b = sys.boundary
    w = 2.0 * np.pi / b.n
    d = b.eta[None, :] - b.eta[:, None]
    np.fill_diagonal(d, 1.0)
    K = (sys.A[:, None] * sys.c[None, :] / d).real / np.pi
    np.fill_diagonal(K, sys.M1diag)
    out = w * K
    corr = _cot_correction_matrix(b.n)
    for j in range(b.ncurves):
        sl = b.curve_slice(j)
        out[sl, sl] += corr
    return out


@dataclass(frozen=True)
class RHSolution:
    mu: np.ndarray
    h: PiecewiseConstantFn
    f_boundary: np.ndarray
    gmres_iterations: int
    residual: float
    h_deviation: float      # max per-curve departure of h from constancy
    gamma: np.ndarray

    def h_expanded(self, b: DiscretizedBoundary) -> np.ndarray:
        return self.h.expand(b)


def solve_rh(sys: KernelSystem, gamma: np.ndarray,
                   opts: SolverOptions = SolverOptions()) -> RHSolution:
    """Solve (I - N) mu = -M gamma, then recover h and the boundary f."""
    gamma = np.asarray(gamma, dtype=float)
    b = sys.boundary
    if gamma.size != b.total:
        raise ValueError("gamma length mismatch")
    rhs = -apply_M(sys, gamma)
    if not np.all(np.isfinite(rhs)):
        raise SolverConvergenceError("non-finite kernel data in right-hand side")
    res = gmres(lambda x: x - apply_N(sys, x), rhs,
                tol=opts.gmres_tol, maxiter=opts.max_iterations)
    if not res.converged:
        raise SolverConvergenceError(
            f"GMRES did not reach tol={opts.gmres_tol:g} in "
            f"{res.iterations} iterations (residual {res.relres:.3e})",
            residual=res.relres, iterations=res.iterations)
    mu = res.x
    hvals = 0.5 * (apply_M(sys, mu) - gamma + apply_N(sys, gamma))
    means = np.array([hvals[b.curve_slice(j)].mean()
                      for j in range(b.ncurves)])
    hdev = max(float(np.abs(hvals[b.curve_slice(j)] - means[j]).max())
               for j in range(b.ncurves))
    h = PiecewiseConstantFn(tuple(means))
    f_boundary = (gamma + h.expand(b) + 1j * mu) / sys.A
    return RHSolution(mu=mu, h=h, f_boundary=f_boundary,
                      gmres_iterations=res.iterations, residual=res.relres,
                      h_deviation=hdev, gamma=gamma)


def cauchy_eval(b: DiscretizedBoundary, f_boundary: np.ndarray,
                targets, derivative: int = 0) -> np.ndarray:
    """Evaluate f (or f') inside the fluid via the trapezoidal Cauchy integral.

    Valid for targets strictly inside the fluid region and at least a node
    spacing away from the boundary; for unbounded domains (all curves
    clockwise) the same sum applies with f(infinity) = 0.
    """
    z = np.asarray(targets, dtype=complex).ravel()
    if derivative not in (0, 1):
        raise ValueError("derivative must be 0 or 1")
    q = np.asarray(f_boundary, dtype=complex) * b.deta
    S = target_sum(b.eta, q, z, squared=(derivative == 1))
    # (1/(2 pi i)) * (2 pi / n) = 1/(i n)
    return S / (1j * b.n)
