"""The stirrer problem: rigid boundary components moving at constant
velocities with prescribed circulations, solved as a Riemann-Hilbert
problem, plus evaluation of the complex potential and velocity field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gnk
from .boundary import (DiscretizedBoundary, DomainSpec, FLUID,
                       INSIDE_OBSTACLE_BASE, locate_points)
from .fourier import trig_derivative

__all__ = [
    "StirrerProblem",
    "FlowSolution",
    "GridSpec",
    "FieldGrid",
    "build_rhs",
    "solve_flow",
    "potential_at",
    "velocity_at",
    "circulation_of",
    "streamfunction_grid",
]


@dataclass(frozen=True)
class StirrerProblem:
    """Velocities U_j and circulations chi_j per curve; anchors a_j are the
    interior log-singularity points (default: node centroid of each curve).

    For bounded domains U_0 and chi_0 are forced to zero (no-penetration
    vessel wall)."""

    domain: DomainSpec
    U: tuple[complex, ...]
    chi: tuple[float, ...]
    anchors: tuple | None = None
    alpha: complex = 0j

    def __post_init__(self):
        nc = len(self.domain.curves)
        if len(self.U) != nc or len(self.chi) != nc:
            raise ValueError("U and chi need one entry per curve")
        U = tuple(complex(u) for u in self.U)
        chi = tuple(float(c) for c in self.chi)
        if self.domain.bounded:
            U = (0j,) + U[1:]
            chi = (0.0,) + chi[1:]
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "chi", chi)


def _resolve_anchors(p: StirrerProblem, b: DiscretizedBoundary) -> np.ndarray:
    if p.anchors is not None:
        anchors = np.asarray(p.anchors, dtype=complex)
    else:
        anchors = np.array([b.eta[b.curve_slice(j)].mean()
                            for j in range(b.ncurves)])
    start = 1 if b.bounded else 0
    for j in range(start, b.ncurves):
        if p.chi[j] == 0.0 and p.anchors is None:
            continue
        code = locate_points(b, np.array([anchors[j]]))[0]
        if code != INSIDE_OBSTACLE_BASE + j:
            raise ValueError(f"anchor for curve {j} is not interior to it")
    return anchors


def build_rhs(p: StirrerProblem, b: DiscretizedBoundary) -> np.ndarray:
    """gamma(t) = Re[-i conj(U) eta] + sum_j chi_j/(2 pi) log|eta - a_j|."""
    anchors = _resolve_anchors(p, b)
    U = np.repeat(np.asarray(p.U), b.n)
    gam = (-1j * np.conj(U) * b.eta).real
    for j in range(b.ncurves):
        if p.chi[j] != 0.0:
            gam += p.chi[j] / (2.0 * np.pi) * np.log(np.abs(b.eta - anchors[j]))
    return gam


@dataclass(frozen=True)
class FlowSolution:
    """w(z) = i Pi(z) f(z) + sum_j chi_j/(2 pi i) log(z - a_j), with
    Pi(z) = z for bounded domains and 1 for unbounded ones."""

    problem: StirrerProblem
    boundary: DiscretizedBoundary
    sys: gnk.KernelSystem
    rh: gnk.RHSolution
    anchors: np.ndarray

    @property
    def bounded(self) -> bool:
        return self.boundary.bounded

    def w_boundary(self) -> np.ndarray:
        """Complex potential on the boundary nodes."""
        Pi = self.boundary.eta if self.bounded else 1.0
        w = 1j * Pi * self.rh.f_boundary
        for j in range(self.boundary.ncurves):
            if self.problem.chi[j] != 0.0:
                w = w + self.problem.chi[j] / (2j * np.pi) * np.log(
                    self.boundary.eta - self.anchors[j])
        return w


def solve_flow(p: StirrerProblem, b: DiscretizedBoundary,
               opts: gnk.SolverOptions = gnk.SolverOptions()) -> FlowSolution:
    if (p.domain.bounded != b.bounded
            or len(p.domain.curves) != b.ncurves):
        raise ValueError("discretization does not match the problem domain")
    anchors = _resolve_anchors(p, b)
    sys = gnk.kernel_system(b, alpha=p.alpha, backend=opts.backend)
    gam = build_rhs(p, b)
    rh = gnk.solve_rh(sys, gam, opts)
    return FlowSolution(problem=p, boundary=b, sys=sys, rh=rh, anchors=anchors)


def potential_at(sol: FlowSolution, targets) -> np.ndarray:
    """w at fluid targets; the log branch is per-target (only Im w is
    branch-sensitive, the velocity is branch-free)."""
    z = np.asarray(targets, dtype=complex).ravel()
    f = gnk.cauchy_eval(sol.boundary, sol.rh.f_boundary, z)
    Pi = z if sol.bounded else 1.0
    w = 1j * Pi * f
    for j in range(sol.boundary.ncurves):
        chi = sol.problem.chi[j]
        if chi != 0.0:
            w = w + chi / (2j * np.pi) * np.log(z - sol.anchors[j])
    return w


def velocity_at(sol: FlowSolution, targets) -> np.ndarray:
    """Complex velocity u + i v = conj(w') at fluid targets."""
    z = np.asarray(targets, dtype=complex).ravel()
    f = gnk.cauchy_eval(sol.boundary, sol.rh.f_boundary, z)
    fp = gnk.cauchy_eval(sol.boundary, sol.rh.f_boundary, z, derivative=1)
    if sol.bounded:
        wp = 1j * (f + z * fp)
    else:
        wp = 1j * fp
    for j in range(sol.boundary.ncurves):
        chi = sol.problem.chi[j]
        if chi != 0.0:
            wp = wp + chi / (2j * np.pi) / (z - sol.anchors[j])
    return np.conj(wp)


def _wprime_at(sol: FlowSolution, z: np.ndarray) -> np.ndarray:
    return np.conj(velocity_at(sol, z))


def circulation_of(sol: FlowSolution, j: int, offset_factor: float = 5.0
                   ) -> float:
    """Re of the contour integral of w' on a contour offset into the fluid
    from curve j; recovers chi_j.  The imaginary part (net flux) is zero for
    rigid stirrers and can be read off ``circulation_and_flux``."""
    return circulation_and_flux(sol, j, offset_factor)[0]


def circulation_and_flux(sol: FlowSolution, j: int,
                         offset_factor: float = 5.0) -> tuple[float, float]:
    b = sol.boundary
    sl = b.curve_slice(j)
    eta, deta = b.eta[sl], b.deta[sl]
    # offset along the left normal (into the fluid)
    eps = offset_factor * b.arclengths()[j] / b.n
    contour = eta + eps * 1j * deta / np.abs(deta)
    if np.any(locate_points(b, contour) != FLUID):
        raise ValueError(f"offset contour around curve {j} leaves the fluid; "
                         "reduce offset_factor")
    dcontour = trig_derivative(contour)
    integral = (2.0 * np.pi / b.n) * np.sum(_wprime_at(sol, contour)
                                            * dcontour)
    # circulation is counterclockwise around the stirrer; obstacle curves
    # are traversed clockwise
    if not (b.bounded and j == 0):
        integral = -integral
    return float(integral.real), float(integral.imag)


@dataclass(frozen=True)
class GridSpec:
    xmin: float
    xmax: float
    ymin: float
    ymax: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid resolution must be at least 2x2")

    def points(self) -> np.ndarray:
        """Complex (ny, nx) meshgrid, row-major in y."""
        x = np.linspace(self.xmin, self.xmax, self.nx)
        y = np.linspace(self.ymin, self.ymax, self.ny)
        X, Y = np.meshgrid(x, y)
        return X + 1j * Y


@dataclass(frozen=True)
class FieldGrid:
    """Evaluated field on a grid; masked cells hold nan.  For slit flows the
    x/y matrices carry the pushed-forward (curvilinear) coordinates."""

    spec: GridSpec
    x: np.ndarray
    y: np.ndarray
    w: np.ndarray      # complex potential (psi = Im w)
    u: np.ndarray
    v: np.ndarray
    mask: np.ndarray   # location codes; FLUID cells carry field values

    @property
    def psi(self) -> np.ndarray:
        return self.w.imag


def streamfunction_grid(sol: FlowSolution, spec: GridSpec) -> FieldGrid:
    z = spec.points()
    mask = locate_points(sol.boundary, z.ravel()).reshape(z.shape)
    fluid = mask == FLUID
    if not fluid.any():
        raise ValueError("grid does not overlap the fluid region")
    w = np.full(z.shape, np.nan + 1j * np.nan)
    vel = np.full(z.shape, np.nan + 1j * np.nan)
    zt = z[fluid]
    w[fluid] = potential_at(sol, zt)
    vel[fluid] = velocity_at(sol, zt)
    return FieldGrid(spec=spec, x=z.real, y=z.imag, w=w,
                     u=vel.real, v=vel.imag, mask=mask)
