"""Conformal maps onto rectilinear-slit canonical domains and slit stirrers.

Two canonical targets are supported: the entire plane with m+1 finite
rectilinear slits (preimage: exterior of m+1 ellipses, map normalized by
Phi(z) - z -> 0 at infinity), and the upper half-plane with m slits
(preimage: unit disk minus m quasi-ellipses, normalized by Phi(0) = i,
Phi(i) = infinity).  The preimage ellipses are found by a damped fixed-point
iteration on slit centers and lengths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gnk
from .backends import target_sum
from .boundary import (CurveSpec, DiscretizedBoundary, DomainSpec,
                       INSIDE_OBSTACLE_BASE, discretize, locate_points)
from .field import FieldGrid, FlowSolution, GridSpec, StirrerProblem
from .fourier import per_curve, trig_derivative
from .gnk import SolverOptions

__all__ = [
    "SlitSpec",
    "PreimageState",
    "SlitMapResult",
    "PreimageError",
    "TooManyIterationsError",
    "NonConvergentError",
    "EllipseDegenerationError",
    "mobius",
    "mobius_inv",
    "mobius_deriv",
    "rect_slit_map",
    "halfplane_slit_map",
       "slit_geometry",
    "find_preimage",
    "trig_derivative",
    "inverse_map",
    "slit_flow",
    "solve_slit_flow",
    "SlitFlowSolution",
]

PLANE = "plane_slits"
HALFPLANE = "halfplane_slits"

DEFAULT_RATIO = {PLANE: 0.2, HALFPLANE: 0.1}


# -- Moebius transform of the half-plane construction -----------------------

def mobius(z):
    """Psi: unit disk -> upper half-plane, Psi(0) = i, Psi(i) = infinity."""
    z = np.asarray(z, dtype=complex)
    return 1j * (1j + z) / (1j - z)


def mobius_inv(xi):
    xi = np.asarray(xi, dtype=complex)
    return 1j * (xi - 1j) / (xi + 1j)


def mobius_deriv(z):
    z = np.asarray(z, dtype=complex)
    return -2.0 / (1j - z) ** 2


def _mobius_inv_deriv(xi):
    xi = np.asarray(xi, dtype=complex)
    return -2.0 / (xi + 1j) ** 2


# -- data types --------------------------------------------------------------

@dataclass(frozen=True)
class SlitSpec:
    """A rectilinear slit stirrer: center, length, inclination angle, and
    its rigid-motion data."""

    center: complex
    length: float
    angle: float = 0.0
    velocity: complex = 0j
    circulation: float = 0.0

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("slit length must be positive")


@dataclass
class PreimageState:
    centers: np.ndarray   # ellipse centers in the slit/xi plane
    major: np.ndarray     # full major-axis lengths
    ratio: float          # minor = ratio * major after every update
    iteration: int = 0

    @property
    def minor(self) -> np.ndarray:
        return self.ratio * self.major

    def copy(self) -> "PreimageState":
        return PreimageState(self.centers.copy(), self.major.copy(),
                             self.ratio, self.iteration)


class PreimageError(RuntimeError):
    def __init__(self, message, state=None, history=None):
        super().__init__(message)
        self.state = state
        self.history = list(history or [])


class TooManyIterationsError(PreimageError):
    pass


class NonConvergentError(PreimageError):
    pass


class EllipseDegenerationError(PreimageError):
    pass


@dataclass(frozen=True)
class SlitMapResult:
    canonical_type: str
    preimage: DiscretizedBoundary
    angles: tuple[float, ...]
    rh: gnk.RHSolution
    Phi_boundary: np.ndarray        # Phi(eta(t)) at nodes
    dPhi_dt: np.ndarray             # d/dt Phi(eta(t)) by trigonometric diff.
    achieved: tuple                 # (length, center) per mapped slit
    spreads: tuple                  # transverse spread diagnostics
    iterations: int = 0
    final_error: float = float("nan")
    state: PreimageState | None = None
    error_history: tuple = ()
    gmres_iterations: tuple = ()
    # half-plane extras: Psi^{-1}(Phi(eta)) and its t-derivative
    zeta_hat: np.ndarray | None = None
    dzeta_hat_dt: np.ndarray | None = None

    @property
    def h0(self) -> float:
        return self.rh.h.values[0]

    @property
    def Phi_prime_boundary(self) -> np.ndarray:
        """dPhi/dz on the boundary."""
        return self.dPhi_dt / self.preimage.deta

    def map_at(self, z) -> np.ndarray:
        """Phi at fluid points of the preimage."""
        z = np.asarray(z, dtype=complex).ravel()
        f = gnk.cauchy_eval(self.preimage, self.rh.f_boundary, z)
        if self.canonical_type == PLANE:
            return z + f
        return (mobius(z) + z * f + 1j * self.h0) / (1.0 + self.h0)

    def map_deriv_at(self, z) -> np.ndarray:
        """dPhi/dz at fluid points of the preimage."""
        z = np.asarray(z, dtype=complex).ravel()
        fb = self.rh.f_boundary
        fp = gnk.cauchy_eval(self.preimage, fb, z, derivative=1)
        if self.canonical_type == PLANE:
            return 1.0 + fp
        f = gnk.cauchy_eval(self.preimage, fb, z)
        return (mobius_deriv(z) + f + z * fp) / (1.0 + self.h0)


# -- geometry of slit images -------------------------------------------------

def slit_geometry(image_nodes: np.ndarray, angle: float,
                  spread_tol: float | None = None):
    """Length, center, and transverse spread of a (nearly) straight image.

    The nodes are rotated by exp(-i*angle); the length is the real-part
    range, the center the midpoint of that range plus the mean transverse
    offset.  If ``spread_tol`` is given, a spread above spread_tol*length
    raises (the image is not a converged slit)."""
    w = np.exp(-1j * angle) * np.asarray(image_nodes, dtype=complex)
    lo, hi = w.real.min(), w.real.max()
    length = hi - lo
    center = np.exp(1j * angle) * (0.5 * (lo + hi) + 1j * w.imag.mean())
    spread = w.imag.max() - w.imag.min()
    if spread_tol is not None and spread > spread_tol * length:
        raise ValueError(
            f"slit image transverse spread {spread:.3e} exceeds "
            f"{spread_tol:g} * length {length:.3e}")
    return length, complex(center), float(spread)


# -- slit maps for a *known* preimage domain ----------------------------------

def rect_slit_map(b: DiscretizedBoundary, angles,
                  opts: SolverOptions = SolverOptions(),
                  spread_tol: float | None = 1e-6) -> SlitMapResult:
    """Map the exterior of m+1 Jordan curves onto the plane with m+1 slits
    at the given angles; normalization Phi(z) - z -> 0 at infinity."""
    if b.bounded:
        raise ValueError("plane slit map needs an unbounded preimage")
    angles = tuple(float(a) for a in angles)
    if len(angles) != b.ncurves:
        raise ValueError("one slit angle per boundary curve required")
    sys = gnk.kernel_system(b, theta=angles, backend=opts.backend)
    theta_t = np.repeat(np.asarray(angles), b.n)
    gamma = (np.exp(-1j * theta_t) * b.eta).imag
    rh = gnk.solve_rh(sys, gamma, opts)
    Phib = b.eta + rh.f_boundary
    dPhi = per_curve(trig_derivative, Phib, b.n)
    geo = [slit_geometry(Phib[b.curve_slice(j)], angles[j], spread_tol)
           for j in range(b.ncurves)]
    return SlitMapResult(
        canonical_type=PLANE, preimage=b, angles=angles, rh=rh,
        Phi_boundary=Phib, dPhi_dt=dPhi,
        achieved=tuple((g[0], g[1]) for g in geo),
        spreads=tuple(g[2] for g in geo),
        gmres_iterations=(rh.gmres_iterations,))


def halfplane_slit_map(b: DiscretizedBoundary, angles,
                       opts: SolverOptions = SolverOptions(),
                       spread_tol: float | None = 1e-6) -> SlitMapResult:
    """Map the unit disk minus m quasi-ellipses onto the upper half-plane
    with m slits; normalization Phi(0) = i, Phi(i) = infinity."""
    if not b.bounded:
        raise ValueError("half-plane slit map needs a bounded preimage")
    angles = tuple(float(a) for a in angles)
    if len(angles) != b.ncurves - 1:
        raise ValueError("one angle per hole curve required")
    theta = (0.0,) + angles
    sys = gnk.kernel_system(b, theta=theta, alpha=0j, backend=opts.backend)
    gamma = np.zeros(b.total)
    for j in range(1, b.ncurves):
        sl = b.curve_slice(j)
        gamma[sl] = (np.exp(-1j * angles[j - 1]) * mobius(b.eta[sl])).imag
    rh = gnk.solve_rh(sys, gamma, opts)
    h0 = rh.h.values[0]
    if abs(1.0 + h0) < 1e-12:
        raise gnk.SolverConvergenceError("degenerate normalization h0 = -1")
    eta, f = b.eta, rh.f_boundary
    with np.errstate(divide="ignore", invalid="ignore"):
        Phib = (mobius(eta) + eta * f + 1j * h0) / (1.0 + h0)
    # Psi^{-1}(Phi) evaluated without forming the (possibly infinite) Phi on
    # the unit circle: both numerator and denominator carry the (i - eta)
    # factor of Psi
    num = 1j * (1j + eta) + (eta * f + 1j * h0 - 1j * (1.0 + h0)) * (1j - eta)
    den = 1j * (1j + eta) + (eta * f + 1j * h0 + 1j * (1.0 + h0)) * (1j - eta)
    zeta_hat = 1j * num / den
    dzh = per_curve(trig_derivative, zeta_hat, b.n)
    # d/dt Phi(eta(t)); only finite (and used) on the hole curves
    dPhi = np.full(b.total, np.nan + 0j)
    for j in range(1, b.ncurves):
        sl = b.curve_slice(j)
        dPhi[sl] = trig_derivative(Phib[sl])
    geo = [slit_geometry(Phib[b.curve_slice(j)], angles[j - 1], spread_tol)
           for j in range(1, b.ncurves)]
    return SlitMapResult(
        canonical_type=HALFPLANE, preimage=b, angles=angles, rh=rh,
        Phi_boundary=Phib, dPhi_dt=dPhi,
        achieved=tuple((g[0], g[1]) for g in geo),
        spreads=tuple(g[2] for g in geo),
        gmres_iterations=(rh.gmres_iterations,),
        zeta_hat=zeta_hat, dzeta_hat_dt=dzh)


# -- preimage construction ----------------------------------------------------

def _plane_boundary(state: PreimageState, angles, n: int
                    ) -> DiscretizedBoundary:
    curves = tuple(
        CurveSpec.ellipse(state.centers[j], state.major[j], state.minor[j],
                          angles[j])
        for j in range(state.centers.size))
    return discretize(DomainSpec(False, curves), n)


def _quasi_ellipse_curve(center, major, minor, angle, n: int) -> CurveSpec:
    """Hole curve of the half-plane preimage: the Psi-pullback of an upper
    half-plane ellipse into the unit disk."""
    t = np.arange(n) * (2.0 * np.pi / n)
    rot = 0.5 * np.exp(1j * angle)
    xi = center + rot * (major * np.cos(t) - 1j * minor * np.sin(t))
    dxi = rot * (-major * np.sin(t) - 1j * minor * np.cos(t))
    if xi.imag.min() <= 0:
        raise EllipseDegenerationError(
            "preimage ellipse crosses the real axis")
    return CurveSpec.sampled(mobius_inv(xi), _mobius_inv_deriv(xi) * dxi)


def _halfplane_boundary(state: PreimageState, angles, n: int
                        ) -> DiscretizedBoundary:
    curves = [CurveSpec.circle(0, 1.0)]
    for j in range(state.centers.size):
        curves.append(_quasi_ellipse_curve(
            state.centers[j], state.major[j], state.minor[j], angles[j], n))
    return discretize(DomainSpec(True, tuple(curves)), n)


def _check_disjoint(b: DiscretizedBoundary, holes_from: int):
    """No node of one hole curve may lie inside another (overlap guard)."""
    if b.ncurves - holes_from > 20:
        return
    for j in range(holes_from, b.ncurves):
        code = locate_points(b, b.eta[b.curve_slice(j)][:: max(1, b.n // 8)],
                             near_factor=0.0)
        bad = (code >= INSIDE_OBSTACLE_BASE) & (
            code != INSIDE_OBSTACLE_BASE + j)
        if bad.any():
            raise EllipseDegenerationError("preimage ellipses intersect")


def find_preimage(targets, canonical_type: str, r: float | None = None,
                  eps: float = 1e-14, max_iter: int = 100, n: int = 256,
                  opts: SolverOptions = SolverOptions(),
                  state0: PreimageState | None = None) -> SlitMapResult:
    """Iteratively find the elliptical (or quasi-elliptical) preimage whose
    canonical slit image matches the target slits.

    Updates per iteration k (per slit): center -= achieved_center - target,
    major -= (1 - 0.5 r)(achieved_length - target), minor = r * major.
    Stops when the mean of |center error| + |length error| drops below eps,
    or when the error stagnates at a rounding floor below 100 eps (the floor
    of the geometry extraction grows slowly with n, so demanding eps exactly
    can spin forever a decade above it).
    """
    targets = tuple(targets)
    if canonical_type not in (PLANE, HALFPLANE):
        raise ValueError(f"unknown canonical type {canonical_type!r}")
    if r is None:
        r = DEFAULT_RATIO[canonical_type]
    if not 0.0 < r <= 1.0:
        raise ValueError("axis ratio r must satisfy 0 < r <= 1")
    if eps <= 0:
        raise ValueError("eps must be positive")
    ell = np.array([s.length for s in targets])
    zc = np.array([s.center for s in targets], dtype=complex)
    angles = tuple(s.angle for s in targets)
    if state0 is not None:
        state = state0.copy()
    else:
        state = PreimageState(centers=zc.copy(),
                              major=(1.0 - 0.5 * r) * ell, ratio=r)
    history = []
    gmres_counts = []
    result = None
    best = None

    def _package(b, result, state, k, err):
        for j in range(len(targets)):
            slit_geometry(result.Phi_boundary[
                b.curve_slice(j if canonical_type == PLANE else j + 1)],
                angles[j], spread_tol=1e-6)
        return SlitMapResult(
            canonical_type=result.canonical_type, preimage=b,
            angles=result.angles, rh=result.rh,
            Phi_boundary=result.Phi_boundary, dPhi_dt=result.dPhi_dt,
            achieved=result.achieved, spreads=result.spreads,
            iterations=k, final_error=err, state=state,
            error_history=tuple(history),
            gmres_iterations=tuple(gmres_counts),
            zeta_hat=result.zeta_hat,
            dzeta_hat_dt=result.dzeta_hat_dt)

    for k in range(1, max_iter + 1):
        state.iteration = k
        if canonical_type == PLANE:
            b = _plane_boundary(state, angles, n)
            _check_disjoint(b, 0)
            result = rect_slit_map(b, angles, opts, spread_tol=None)
        else:
            b = _halfplane_boundary(state, angles, n)
            _check_disjoint(b, 1)
            result = halfplane_slit_map(b, angles, opts, spread_tol=None)
        got_len = np.array([a[0] for a in result.achieved])
        got_cen = np.array([a[1] for a in result.achieved])
        err = float(np.mean(np.abs(got_cen - zc) + np.abs(got_len - ell)))
        history.append(err)
        gmres_counts.extend(result.gmres_iterations)
        if err < eps:
            return _package(b, result, state.copy(), k, err)
        if best is None or err < best[0]:
            best = (err, b, result, state.copy(), k)
        elif err < 100.0 * eps and k - best[4] >= 10:
            berr, bb, bres, bstate, bk = best
            return _package(bb, bres, bstate, bk, berr)
        state.centers -= got_cen - zc
        state.major -= (1.0 - 0.5 * r) * (got_len - ell)
        if np.any(state.major <= 0):
            raise EllipseDegenerationError(
                "preimage ellipse major axis collapsed", state, history)
        if len(history) >= 6 and all(
                history[-i] > 10.0 * history[-i - 1] for i in range(1, 6)):
            raise NonConvergentError(
                "preimage iteration error grew 10x over 5 consecutive "
                "iterations", state, history)
    raise TooManyIterationsError(
        f"preimage iteration did not converge in {max_iter} iterations",
        state if max_iter else None, history)


# -- inverse maps -------------------------------------------------------------

def inverse_map(result: SlitMapResult, targets) -> np.ndarray:
    """Preimage points of targets in the slit domain, via the Cauchy
    integrals built from the trigonometrically differentiated boundary data."""
    w = np.asarray(targets, dtype=complex).ravel()
    b = result.preimage
    if result.canonical_type == PLANE:
        q = (b.eta - result.Phi_boundary) * result.dPhi_dt
        return w + target_sum(result.Phi_boundary, q, w) / (1j * b.n)
    xi = mobius_inv(w)
    q = b.eta * result.dzeta_hat_dt
    return target_sum(result.zeta_hat, q, xi) / (1j * b.n)


# -- slit stirrer flow --------------------------------------------------------

@dataclass(frozen=True)
class SlitFlowSolution:
    """Transplanted stirrer flow: W(z) = w(Phi(z)) solved in the preimage."""

    slits: tuple[SlitSpec, ...]
    map_result: SlitMapResult
    flow: FlowSolution

    def map_at(self, z) -> np.ndarray:
        return self.map_result.map_at(z)

    def map_deriv_at(self, z) -> np.ndarray:
        return self.map_result.map_deriv_at(z)

    def velocity_in_slit_plane(self, z) -> np.ndarray:
        """u + iv at slit-domain points Phi(z), given preimage points z."""
        from .field import velocity_at
        return velocity_at(self.flow, z) / np.conj(self.map_deriv_at(z))


def solve_slit_flow(slits, canonical_type: str, r: float | None = None,
                    opts: SolverOptions = SolverOptions(), n: int = 256,
                    eps: float = 1e-14, max_iter: int = 100,
                    map_result: SlitMapResult | None = None
                    ) -> SlitFlowSolution:
    slits = tuple(slits)
    if map_result is None:
        map_result = find_preimage(slits, canonical_type, r=r, eps=eps,
                                   max_iter=max_iter, n=n, opts=opts)
    b = map_result.preimage
    if canonical_type == PLANE:
        U = tuple(s.velocity for s in slits)
        chi = tuple(s.circulation for s in slits)
        anchors = np.asarray(map_result.state.centers, dtype=complex)
    else:
        U = (0j,) + tuple(s.velocity for s in slits)
        chi = (0.0,) + tuple(s.circulation for s in slits)
        anchors = np.concatenate(
            ([b.eta[b.curve_slice(0)].mean()],
             mobius_inv(map_result.state.centers)))
    problem = StirrerProblem(b.domain, U=U, chi=chi, anchors=tuple(anchors))
    sys = gnk.kernel_system(b, backend=opts.backend)
    Uexp = np.repeat(np.asarray(U, dtype=complex), b.n)
    with np.errstate(invalid="ignore"):
        gam = np.where(Uexp != 0,
                       (-1j * np.conj(Uexp) * map_result.Phi_boundary).real,
                       0.0)
    for j in range(b.ncurves):
        if chi[j] != 0.0:
            gam += chi[j] / (2.0 * np.pi) * np.log(np.abs(b.eta - anchors[j]))
    rh = gnk.solve_rh(sys, gam, opts)
    flow = FlowSolution(problem=problem, boundary=b, sys=sys, rh=rh,
                        anchors=anchors)
    return SlitFlowSolution(slits=slits, map_result=map_result, flow=flow)


def slit_flow(slits, canonical_type: str, grid: GridSpec,
              r: float | None = None,
              opts: SolverOptions = SolverOptions(), n: int = 256,
              eps: float = 1e-14, max_iter: int = 100) -> FieldGrid:
    """Full pipeline: preimage, transplanted solve, and the field on a grid
    of preimage points pushed forward through the map (the half-plane case
    samples the xi upper half-plane and pulls back through the Moebius map)."""
    sol = solve_slit_flow(slits, canonical_type, r=r, opts=opts, n=n,
                          eps=eps, max_iter=max_iter)
    return pushforward_grid(sol, grid)


def pushforward_grid(sol: SlitFlowSolution, spec: GridSpec) -> FieldGrid:
    from .boundary import FLUID, OUTSIDE_VESSEL
    from .field import potential_at, velocity_at

    b = sol.map_result.preimage
    pts = spec.points()
    if sol.map_result.canonical_type == PLANE:
        z = pts.ravel()
        mask = locate_points(b, z).reshape(pts.shape)
    else:
        xi = pts.ravel()
        upper = xi.imag > 0
        z = np.where(upper, mobius_inv(np.where(upper, xi, 1j)), 0j)
        mask = np.full(xi.size, OUTSIDE_VESSEL)
        mask[upper] = locate_points(b, z[upper])
        mask = mask.reshape(pts.shape)
        z = z.reshape(pts.shape).ravel()
    fluid = (mask == FLUID).ravel()
    if not fluid.any():
        raise ValueError("grid does not overlap the fluid region")
    zf = z[fluid]
    W = np.full(pts.size, np.nan + 1j * np.nan)
    vel = np.full(pts.size, np.nan + 1j * np.nan)
    zeta = np.full(pts.size, np.nan + 1j * np.nan)
    W[fluid] = potential_at(sol.flow, zf)
    vel[fluid] = velocity_at(sol.flow, zf) / np.conj(sol.map_deriv_at(zf))
    zeta[fluid] = sol.map_at(zf)
    shape = pts.shape
    return FieldGrid(spec=spec, x=zeta.real.reshape(shape),
                     y=zeta.imag.reshape(shape), w=W.reshape(shape),
                     u=vel.real.reshape(shape), v=vel.imag.reshape(shape),
                     mask=mask)
