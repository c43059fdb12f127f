"""Boundary-integral solver for ideal flow driven by rigid stirrers in
multiply connected domains, with conformal maps onto rectilinear-slit
canonical domains."""

from .boundary import (CurveSpec, DomainSpec, DiscretizedBoundary,
                       discretize, locate_points, point_location)
from .gmres import gmres, GmresResult
from .gnk import (SolverOptions, KernelSystem, RHSolution, kernel_system,
                  solve_rh, cauchy_eval, SolverConvergenceError)
from .field import (StirrerProblem, FlowSolution, GridSpec, FieldGrid,
                    solve_flow, potential_at, velocity_at, circulation_of,
                    streamfunction_grid)
from .slitmap import (SlitSpec, SlitMapResult, PreimageState, PreimageError,
                      TooManyIterationsError, NonConvergentError,
                      EllipseDegenerationError, rect_slit_map,
                      halfplane_slit_map, find_preimage, inverse_map,
                      solve_slit_flow, slit_flow, pushforward_grid,
                      PLANE, HALFPLANE)
from . import gridio

__all__ = [n for n in dir() if not n.startswith("_")]
