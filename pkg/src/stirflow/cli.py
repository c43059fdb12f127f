"""Command line front end: config ingestion, run orchestration, and file
emission.

`stirflow run <config> [--out DIR] [--threads N]` executes one of three
modes (stirrers, slit_stirrers, slit_map_only), writes field grids as
delimited text plus a structured run report, and exits with 0 on success,
2 on configuration errors, 3 on solver non-convergence, and 4 on preimage
non-convergence.  `stirflow validate <config>` checks a config without
running it.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
import yaml

from . import gridio, slitmap
from .boundary import CurveSpec, DomainSpec, GeometryError, discretize
from .field import GridSpec, StirrerProblem, solve_flow, streamfunction_grid
from .gnk import SolverConvergenceError, SolverOptions

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_PREIMAGE = 4

MODES = ("stirrers", "slit_stirrers", "slit_map_only")
OUTPUT_FIELDS = ("psi", "velocity", "potential")
CANONICAL = {"plane": slitmap.PLANE, "halfplane": slitmap.HALFPLANE}


class ConfigError(ValueError):
    """Schema violation; the message is qualified with the config path."""


# -- schema walking -----------------------------------------------------------

_REQUIRED = object()


def _fail(path: str, msg: str):
    raise ConfigError(f"{path}: {msg}" if path else msg)


class _Section:
    """A mapping node; tracks consumed keys so leftovers can be rejected."""

    def __init__(self, data, path: str):
        if not isinstance(data, dict):
            _fail(path or "config", "expected a mapping")
        self.data = data
        self.path = path
        self.seen = set()

    def _qual(self, key):
        return f"{self.path}.{key}" if self.path else key

    def get(self, key, default=_REQUIRED):
        self.seen.add(key)
        if key not in self.data:
            if default is _REQUIRED:
                _fail(self._qual(key), "required key is missing")
            return default
        return self.data[key]

    def section(self, key, required=True):
        val = self.get(key, _REQUIRED if required else None)
        if val is None:
            return None
        return _Section(val, self._qual(key))

    def close(self):
        unknown = sorted(set(self.data) - self.seen)
        if unknown:
            _fail(self._qual(unknown[0]), "unknown key")


def _number(val, path, integer=False, minimum=None):
    ok = isinstance(val, int) if integer else isinstance(val, (int, float))
    if not ok or isinstance(val, bool):
        _fail(path, "expected an integer" if integer else "expected a number")
    if minimum is not None and val < minimum:
        _fail(path, f"must be >= {minimum}")
    return val


def _complex(val, path):
    """A real scalar or a [re, im] pair."""
    if isinstance(val, (int, float)) and not isinstance(val, bool):
        return complex(val)
    if isinstance(val, (list, tuple)) and len(val) == 2 \
            and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                    for v in val):
        return complex(val[0], val[1])
    _fail(path, "expected a number or a [re, im] pair")


# -- configuration ------------------------------------------------------------

@dataclass
class RunConfig:
    mode: str
    seed: int
    solver_n: int
    gmres_tol: float
    max_iterations: int
    grading_p: float
    backend: str
    # stirrers mode
    domain: DomainSpec | None = None
    U: tuple = ()
    chi: tuple = ()
    anchors: tuple | None = None
    # slit modes
    canonical: str | None = None
    slits: tuple = ()
    slit_r: float | None = None
    slit_eps: float = 1e-14
    slit_max_iter: int = 100
    # field grid
    grid: GridSpec | None = None
    outputs: tuple = ("psi",)
    echo: dict = dc_field(default_factory=dict)


def _parse_curve(sec: _Section) -> CurveSpec:
    kind = sec.get("kind")
    if kind == "circle":
        curve = CurveSpec.circle(_complex(sec.get("center"),
                                          sec._qual("center")),
                                 _number(sec.get("radius"),
                                         sec._qual("radius")))
    elif kind == "ellipse":
        axes = sec.get("axes")
        if not (isinstance(axes, (list, tuple)) and len(axes) == 2):
            _fail(sec._qual("axes"), "expected [a, b] full axis lengths")
        curve = CurveSpec.ellipse(
            _complex(sec.get("center"), sec._qual("center")),
            _number(axes[0], sec._qual("axes")),
            _number(axes[1], sec._qual("axes")),
            _number(sec.get("angle", 0.0), sec._qual("angle")))
    elif kind == "polygon":
        verts = sec.get("vertices")
        if not isinstance(verts, (list, tuple)):
            _fail(sec._qual("vertices"), "expected a list of [x, y] pairs")
        pts = [_complex(v, sec._qual("vertices")) for v in verts]
        curve = CurveSpec.polygon(pts)
    else:
        _fail(sec._qual("kind"), "expected circle, ellipse, or polygon")
    return curve


def _parse_motion(sec: _Section, rng, echo: dict):
    vel = sec.get("velocity", 0.0)
    if vel == "random_direction":
        vel = complex(np.exp(2j * np.pi * rng.random()))
    else:
        vel = _complex(vel, sec._qual("velocity"))
    circ = sec.get("circulation", 0.0)
    if circ == "random":
        circ = float(rng.uniform(-1.0, 1.0))
    else:
        circ = _number(circ, sec._qual("circulation"))
    echo["velocity"] = [vel.real, vel.imag]
    echo["circulation"] = float(circ)
    anchor = sec.get("anchor", None)
    if anchor is not None:
        anchor = _complex(anchor, sec._qual("anchor"))
    return vel, float(circ), anchor


def _parse_solver(root: _Section):
    sec = root.section("solver", required=False)
    defaults = dict(n=256, gmres_tol=1e-14, max_iterations=100,
                    grading_p=3.0, matvec_backend="dense")
    if sec is None:
        return defaults
    out = dict(defaults)
    out["n"] = _number(sec.get("n", defaults["n"]), "solver.n",
                       integer=True, minimum=8)
    if out["n"] % 2:
        _fail("solver.n", "nodes per curve must be even")
    out["gmres_tol"] = float(_number(sec.get("gmres_tol", 1e-14),
                                     "solver.gmres_tol", minimum=0.0))
    out["max_iterations"] = _number(sec.get("max_iterations", 100),
                                    "solver.max_iterations",
                                    integer=True, minimum=1)
    out["grading_p"] = float(_number(sec.get("grading_p", 3.0),
                                     "solver.grading_p", minimum=1.0))
    out["matvec_backend"] = sec.get("matvec_backend", "dense")
    if out["matvec_backend"] not in ("dense", "treecode"):
        _fail("solver.matvec_backend", "expected dense or treecode")
    sec.close()
    return out


def _parse_field(root: _Section, required: bool):
    sec = root.section("field", required=required)
    if sec is None:
        return None, ("psi",)
    ranges = [float(_number(sec.get(k), f"field.{k}"))
              for k in ("xmin", "xmax", "ymin", "ymax")]
    if ranges[1] <= ranges[0] or ranges[3] <= ranges[2]:
        _fail("field", "xmax/ymax must exceed xmin/ymin")
    nx = _number(sec.get("nx"), "field.nx", integer=True, minimum=2)
    ny = _number(sec.get("ny"), "field.ny", integer=True, minimum=2)
    outputs = sec.get("outputs", ["psi"])
    if not isinstance(outputs, list) or not outputs:
        _fail("field.outputs", "expected a non-empty list")
    for o in outputs:
        if o not in OUTPUT_FIELDS:
            _fail("field.outputs", f"unknown output {o!r}; choose from "
                                   f"{', '.join(OUTPUT_FIELDS)}")
    sec.close()
    return GridSpec(*ranges, nx, ny), tuple(outputs)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a YAML config, applying documented defaults."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    if data is None:
        raise ConfigError("config is empty")
    root = _Section(data, "")
    mode = root.get("mode")
    if mode not in MODES:
        _fail("mode", f"expected one of {', '.join(MODES)}")
    seed = _number(root.get("seed", 0), "seed", integer=True)
    rng = np.random.default_rng(seed)
    sv = _parse_solver(root)
    cfg = RunConfig(mode=mode, seed=seed, solver_n=sv["n"],
                    gmres_tol=sv["gmres_tol"],
                    max_iterations=sv["max_iterations"],
                    grading_p=sv["grading_p"], backend=sv["matvec_backend"])
    echo = {"mode": mode, "seed": seed, "solver": sv}

    if mode == "stirrers":
        dom = root.section("domain")
        bounded = dom.get("bounded")
        if not isinstance(bounded, bool):
            _fail("domain.bounded", "expected true or false")
        curves, U, chi, anchors = [], [], [], []
        echo_stirrers = []
        if bounded:
            vsec = dom.section("vessel")
            curves.append(_parse_curve(vsec))
            vsec.close()
            U.append(0j)
            chi.append(0.0)
            anchors.append(None)
        stirrers = dom.get("stirrers")
        if not isinstance(stirrers, list) or not stirrers:
            _fail("domain.stirrers", "expected a non-empty list")
        for i, item in enumerate(stirrers):
            ssec = _Section(item, f"domain.stirrers[{i}]")
            curves.append(_parse_curve(ssec))
            se = {}
            vel, circ, anchor = _parse_motion(ssec, rng, se)
            ssec.close()
            U.append(vel)
            chi.append(circ)
            anchors.append(anchor)
            echo_stirrers.append(se)
        dom.close()
        echo["stirrers"] = echo_stirrers
        try:
            cfg.domain = DomainSpec(bounded, tuple(curves))
        except (GeometryError, ValueError) as exc:
            _fail("domain", str(exc))
        cfg.U, cfg.chi = tuple(U), tuple(chi)
        cfg.anchors = tuple(anchors) if any(a is not None for a in anchors) \
            else None
        cfg.grid, cfg.outputs = _parse_field(root, required=True)
    else:
        ssec = root.section("slits")
        canonical = ssec.get("canonical")
        if canonical not in CANONICAL:
            _fail("slits.canonical", "expected plane or halfplane")
        cfg.canonical = CANONICAL[canonical]
        items = ssec.get("items")
        if not isinstance(items, list) or not items:
            _fail("slits.items", "expected a non-empty list")
        slits = []
        echo_slits = []
        for i, item in enumerate(items):
            isec = _Section(item, f"slits.items[{i}]")
            center = _complex(isec.get("center"), isec._qual("center"))
            length = _number(isec.get("length"), isec._qual("length"))
            if length <= 0:
                _fail(isec._qual("length"), "must be positive")
            angle = _number(isec.get("angle", 0.0), isec._qual("angle"))
            se = {}
            if mode == "slit_stirrers":
                vel, circ, _ = _parse_motion(isec, rng, se)
            else:
                vel, circ = 0j, 0.0
            isec.close()
            slits.append(slitmap.SlitSpec(center, float(length), float(angle),
                                          vel, circ))
            echo_slits.append(se)
        ssec.close()
        cfg.slits = tuple(slits)
        echo["slits"] = echo_slits
        it = root.section("slit", required=False)
        if it is not None:
            r = it.get("r", None)
            if r is not None:
                r = float(_number(r, "slit.r"))
                if not 0.0 < r <= 1.0:
                    _fail("slit.r", "must be in (0, 1]")
            cfg.slit_r = r
            cfg.slit_eps = float(_number(it.get("eps", 1e-14), "slit.eps",
                                         minimum=0.0))
            cfg.slit_max_iter = _number(it.get("max_iter", 100),
                                        "slit.max_iter", integer=True,
                                        minimum=0)
            it.close()
        if cfg.slit_r is None:
            cfg.slit_r = slitmap.DEFAULT_RATIO[cfg.canonical]
        echo["slit"] = {"r": cfg.slit_r, "eps": cfg.slit_eps,
                        "max_iter": cfg.slit_max_iter}
        if mode == "slit_stirrers":
            cfg.grid, cfg.outputs = _parse_field(root, required=True)
        else:
            cfg.grid, cfg.outputs = _parse_field(root, required=False)
    root.close()
    if cfg.grid is not None:
        echo["field"] = {"xmin": cfg.grid.xmin, "xmax": cfg.grid.xmax,
                         "ymin": cfg.grid.ymin, "ymax": cfg.grid.ymax,
                         "nx": cfg.grid.nx, "ny": cfg.grid.ny,
                         "outputs": list(cfg.outputs)}
    cfg.echo = echo
    return cfg


# -- run pipelines ------------------------------------------------------------

def _grid_files(fg, outputs, outdir: Path, curvilinear: bool):
    spec = fg.spec
    ranges = (spec.xmin, spec.xmax, spec.ymin, spec.ymax)
    files = []

    def emit(name, values):
        path = outdir / f"{name}.dat"
        gridio.write_grid(path, name, ranges, values)
        files.append(path.name)

    if "psi" in outputs:
        emit("psi", fg.psi)
    if "velocity" in outputs:
        emit("u", fg.u)
        emit("v", fg.v)
    if "potential" in outputs:
        emit("phi", fg.w.real)
    if curvilinear:
        emit("x", fg.x)
        emit("y", fg.y)
    return files


def _boundary_curves(b):
    return [b.eta[b.curve_slice(j)] for j in range(b.ncurves)]


def run(cfg: RunConfig, outdir) -> dict:
    """Execute the configured pipeline and write outputs into outdir.
    Returns the report dict; raises on solver/preimage failure."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    opts = SolverOptions(gmres_tol=cfg.gmres_tol,
                         max_iterations=cfg.max_iterations,
                         backend=cfg.backend)
    report = {"config": cfg.echo, "solves": [], "timings": {}, "files": []}
    written = []

    def emit_curves(name, curves):
        path = outdir / f"{name}.dat"
        gridio.write_curves(path, curves)
        written.append(path)
        report["files"].append(path.name)

    try:
        if cfg.mode == "stirrers":
            t0 = time.perf_counter()
            b = discretize(cfg.domain, cfg.solver_n, cfg.grading_p)
            report["timings"]["discretize"] = time.perf_counter() - t0
            report["total_nodes"] = int(b.total)
            problem = StirrerProblem(cfg.domain, cfg.U, cfg.chi,
                                     anchors=cfg.anchors)
            t0 = time.perf_counter()
            sol = solve_flow(problem, b, opts)
            report["timings"]["solve"] = time.perf_counter() - t0
            report["solves"].append(_solve_record("flow", b, sol.rh))
            t0 = time.perf_counter()
            fg = streamfunction_grid(sol, cfg.grid)
            report["timings"]["grid"] = time.perf_counter() - t0
            names = _grid_files(fg, cfg.outputs, outdir, curvilinear=False)
            written.extend(outdir / n for n in names)
            report["files"].extend(names)
            emit_curves("boundaries", _boundary_curves(b))
        else:
            t0 = time.perf_counter()
            pre = slitmap.find_preimage(cfg.slits, cfg.canonical,
                                        r=cfg.slit_r, eps=cfg.slit_eps,
                                        max_iter=cfg.slit_max_iter,
                                        n=cfg.solver_n, opts=opts)
            report["timings"]["preimage"] = time.perf_counter() - t0
            report["total_nodes"] = int(pre.preimage.total)
            report["preimage"] = {
                "iterations": pre.iterations,
                "final_error": float(pre.final_error),
                "gmres_iterations": list(pre.gmres_iterations),
                "achieved": [{"length": float(l), "center": [c.real, c.imag]}
                             for l, c in pre.achieved],
                "major_axes": [float(a) for a in pre.state.major],
                "minor_axes": [float(a) for a in pre.state.minor],
            }
            hole0 = 0 if cfg.canonical == slitmap.PLANE else 1
            slit_images = [pre.Phi_boundary[pre.preimage.curve_slice(j)]
                           for j in range(hole0, pre.preimage.ncurves)]
            emit_curves("boundaries", slit_images)
            if cfg.mode == "slit_stirrers":
                t0 = time.perf_counter()
                sol = slitmap.solve_slit_flow(cfg.slits, cfg.canonical,
                                              opts=opts, map_result=pre)
                report["timings"]["solve"] = time.perf_counter() - t0
                report["solves"].append(
                    _solve_record("slit_flow", pre.preimage, sol.flow.rh))
                t0 = time.perf_counter()
                fg = slitmap.pushforward_grid(sol, cfg.grid)
                report["timings"]["grid"] = time.perf_counter() - t0
                names = _grid_files(fg, cfg.outputs, outdir,
                                    curvilinear=True)
                written.extend(outdir / n for n in names)
                report["files"].extend(names)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    report_path = outdir / "report.yaml"
    with open(report_path, "w") as fh:
        yaml.safe_dump(report, fh, sort_keys=False)
    report["files"].append(report_path.name)
    return report


def _solve_record(stage: str, b, rh) -> dict:
    return {"stage": stage, "n": int(b.n), "total_nodes": int(b.total),
            "gmres_iterations": int(rh.gmres_iterations),
            "residual": float(rh.residual),
            "boundary_deviation": float(rh.h_deviation)}


# -- entry point --------------------------------------------------------------

def _load(path: str) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="stirflow",
        description="ideal stirred-flow solves from a YAML config")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute a configured pipeline")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=".", help="output directory")
    p_run.add_argument("--threads", type=int, default=1,
                       help="worker thread budget for numeric kernels")
    p_val = sub.add_parser("validate", help="check a config without running")
    p_val.add_argument("config")
    args = parser.parse_args(argv)

    try:
        cfg = _load(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate":
        print(f"{args.config}: valid {cfg.mode} config")
        return EXIT_OK

    if args.threads < 1:
        print("config error: --threads must be positive", file=sys.stderr)
        return EXIT_CONFIG
    cfg.echo["threads"] = args.threads
    try:
        report = run(cfg, args.out)
    except slitmap.PreimageError as exc:
        print(f"preimage non-convergence: {exc}", file=sys.stderr)
        if exc.history:
            print(f"  error history tail: {exc.history[-3:]}",
                  file=sys.stderr)
        return EXIT_PREIMAGE
    except SolverConvergenceError as exc:
        print(f"solver non-convergence: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (GeometryError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    total = sum(report["timings"].values())
    print(f"wrote {len(report['files'])} files to {args.out} "
          f"({report['total_nodes']} nodes, {total:.2f} s)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
