"""Contour figures from delimited-text grid files.

The grid format is self-describing: a `# stirflow grid 1` header line, then
the field name, the x/y ranges, and the resolution, followed by an ny-by-nx
real matrix with nan marking cells outside the fluid.  Sibling files next to
the grid are picked up automatically: `boundaries.dat` supplies outlines to
overlay, and `x.dat`/`y.dat` supply curvilinear plot coordinates (grids
pushed forward through a conformal map).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["GridFileError", "read_grid", "read_curves", "render"]

DEFAULT_LEVELS = 30


class GridFileError(ValueError):
    pass


def read_grid(path):
    """Parse a grid file into (meta, values); meta has field, ranges, nx, ny."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise GridFileError(f"{path}: {exc}") from exc
    if not lines or not lines[0].startswith("# stirflow grid"):
        raise GridFileError(f"{path}: not a grid file (missing header)")
    meta = {}
    for line in lines[1:4]:
        if not line.startswith("# "):
            raise GridFileError(f"{path}: truncated header")
        key, _, val = line[2:].partition(":")
        meta[key.strip()] = val.strip()
    try:
        nx, ny = (int(v) for v in meta.pop("nx ny").split())
        ranges = tuple(float(v)
                       for v in meta.pop("xmin xmax ymin ymax").split())
        meta["field"]
    except (KeyError, ValueError) as exc:
        raise GridFileError(f"{path}: malformed header") from exc
    if len(ranges) != 4:
        raise GridFileError(f"{path}: malformed range header")
    try:
        values = np.loadtxt(path, ndmin=2)
    except ValueError as exc:
        raise GridFileError(f"{path}: unreadable matrix ({exc})") from exc
    if values.shape != (ny, nx):
        raise GridFileError(f"{path}: matrix shape {values.shape} does not "
                            f"match header resolution ({ny}, {nx})")
    meta.update(ranges=ranges, nx=nx, ny=ny)
    return meta, values


def read_curves(path):
    """Blank-line-separated blocks of `x y` rows, one closed curve each."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("# stirflow curves"):
        raise GridFileError(f"{path}: not a curves file")
    curves, block = [], []
    for line in lines[1:]:
        line = line.strip()
        if not line:
            if block:
                curves.append(np.array(block))
                block = []
            continue
        x, y = line.split()
        block.append((float(x), float(y)))
    if block:
        curves.append(np.array(block))
    return curves


def _coordinates(grid_path, meta, shape):
    """Curvilinear coordinates from sibling x.dat/y.dat, else the uniform
    meshgrid of the header ranges."""
    xp = grid_path.with_name("x.dat")
    yp = grid_path.with_name("y.dat")
    if xp.exists() and yp.exists():
        _, x = read_grid(xp)
        _, y = read_grid(yp)
        if x.shape == shape and y.shape == shape:
            return x, y
    xmin, xmax, ymin, ymax = meta["ranges"]
    return np.meshgrid(np.linspace(xmin, xmax, meta["nx"]),
                       np.linspace(ymin, ymax, meta["ny"]))


def render(grid_path, out_path=None, levels: int = DEFAULT_LEVELS,
           overlay_boundaries: bool = True) -> int:
    """Write iso-line contours of the grid to a raster image.

    Levels are evenly spaced between the 2nd and 98th percentile of the
    finite values, so a few extreme cells (e.g. near a log singularity or a
    circulation branch cut) do not wash out the picture.  Returns the number
    of contour levels that produced at least one curve; an all-nan grid
    yields a blank image and returns 0.
    """
    grid_path = Path(grid_path)
    if out_path is None:
        out_path = grid_path.with_suffix(".png")
    meta, values = read_grid(grid_path)
    masked = np.ma.masked_invalid(values)

    fig, ax = plt.subplots(figsize=(6, 6))
    drawn = 0
    if masked.count() > 0:
        finite = values[np.isfinite(values)]
        lo, hi = np.percentile(finite, [2.0, 98.0])
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
        x, y = _coordinates(grid_path, meta, values.shape)
        # masked cells may carry nan coordinates too; any finite filler is
        # fine since those cells never contribute contour segments
        x, y = np.nan_to_num(x), np.nan_to_num(y)
        cs = ax.contour(x, y, masked,
                        levels=np.linspace(lo, hi, levels),
                        colors="tab:blue", linewidths=0.7)
        drawn = sum(1 for segs in cs.allsegs if len(segs) > 0)
    if overlay_boundaries:
        curves_path = grid_path.with_name("boundaries.dat")
        if curves_path.exists():
            for pts in read_curves(curves_path):
                ax.plot(pts[:, 0], pts[:, 1], color="black", linewidth=1.2)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(meta["field"])
    fig.savefig(out_path, dpi=150, metadata={"Software": "plotview"})
    plt.close(fig)
    return drawn
