"""Delimited-text grid files.

One real matrix per file, row-major with one row per y sample (ny rows of
nx values).  Comment-prefixed header lines carry the field name, the grid
ranges, and the resolution so downstream tools need no side channel.
Masked cells are written as nan.  Values are printed with %.17e, which
round-trips doubles exactly and makes runs byte-reproducible.
"""

from __future__ import annotations

import io

import numpy as np

__all__ = ["write_grid", "read_grid", "write_curves", "read_curves"]


def write_grid(path, field: str, ranges, values: np.ndarray) -> None:
    """ranges = (xmin, xmax, ymin, ymax); values shaped (ny, nx)."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError("grid values must be a 2-d matrix")
    ny, nx = values.shape
    buf = io.StringIO()
    buf.write("# stirflow grid 1\n")
    buf.write(f"# field: {field}\n")
    buf.write("# xmin xmax ymin ymax: "
              + " ".join("%.17e" % r for r in ranges) + "\n")
    buf.write(f"# nx ny: {nx} {ny}\n")
    np.savetxt(buf, values, fmt="%.17e")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def read_grid(path):
    """Returns (meta, values); meta has field, ranges, nx, ny."""
    meta = {}
    with open(path) as fh:
        lines = fh.readlines()
    if not lines or not lines[0].startswith("# stirflow grid"):
        raise ValueError(f"{path}: not a grid file (missing header)")
    for line in lines[1:4]:
        if not line.startswith("# "):
            raise ValueError(f"{path}: truncated header")
        key, _, val = line[2:].partition(":")
        meta[key.strip()] = val.strip()
    if "field" not in meta or "nx ny" not in meta:
        raise ValueError(f"{path}: malformed header")
    nx, ny = (int(v) for v in meta.pop("nx ny").split())
    ranges = tuple(float(v) for v in meta.pop("xmin xmax ymin ymax").split())
    if len(ranges) != 4:
        raise ValueError(f"{path}: malformed range header")
    values = np.loadtxt(path, ndmin=2)
    if values.shape != (ny, nx):
        raise ValueError(f"{path}: matrix shape {values.shape} does not "
                         f"match header resolution ({ny}, {nx})")
    meta.update(ranges=ranges, nx=nx, ny=ny)
    return meta, values


def write_curves(path, curves) -> None:
    """Boundary outlines for overlays: blocks of `x y` rows, one closed
    curve per blank-line-separated block."""
    with open(path, "w") as fh:
        fh.write("# stirflow curves 1\n")
        for pts in curves:
            pts = np.asarray(pts, dtype=complex).ravel()
            closed = np.append(pts, pts[0])
            for z in closed:
                fh.write("%.17e %.17e\n" % (z.real, z.imag))
            fh.write("\n")


def read_curves(path):
    curves = []
    block = []
    with open(path) as fh:
        lines = fh.readlines()
    if not lines or not lines[0].startswith("# stirflow curves"):
        raise ValueError(f"{path}: not a curves file")
    for line in lines[1:]:
        line = line.strip()
        if not line:
            if block:
                curves.append(np.array(block))
                block = []
            continue
        x, y = line.split()
        block.append(complex(float(x), float(y)))
    if block:
        curves.append(np.array(block))
    return curves
