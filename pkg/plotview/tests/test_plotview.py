"""The renderer only sees the grid files the solver CLI writes, so the
fixtures shell out to `stirflow run` instead of importing the solver."""

import subprocess
import sys

import numpy as np
import pytest

import plotview
from plotview import cli

VORTEX = """
mode: stirrers
domain:
  bounded: false
  stirrers:
    - {kind: circle, center: 0.0, radius: 0.2, circulation: 1.0}
solver: {n: 256}
field: {xmin: -2.0, xmax: 2.0, ymin: -2.0, ymax: 2.0, nx: 80, ny: 80}
"""

TWO_DISK = """
mode: stirrers
domain:
  bounded: true
  vessel: {kind: circle, center: 0.0, radius: 1.0}
  stirrers:
    - {kind: circle, center: -0.5, radius: 0.1, velocity: 1.0}
    - {kind: circle, center: 0.5, radius: 0.1, velocity: [0.0, 1.0]}
solver: {n: 256}
field: {xmin: -1.0, xmax: 1.0, ymin: -1.0, ymax: 1.0, nx: 80, ny: 80}
"""


def _solver_run(tmp_path, config_text, name):
    cfg = tmp_path / f"{name}.yaml"
    cfg.write_text(config_text)
    out = tmp_path / name
    subprocess.run([sys.executable, "-m", "stirflow.cli", "run", str(cfg),
                    "--out", str(out)], check=True, capture_output=True)
    return out / "psi.dat"


@pytest.fixture(scope="module")
def vortex_grid(tmp_path_factory):
    return _solver_run(tmp_path_factory.mktemp("vortex"), VORTEX, "vortex")


@pytest.fixture(scope="module")
def two_disk_grid(tmp_path_factory):
    return _solver_run(tmp_path_factory.mktemp("disks"), TWO_DISK, "disks")


def test_vortex_concentric_contours(vortex_grid, tmp_path):
    img = tmp_path / "vortex.png"
    count = plotview.render(vortex_grid, img)
    assert img.stat().st_size > 0
    assert count >= 10


def test_two_disk_grid_renders(two_disk_grid, tmp_path):
    img = tmp_path / "disks.png"
    assert cli.main([str(two_disk_grid), "-o", str(img)]) == 0
    assert img.stat().st_size > 0


def test_default_output_path(vortex_grid):
    assert cli.main([str(vortex_grid), "--levels", "12"]) == 0
    assert vortex_grid.with_suffix(".png").exists()


def _write_grid(path, values):
    ny, nx = values.shape
    with open(path, "w") as fh:
        fh.write("# stirflow grid 1\n# field: psi\n"
                 "# xmin xmax ymin ymax: 0.0 1.0 0.0 1.0\n"
                 f"# nx ny: {nx} {ny}\n")
        np.savetxt(fh, values)


def test_all_nan_grid_gives_blank_image_and_zero_exit(tmp_path):
    grid = tmp_path / "psi.dat"
    _write_grid(grid, np.full((8, 8), np.nan))
    img = tmp_path / "blank.png"
    assert cli.main([str(grid), "-o", str(img)]) == 0
    assert img.stat().st_size > 0
    assert plotview.render(grid, tmp_path / "blank2.png") == 0


def test_missing_header_rejected(tmp_path):
    bad = tmp_path / "psi.dat"
    bad.write_text("1.0 2.0\n3.0 4.0\n")
    with pytest.raises(plotview.GridFileError, match="header"):
        plotview.read_grid(bad)
    assert cli.main([str(bad)]) == 2


def test_dimension_mismatch_rejected(tmp_path):
    bad = tmp_path / "psi.dat"
    _write_grid(bad, np.zeros((4, 4)))
    text = bad.read_text().replace("# nx ny: 4 4", "# nx ny: 5 4")
    bad.write_text(text)
    with pytest.raises(plotview.GridFileError, match="resolution"):
        plotview.read_grid(bad)


def test_constant_grid_renders(tmp_path):
    grid = tmp_path / "psi.dat"
    _write_grid(grid, np.ones((8, 8)))
    assert cli.main([str(grid), "-o", str(tmp_path / "c.png")]) == 0


def test_identical_inputs_identical_images(vortex_grid, tmp_path):
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    plotview.render(vortex_grid, a)
    plotview.render(vortex_grid, b)
    assert a.read_bytes() == b.read_bytes()


def test_curvilinear_coordinates_used_when_present(tmp_path):
    grid = tmp_path / "psi.dat"
    xs, ys = np.meshgrid(np.linspace(0, 1, 8), np.linspace(0, 1, 8))
    _write_grid(grid, np.sin(6 * xs) + ys)
    _write_grid(tmp_path / "x.dat", xs + 5.0)
    _write_grid(tmp_path / "y.dat", ys)
    assert plotview.render(grid, tmp_path / "g.png") > 0
