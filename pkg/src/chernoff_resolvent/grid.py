"""Uniform 1-D grids and sampled functions: sup norm, finite differences, CSV I/O.

Functions vanishing at infinity are represented by their samples on a
truncated uniform grid and implicitly extended by zero outside the span.
All types are immutable and all operations are pure, so everything here is
safe for concurrent use.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable

import numpy as np

__all__ = [
    "Grid1D",
    "GridFunction",
    "default_grid",
    "fd_derivatives",
    "read_csv",
    "residual_margin",
    "sample",
    "sup_norm",
    "write_csv",
]


@dataclass(frozen=True)
class Grid1D:
    """Uniform truncation of the real line to [x_min, x_max] with n_points nodes."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self) -> None:
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise ValueError("grid endpoints must be finite")
        if not self.x_min < self.x_max:
            raise ValueError(f"x_min must lie below x_max, got [{self.x_min}, {self.x_max}]")
        if int(self.n_points) < 3:
            raise ValueError(f"need at least 3 nodes, got {self.n_points}")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        xs = np.linspace(self.x_min, self.x_max, self.n_points)
        xs.flags.writeable = False
        return xs

    def interior_mask(self, margin: float) -> np.ndarray:
        """Mask of nodes at least ``margin`` inside both endpoints.

        The two outermost nodes are always excluded (their finite-difference
        stencils are one-sided).
        """
        xs = self.nodes
        mask = (xs >= self.x_min + margin) & (xs <= self.x_max - margin)
        mask[0] = mask[-1] = False
        if not mask.any():
            raise ValueError(f"margin {margin:g} leaves no interior nodes")
        return mask

    def refined(self, factor: int) -> "Grid1D":
        """Same span with every cell split into ``factor`` cells."""
        if factor < 1:
            raise ValueError("refinement factor must be >= 1")
        return Grid1D(self.x_min, self.x_max, factor * (self.n_points - 1) + 1)


def default_grid() -> Grid1D:
    """[-20, 20] with 801 nodes (spacing 0.05).

    Gaussian kernels at the time scales this library targets carry mass
    below 1e-8 beyond the boundary for centred data.
    """
    return Grid1D(-20.0, 20.0, 801)


def residual_margin(t_max: float, a_sup: float) -> float:
    """Width of the boundary strip excluded from residual norms.

    Kernel truncation pollutes a diffusion length near the grid ends, so
    residuals skip 4 * max(1, sqrt(t_max * sup a)) on each side.
    """
    return 4.0 * max(1.0, float(np.sqrt(max(t_max, 0.0) * max(a_sup, 0.0))))


@dataclass(frozen=True)
class GridFunction:
    """Real- or complex-valued samples on a Grid1D, zero outside the span."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values)
        if vals.dtype.kind == "c":
            vals = vals.astype(np.complex128)
        else:
            vals = vals.astype(np.float64)
        if vals.shape != (self.grid.n_points,):
            raise ValueError(f"expected {self.grid.n_points} values, got shape {vals.shape}")
        finite = np.isfinite(vals)
        if not finite.all():
            bad = int(np.flatnonzero(~finite)[0])
            raise ValueError(f"non-finite value at node {bad} (x = {self.grid.nodes[bad]:g})")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def is_complex(self) -> bool:
        return self.values.dtype.kind == "c"

    def _check_same_grid(self, other: "GridFunction") -> None:
        if self.grid != other.grid:
            raise ValueError("grid functions live on different grids")

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check_same_grid(other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._check_same_grid(other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, scalar) -> "GridFunction":
        return GridFunction(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.grid, -self.values)


def sample(func: Callable, grid: Grid1D) -> GridFunction:
    """Pointwise evaluation of ``func`` on the grid nodes.

    Raises ValueError naming the offending node if any sample is non-finite.
    """
    xs = grid.nodes
    vals = np.asarray(func(xs))
    if vals.shape != xs.shape:
        vals = np.asarray([func(float(x)) for x in xs])
    return GridFunction(grid, vals)


def sup_norm(f: GridFunction) -> float:
    """max over nodes of |f|."""
    return float(np.max(np.abs(f.values)))


def fd_derivatives(f: GridFunction) -> tuple[GridFunction, GridFunction]:
    """Second-order finite-difference (f', f'') approximations.

    Central differences in the interior, one-sided second-order stencils at
    the two boundary nodes.  Boundary nodes should be excluded from residual
    norms (``Grid1D.interior_mask`` always drops them).
    """
    n = f.grid.n_points
    if n < 5:
        raise ValueError(f"grid too small for finite differences, need n_points >= 5, got {n}")
    h = f.grid.spacing
    v = f.values

    d1 = np.empty_like(v)
    d1[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    d1[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    d1[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)

    d2 = np.empty_like(v)
    d2[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (h * h)
    d2[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h)
    d2[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / (h * h)

    return GridFunction(f.grid, d1), GridFunction(f.grid, d2)


def write_csv(f: GridFunction, path: str | Path) -> None:
    """Serialize as ``x,value`` (complex values as ``x,re,im``), full precision."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        if f.is_complex:
            writer.writerow(["x", "re", "im"])
            for x, v in zip(f.grid.nodes, f.values):
                writer.writerow([f"{x:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])
        else:
            writer.writerow(["x", "value"])
            for x, v in zip(f.grid.nodes, f.values):
                writer.writerow([f"{x:.17g}", f"{v:.17g}"])


def read_csv(path: str | Path) -> GridFunction:
    """Inverse of :func:`write_csv`; rebuilds the uniform grid from the x column."""
    rows = []
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        for row in reader:
            if row:
                rows.append([float(c) for c in row])
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.asarray(rows)
    xs = data[:, 0]
    steps = np.diff(xs)
    if len(xs) < 3 or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ValueError(f"{path}: x column is not a uniform grid")
    grid = Grid1D(float(xs[0]), float(xs[-1]), len(xs))
    if len(header) == 3:
        return GridFunction(grid, data[:, 1] + 1j * data[:, 2])
    return GridFunction(grid, data[:, 1])
