"""Poisson solves on the 3D box: -Laplace(u) = 4 pi * source.

The 7-point stencil system with Dirichlet boundary data is solved directly
by diagonalizing the stencil with discrete sine transforms; the solution is
the exact stencil solution (residual at rounding level), so no iteration
control is needed. Boundary values come from the monopole + dipole
expansion of the source evaluated on the box faces.
"""

from __future__ import annotations

import numpy as np
from scipy.fft import dstn, idstn

from .grids import Grid3D, GridError, ScalarField


class PoissonError(RuntimeError):
    """Linear solve failed to reach the requested residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (final residual {residual:.3e})")
        self.residual = residual


def multipole_boundary(grid: Grid3D, source: np.ndarray):
    """Monopole + dipole potential of the source on the box faces.

    Returns (q, center, boundary) where boundary is a full grid array that
    is only meaningful on the faces.
    """
    vol = grid.cell_volume
    q = float(source.sum()) * vol
    xs, ys, zs = grid.axes()
    if abs(q) > 1e-300:
        cx = float((source.sum(axis=(1, 2)) * xs).sum()) * vol / q
        cy = float((source.sum(axis=(0, 2)) * ys).sum()) * vol / q
        cz = float((source.sum(axis=(0, 1)) * zs).sum()) * vol / q
        center = np.array([cx, cy, cz])
    else:
        center = 0.5 * (grid.origin + grid.upper_corner())
    # dipole about `center`
    dx = (source.sum(axis=(1, 2)) * (xs - center[0])).sum() * vol
    dy = (source.sum(axis=(0, 2)) * (ys - center[1])).sum() * vol
    dz = (source.sum(axis=(0, 1)) * (zs - center[2])).sum() * vol
    dip = np.array([dx, dy, dz])

    bound = np.zeros(grid.shape)
    X, Y, Z = grid.meshgrid()

    def fill(mask_slices):
        x = X[mask_slices] - center[0]
        y = Y[mask_slices] - center[1]
        z = Z[mask_slices] - center[2]
        r = np.sqrt(x * x + y * y + z * z)
        r = np.maximum(r, 1e-12)
        bound[mask_slices] = q / r + (dip[0] * x + dip[1] * y + dip[2] * z) / r**3

    for axis in range(3):
        for side in (0, -1):
            sl = [slice(None)] * 3
            sl[axis] = side
            fill(tuple(sl))
    return q, center, bound


def _dst_eigenvalues(n: int, h: float) -> np.ndarray:
    k = np.arange(1, n + 1)
    return (2.0 - 2.0 * np.cos(np.pi * k / (n + 1))) / h**2


def solve_dirichlet(grid: Grid3D, rhs: np.ndarray, boundary: np.ndarray) -> np.ndarray:
    """Solve -Lap_h u = rhs with u = boundary on the box faces."""
    nx, ny, nz = grid.shape
    h = grid.h
    f = rhs[1:-1, 1:-1, 1:-1].copy()
    # boundary nodes feed the adjacent interior rows
    f[0, :, :] += boundary[0, 1:-1, 1:-1] / h**2
    f[-1, :, :] += boundary[-1, 1:-1, 1:-1] / h**2
    f[:, 0, :] += boundary[1:-1, 0, 1:-1] / h**2
    f[:, -1, :] += boundary[1:-1, -1, 1:-1] / h**2
    f[:, :, 0] += boundary[1:-1, 1:-1, 0] / h**2
    f[:, :, -1] += boundary[1:-1, 1:-1, -1] / h**2

    fh = dstn(f, type=1)
    lx = _dst_eigenvalues(nx - 2, h)
    ly = _dst_eigenvalues(ny - 2, h)
    lz = _dst_eigenvalues(nz - 2, h)
    denom = lx[:, None, None] + ly[None, :, None] + lz[None, None, :]
    u_in = idstn(fh / denom, type=1)

    u = boundary.copy()
    u[1:-1, 1:-1, 1:-1] = u_in
    return u


def stencil_residual(grid: Grid3D, u: np.ndarray, rhs: np.ndarray) -> float:
    """Max-norm interior residual of -Lap_h u - rhs."""
    h2 = grid.h**2
    lap = (
        u[:-2, 1:-1, 1:-1]
        + u[2:, 1:-1, 1:-1]
        + u[1:-1, :-2, 1:-1]
        + u[1:-1, 2:, 1:-1]
        + u[1:-1, 1:-1, :-2]
        + u[1:-1, 1:-1, 2:]
        - 6.0 * u[1:-1, 1:-1, 1:-1]
    ) / h2
    return float(np.max(np.abs(-lap - rhs[1:-1, 1:-1, 1:-1])))


def poisson_solve(source: ScalarField, check_tol: float = 1e-6) -> ScalarField:
    """Potential u with -Lap u = 4 pi source and multipole boundary values."""
    grid = source.grid
    if not isinstance(grid, Grid3D):
        raise GridError("poisson_solve expects a 3D field")
    rhs = 4.0 * np.pi * source.values
    _, _, boundary = multipole_boundary(grid, source.values)
    u = solve_dirichlet(grid, rhs, boundary)
    res = stencil_residual(grid, u, rhs)
    scale = max(1.0, float(np.max(np.abs(rhs))))
    if res > check_tol * scale:
        raise PoissonError("direct stencil solve residual above tolerance", res)
    return ScalarField(grid=grid, values=u, kind="potential")
