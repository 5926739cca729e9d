import math

import numpy as np
import pytest
from scipy.special import erf

from fermisurf.grids import Grid3D, GridError, RadialGrid, ScalarField
from fermisurf.poisson import poisson_solve, stencil_residual


def _ball_source(grid, q, a):
    X, Y, Z = grid.meshgrid()
    r = np.sqrt(X**2 + Y**2 + Z**2)
    return np.where(r <= a, q / (4.0 / 3.0 * math.pi * a**3), 0.0), r


class TestUniformBall:
    def test_newton_outside_and_center(self):
        grid = Grid3D.cube((0, 0, 0), 4.0, 65)
        rho, r = _ball_source(grid, 2.0, 1.0)
        u = poisson_solve(ScalarField(grid=grid, values=rho))
        q_disc = grid.integrate(rho)
        # pointwise Newton check outside the support
        far = (r > 2.0) & (r < 3.5)
        assert np.allclose(u.values[far], q_disc / r[far], rtol=2e-2)
        # center value 3q/(2a)
        center = tuple(np.array(grid.dims) // 2)
        assert u.values[center] == pytest.approx(1.5 * q_disc / 1.0, rel=2e-2)

    def test_zero_source(self):
        grid = Grid3D.cube((0, 0, 0), 2.0, 17)
        u = poisson_solve(ScalarField(grid=grid, values=np.zeros(grid.shape)))
        assert np.max(np.abs(u.values)) < 1e-12


class TestGaussianOracle:
    def test_matches_erf_formula(self):
        # unit-charge Gaussian with width 1: u(x) = erf(|x|/sqrt(2))/|x|
        grid = Grid3D.cube((0, 0, 0), 6.0, 61)
        X, Y, Z = grid.meshgrid()
        r = np.sqrt(X**2 + Y**2 + Z**2)
        rho = np.exp(-0.5 * r**2) / (2.0 * math.pi) ** 1.5
        u = poisson_solve(ScalarField(grid=grid, values=rho))
        r_safe = np.maximum(r, 1e-10)
        exact = erf(r_safe / math.sqrt(2.0)) / r_safe
        exact[r < 1e-10] = math.sqrt(2.0 / math.pi)
        inner = r < 4.0
        assert np.max(np.abs(u.values[inner] - exact[inner])) < 5e-3


class TestContracts:
    def test_stencil_residual_at_rounding_level(self):
        grid = Grid3D.cube((0, 0, 0), 3.0, 33)
        rho, _ = _ball_source(grid, 1.0, 0.8)
        u = poisson_solve(ScalarField(grid=grid, values=rho))
        res = stencil_residual(grid, u.values, 4.0 * math.pi * rho)
        assert res < 1e-8

    def test_off_center_dipole_boundary(self):
        # shifted ball: monopole+dipole boundary keeps the far field accurate
        grid = Grid3D.cube((0, 0, 0), 4.0, 65)
        X, Y, Z = grid.meshgrid()
        r1 = np.sqrt((X - 0.6) ** 2 + Y**2 + Z**2)
        rho = np.where(r1 <= 0.5, 1.0, 0.0)
        q = grid.integrate(rho)
        u = poisson_solve(ScalarField(grid=grid, values=rho))
        far = (r1 > 1.5) & (r1 < 3.0)
        assert np.allclose(u.values[far], q / r1[far], rtol=3e-2)

    def test_rejects_radial_fields(self):
        grid = RadialGrid.logarithmic(1e-4, 5.0, 51)
        f = ScalarField(grid=grid, values=np.ones(51))
        with pytest.raises(GridError):
            poisson_solve(f)
