"""Molecular Thomas-Fermi solver on a 3D box.

The TF minimizer is found as the damped fixed point of
rho = (2 [phi - mu]_+)^(3/2) / (3 pi^2),   phi = V_R - rho * |x|^-1,
with the chemical potential mu picked by bisection when the particle
number constraint binds. The same sweep with a region mask solves the
exterior problem on A_r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import tf_kinetic_constant
from .grids import Grid3D, GridError, ScalarField, fibonacci_sphere, trilinear_sample
from .poisson import multipole_boundary, poisson_solve, solve_dirichlet
from .tf_atom import AtomicTFSolution, atomic_tf

TF_C = tf_kinetic_constant(2)


def _density_of_phi(phi: np.ndarray, mu: float) -> np.ndarray:
    return (2.0 * np.maximum(phi - mu, 0.0)) ** 1.5 / (3.0 * math.pi**2)


class ConvergenceError(RuntimeError):
    """Fixed-point mixing failed to converge."""

    def __init__(self, message: str, history):
        super().__init__(message)
        self.history = list(history)


@dataclass(frozen=True)
class NuclearConfiguration:
    """Positions (Bohr) and charges of the K nuclei."""

    positions: np.ndarray
    charges: np.ndarray

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        chg = np.atleast_1d(np.asarray(self.charges, dtype=float))
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "charges", chg)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValueError("positions must be K x 3")
        if chg.shape != (pos.shape[0],) or np.any(chg <= 0.0):
            raise ValueError("need one positive charge per nucleus")
        if self.K >= 2 and self.R_min <= 0.0:
            raise ValueError("nuclei must be at distinct positions")
        pos.setflags(write=False)
        chg.setflags(write=False)

    @property
    def K(self) -> int:
        return self.positions.shape[0]

    @property
    def Z(self) -> float:
        return float(self.charges.sum())

    @property
    def z_min(self) -> float:
        return float(self.charges.min())

    @property
    def z_max(self) -> float:
        return float(self.charges.max())

    def _pair_distances(self):
        out = []
        for i in range(self.K):
            for j in range(i + 1, self.K):
                out.append(float(np.linalg.norm(self.positions[i] - self.positions[j])))
        return out

    @property
    def R_min(self) -> float:
        d = self._pair_distances()
        return min(d) if d else math.inf

    @property
    def R_max(self) -> float:
        d = self._pair_distances()
        return max(d) if d else 0.0

    @property
    def U_R(self) -> float:
        """Nucleus-nucleus repulsion sum_{i<j} z_i z_j / |R_i - R_j|."""
        u = 0.0
        for i in range(self.K):
            for j in range(i + 1, self.K):
                u += (
                    self.charges[i]
                    * self.charges[j]
                    / np.linalg.norm(self.positions[i] - self.positions[j])
                )
        return float(u)

    def scaled(self, l: float) -> "NuclearConfiguration":
        """Charges l z_j at positions l^(-1/3) R_j (exact TF covariance)."""
        return NuclearConfiguration(
            positions=self.positions * l ** (-1.0 / 3.0), charges=self.charges * l
        )

    def descriptor(self) -> dict:
        return {
            "positions": [[float(v) for v in p] for p in self.positions],
            "charges": [float(z) for z in self.charges],
        }


@dataclass(frozen=True)
class RegionMask:
    """Exterior region A_r = {x : |x - R_j| > r for all j} and its spheres."""

    config: NuclearConfiguration
    r: float
    sphere_points: int = 256

    def __post_init__(self):
        if self.r <= 0.0:
            raise ValueError("exclusion radius must be positive")
        if self.config.K >= 2 and self.r > self.config.R_min / 2.0 + 1e-12:
            raise ValueError("r must be <= R_min/2 so the spheres are disjoint")
        if self.sphere_points < 200:
            raise ValueError("need >= 200 sphere samples")

    def membership(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        inside_any = np.zeros(len(pts), dtype=bool)
        for pos in self.config.positions:
            inside_any |= np.linalg.norm(pts - pos, axis=1) <= self.r
        return ~inside_any

    def grid_mask(self, grid: Grid3D) -> np.ndarray:
        """Boolean array, True on nodes belonging to A_r."""
        X, Y, Z = grid.meshgrid()
        out = np.ones(grid.shape, dtype=bool)
        for pos in self.config.positions:
            d2 = (X - pos[0]) ** 2 + (Y - pos[1]) ** 2 + (Z - pos[2]) ** 2
            out &= d2 > self.r**2
        return out

    def sphere_samples(self, j: int) -> np.ndarray:
        return fibonacci_sphere(self.config.positions[j], self.r, self.sphere_points)


def _cube_inv_r_integral(lo: np.ndarray, hi: np.ndarray) -> float:
    """Exact integral of 1/|x| over the box [lo, hi] (closed-form corners)."""

    def F(x, y, z):
        r = math.sqrt(x * x + y * y + z * z)
        if r == 0.0:
            return 0.0
        out = 0.0
        if abs(y * z) > 0:
            out += y * z * math.log(x + r) if x + r > 0 else 0.0
        if abs(z * x) > 0:
            out += z * x * math.log(y + r) if y + r > 0 else 0.0
        if abs(x * y) > 0:
            out += x * y * math.log(z + r) if z + r > 0 else 0.0
        # principal-branch arctan: atan2 would wrap for negative x*r and
        # break the corner inclusion-exclusion
        if x != 0.0:
            out -= 0.5 * x * x * math.atan(y * z / (x * r))
        if y != 0.0:
            out -= 0.5 * y * y * math.atan(z * x / (y * r))
        if z != 0.0:
            out -= 0.5 * z * z * math.atan(x * y / (z * r))
        return out

    total = 0.0
    for sx, x in ((-1, lo[0]), (1, hi[0])):
        for sy, y in ((-1, lo[1]), (1, hi[1])):
            for sz, z in ((-1, lo[2]), (1, hi[2])):
                total += sx * sy * sz * F(x, y, z)
    return total


def external_potential(grid: Grid3D, config: NuclearConfiguration) -> ScalarField:
    """V_R on the grid, with the nucleus-containing cell averaged exactly."""
    X, Y, Z = grid.meshgrid()
    v = np.zeros(grid.shape)
    h = grid.h
    for pos, z in zip(config.positions, config.charges):
        d = np.sqrt((X - pos[0]) ** 2 + (Y - pos[1]) ** 2 + (Z - pos[2]) ** 2)
        idx = grid.index_of(pos)
        node = grid.origin + h * np.asarray(idx)
        offset = pos - node
        contained = np.all(np.abs(offset) <= h / 2 + 1e-12) and grid.contains(pos)
        if contained:
            d[idx] = np.inf  # replaced by the cell average below
        with np.errstate(divide="ignore"):
            v += z / d
        if contained:
            lo = node - h / 2 - pos
            hi = node + h / 2 - pos
            v[idx] += z * _cube_inv_r_integral(lo, hi) / h**3
    return ScalarField(grid=grid, values=v, kind="potential")


def check_grid_margin(grid: Grid3D, config: NuclearConfiguration, factor: float = 6.0):
    """Box must hold every nucleus with margin >= factor * z^(-1/3)."""
    for pos, z in zip(config.positions, config.charges):
        need = factor * z ** (-1.0 / 3.0)
        if not grid.contains(pos) or grid.min_face_distance(pos) < need - 1e-9:
            raise GridError(
                f"nucleus at {pos} needs margin {need:.2f} Bohr inside the box"
            )


@dataclass(frozen=True)
class TFSolution:
    """Converged molecular (or exterior) TF solution."""

    config: NuclearConfiguration
    grid: Grid3D
    rho: ScalarField
    phi: ScalarField
    mu: float
    energy: float
    residual: float
    history: tuple = field(default=())
    mask_r: float | None = None

    @property
    def n_electrons(self) -> float:
        return self.rho.integrate()


@dataclass(frozen=True)
class TFOptions:
    mix_alpha: float = 0.5
    tol: float = 1e-8  # relative L1 density change per sweep
    max_iter: int = 400
    min_alpha: float = 0.02


def _electron_potential(grid: Grid3D, rho: np.ndarray) -> np.ndarray:
    u = poisson_solve(ScalarField(grid=grid, values=rho))
    return u.values


def _pick_mu(phi: np.ndarray, target: float, cell_vol: float) -> float:
    """Smallest mu >= 0 with integral of the TF density <= target."""

    def charge(mu):
        return _density_of_phi(phi, mu).sum() * cell_vol

    if charge(0.0) <= target:
        return 0.0
    lo, hi = 0.0, max(1.0, float(phi.max()))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if charge(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def _tf_fixed_point(
    grid: Grid3D,
    v_ext: np.ndarray,
    n_target: float,
    neutral_charge: float,
    opts: TFOptions,
    mask: np.ndarray | None,
    rho0: np.ndarray,
):
    """Shared damped-mixing loop for the full and exterior problems."""
    vol = grid.cell_volume
    rho = rho0.copy()
    alpha = opts.mix_alpha
    history = []
    mu = 0.0
    improve_streak = 0
    constrained = n_target < neutral_charge - 1e-9

    for it in range(opts.max_iter):
        phi = v_ext - _electron_potential(grid, rho)
        mu = _pick_mu(phi, n_target, vol) if constrained else 0.0
        rho_new = _density_of_phi(phi, mu)
        if mask is not None:
            rho_new = np.where(mask, rho_new, 0.0)
        change = float(np.abs(rho_new - rho).sum()) * vol / max(n_target, 1e-12)
        history.append(change)
        if len(history) > 1 and change > history[-2] * 1.0000001:
            alpha = max(opts.min_alpha, 0.5 * alpha)
            improve_streak = 0
        else:
            improve_streak += 1
            if improve_streak >= 5:
                alpha = min(0.9, 1.2 * alpha)
                improve_streak = 0
        rho = (1.0 - alpha) * rho + alpha * rho_new
        if change < opts.tol:
            break
    else:
        raise ConvergenceError(
            f"TF mixing did not reach {opts.tol:g} in {opts.max_iter} sweeps "
            f"(last change {history[-1]:.3e})",
            history,
        )

    phi = v_ext - _electron_potential(grid, rho)
    if constrained:
        mu = _pick_mu(phi, n_target, vol)
    resid_field = TF_C * (5.0 / 3.0) * rho ** (2.0 / 3.0) - np.maximum(phi - mu, 0.0)
    if mask is not None:
        resid_field = np.where(mask, resid_field, 0.0)
    residual = float(np.max(np.abs(resid_field)))
    return rho, phi, mu, residual, tuple(history)


def tf_energy(grid: Grid3D, rho: np.ndarray, v_ext: np.ndarray) -> float:
    """Quadrature of the TF functional c int rho^(5/3) - int V rho + D(rho)."""
    u = _electron_potential(grid, rho)
    return grid.integrate(TF_C * rho ** (5.0 / 3.0) - v_ext * rho + 0.5 * rho * u)


def solve_tf(
    config: NuclearConfiguration,
    n: float,
    grid: Grid3D,
    opts: TFOptions | None = None,
    atomic_refs: dict | None = None,
) -> TFSolution:
    """Molecular TF minimizer with particle number constraint int rho <= n."""
    if n <= 0.0:
        raise ValueError("particle number must be positive")
    opts = opts or TFOptions()
    check_grid_margin(grid, config)

    v_ext = external_potential(grid, config).values
    X, Y, Z = grid.meshgrid()
    rho0 = np.zeros(grid.shape)
    refs = atomic_refs or {}
    for pos, z in zip(config.positions, config.charges):
        ref = refs.get(float(z)) or atomic_tf(float(z))
        refs[float(z)] = ref
        d = np.sqrt((X - pos[0]) ** 2 + (Y - pos[1]) ** 2 + (Z - pos[2]) ** 2)
        d = np.maximum(d, grid.h / 4.0)
        rho0 += ref.rho_at(d)
    if n < config.Z:
        rho0 *= n / config.Z

    rho, phi, mu, residual, history = _tf_fixed_point(
        grid, v_ext, min(n, config.Z), config.Z, opts, None, rho0
    )
    energy = tf_energy(grid, rho, v_ext)
    return TFSolution(
        config=config,
        grid=grid,
        rho=ScalarField(grid=grid, values=rho, kind="density"),
        phi=ScalarField(grid=grid, values=phi, kind="potential"),
        mu=mu,
        energy=energy,
        residual=residual,
        history=history,
    )


def exterior_tf(
    v_r: ScalarField,
    mask: RegionMask,
    charge_bound: float,
    opts: TFOptions | None = None,
) -> TFSolution:
    """TF minimizer over densities supported on A_r with int rho <= charge_bound."""
    if charge_bound <= 0.0:
        raise ValueError("charge bound must be positive")
    grid = v_r.grid
    if not isinstance(grid, Grid3D):
        raise GridError("exterior problem is solved on a 3D grid")
    opts = opts or TFOptions()
    gmask = mask.grid_mask(grid)
    v_ext = np.where(gmask, v_r.values, 0.0)
    if float(np.max(np.abs(v_r.values[~gmask]))) > 1e-9 * max(
        1.0, float(np.max(np.abs(v_r.values)))
    ):
        raise GridError("exterior potential must vanish off A_r")

    rho0 = np.where(gmask, _density_of_phi(v_ext, 0.0), 0.0)
    s = rho0.sum() * grid.cell_volume
    if s > charge_bound > 0:
        rho0 *= charge_bound / s
    # neutral_charge sentinel: unconstrained charge of this exterior problem
    # is unknown, so always run the mu bisection against the bound.
    rho, phi, mu_out, residual, history = _tf_fixed_point(
        grid, v_ext, charge_bound, math.inf, opts, gmask, rho0
    )
    # constraint may be slack: redo mu decision
    energy = tf_energy(grid, rho, v_ext)
    return TFSolution(
        config=mask.config,
        grid=grid,
        rho=ScalarField(grid=grid, values=rho, kind="density"),
        phi=ScalarField(grid=grid, values=phi, kind="potential"),
        mu=mu_out,
        energy=energy,
        residual=residual,
        history=history,
        mask_r=mask.r,
    )


def screened_tf(sol: TFSolution, mask: RegionMask):
    """Screened potential Phi_r = V_R - (rho 1_{A_r^c}) * |x|^-1 on the grid.

    Returns (field, sphere_sups) where sphere_sups[j] is the sup of |Phi_r|
    over the sampled sphere around nucleus j.
    """
    grid = sol.grid
    if mask.config.K >= 2 and mask.r > mask.config.R_min / 2.0 + 1e-12:
        raise GridError("mask radius must be <= R_min/2")
    gmask = mask.grid_mask(grid)
    inner_rho = np.where(gmask, 0.0, sol.rho.values)
    u = poisson_solve(ScalarField(grid=grid, values=inner_rho))
    v_ext = external_potential(grid, sol.config).values
    phi_r = v_ext - u.values
    field = ScalarField(grid=grid, values=phi_r, kind="potential")

    sups = []
    ufield = ScalarField(grid=grid, values=u.values, kind="potential")
    for j in range(mask.config.K):
        pts = mask.sphere_samples(j)
        vals = _exact_vr(pts, sol.config) - trilinear_sample(ufield, pts)
        sups.append(float(np.max(np.abs(vals))))
    return field, sups


def _exact_vr(points: np.ndarray, config: NuclearConfiguration) -> np.ndarray:
    out = np.zeros(len(points))
    for pos, z in zip(config.positions, config.charges):
        out += z / np.maximum(np.linalg.norm(points - pos, axis=1), 1e-12)
    return out


def matched_atomic_grid(grid: Grid3D, position: np.ndarray) -> Grid3D:
    """Same spacing and dims as `grid`, recentered on one nucleus.

    Keeping the nucleus at the same node offset makes the near-cusp
    discretization error cancel in molecule-minus-atoms differences.
    """
    pos = np.asarray(position, dtype=float)
    idx = grid.index_of(pos)
    offset = pos - (grid.origin + grid.h * np.asarray(idx))
    center_idx = np.asarray(grid.dims) // 2
    # nucleus sits at the central node plus its original sub-cell offset
    origin = pos - offset - grid.h * center_idx
    return Grid3D(origin=origin, h=grid.h, dims=grid.dims, point_budget=grid.point_budget)


def teller_check(
    config: NuclearConfiguration,
    grid: Grid3D,
    opts: TFOptions | None = None,
    atomic_energy_mode: str = "matched3d",
) -> float:
    """D^TF(Z, R) = E^TF_mol - sum_j E^TF_atom(z_j) + U_R (Teller: > 0).

    With atomic_energy_mode="matched3d" the atomic references are solved on
    grids of identical spacing and size, so cusp quadrature errors cancel in
    the difference; "radial" uses the high-accuracy radial energies instead.
    """
    mol = solve_tf(config, config.Z, grid, opts=opts)
    e_atoms = 0.0
    for pos, z in zip(config.positions, config.charges):
        if atomic_energy_mode == "matched3d":
            agrid = matched_atomic_grid(grid, pos)
            single = NuclearConfiguration(positions=[pos], charges=[z])
            # recentering keeps the nucleus; reuse the same solver
            asol = solve_tf(single, float(z), agrid, opts=opts)
            e_atoms += asol.energy
        elif atomic_energy_mode == "radial":
            e_atoms += atomic_tf(float(z)).energy
        else:
            raise ValueError(f"unknown atomic_energy_mode {atomic_energy_mode!r}")
    return mol.energy - e_atoms + config.U_R
