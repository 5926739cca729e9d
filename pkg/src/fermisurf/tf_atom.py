"""Atomic Thomas-Fermi solutions.

The neutral atom reduces to the universal ODE y'' = y^(3/2) / sqrt(x) with
y(0) = 1, y(infinity) = 0. The initial slope is found by shooting; the far
tail is obtained by a second, backward shooting from the asymptotic regime
(the forward solution cannot be trusted at large x because perturbations
grow like x^7.77). Atomic quantities for any charge follow by the exact
scaling rho_z(x) = z^2 rho_1(z^(1/3) x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .constants import SOMMERFELD_C, TF_LENGTH_B, XI, tf_kinetic_constant
from .coulomb import radial_hartree_potential
from .grids import GridError, RadialGrid, ScalarField

#: Dimensionless Sommerfeld tail of the universal profile: y -> 144 / x^3.
Y_TAIL = 144.0


class ShootingError(RuntimeError):
    """Bisection bracket failure in the universal-profile shooting."""


def _series_y(x: float, slope: float):
    """Small-x series of the universal solution (removes the sqrt singularity)."""
    b = slope
    y = (
        1.0
        + b * x
        + (4.0 / 3.0) * x**1.5
        + 0.4 * b * x**2.5
        + x**3 / 3.0
        + (3.0 * b * b / 70.0) * x**3.5
    )
    dy = (
        b
        + 2.0 * x**0.5
        + b * x**1.5
        + x**2
        + (3.0 * b * b / 20.0) * x**2.5
    )
    return y, dy


def _rhs(x, state):
    y = max(state[0], 0.0)
    return [state[1], y**1.5 / math.sqrt(x)]


def _integrate_forward(slope: float, x0: float, x_end: float, dense: bool = False):
    y0, dy0 = _series_y(x0, slope)

    def hit_zero(x, s):
        return s[0]

    hit_zero.terminal = True
    hit_zero.direction = -1

    def blow_up(x, s):
        return s[0] - 2.0

    blow_up.terminal = True
    blow_up.direction = 1

    return solve_ivp(
        _rhs,
        (x0, x_end),
        [y0, dy0],
        method="DOP853",
        rtol=1e-12,
        atol=1e-14,
        events=(hit_zero, blow_up),
        dense_output=dense,
    )


def _tail_y(x, c):
    """One-correction Sommerfeld tail and its derivative."""
    y = Y_TAIL * x**-3 * (1.0 + c * x**-XI)
    dy = Y_TAIL * (-3.0 * x**-4 + c * (-3.0 - XI) * x ** (-4.0 - XI))
    return y, dy


def _integrate_backward(c: float, x_far: float, x_match: float):
    y0, dy0 = _tail_y(x_far, c)
    return solve_ivp(
        _rhs,
        (x_far, x_match),
        [y0, dy0],
        method="DOP853",
        rtol=1e-12,
        atol=1e-16,
        dense_output=True,
    )


@dataclass(frozen=True)
class UniversalTF:
    """Universal TF profile y(x) with y(0) = 1, decreasing to the 144/x^3 tail."""

    slope_B: float
    tail_c: float
    x_max: float
    _fwd: object
    _bwd: object
    x_match: float
    x0: float

    def y(self, x):
        """Profile value(s); accepts scalars or arrays."""
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(xs)
        lo = xs < self.x0
        mid = (~lo) & (xs <= self.x_match)
        hi_num = (xs > self.x_match) & (xs <= self.x_max)
        far = xs > self.x_max
        if np.any(lo):
            out[lo] = [_series_y(v, self.slope_B)[0] for v in xs[lo]]
        if np.any(mid):
            out[mid] = self._fwd.sol(xs[mid])[0]
        if np.any(hi_num):
            out[hi_num] = self._bwd.sol(xs[hi_num])[0]
        if np.any(far):
            out[far] = _tail_y(xs[far], self.tail_c)[0]
        out = np.maximum(out, 0.0)
        return out if np.ndim(x) else float(out[0])


def solve_universal(
    x_max: float = 1e5,
    tol: float = 1e-11,
    x0: float = 1e-3,
    x_match: float = 5.0,
    bracket=(-1.8, -1.4),
) -> UniversalTF:
    """Shooting solution of the universal TF equation.

    The slope is bracketed by bisection: slopes below the critical value
    drive y through zero, slopes above make it blow up. A second shooting
    (backward from x_max on the tail amplitude) continues the profile
    through the Sommerfeld regime.
    """
    if x_max < 50.0:
        raise ValueError("x_max must be >= 50")
    if tol <= 0.0:
        raise ValueError("tol must be positive")

    lo, hi = bracket
    x_classify = 80.0
    sol_lo = _integrate_forward(lo, x0, x_classify)
    sol_hi = _integrate_forward(hi, x0, x_classify)
    if not (len(sol_lo.t_events[0]) and len(sol_hi.t_events[0]) == 0):
        raise ShootingError("initial bracket does not straddle the critical slope")

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        sol = _integrate_forward(mid, x0, x_classify)
        if len(sol.t_events[0]):  # crossed zero: slope too negative
            lo = mid
        else:
            hi = mid
    slope = 0.5 * (lo + hi)

    fwd = _integrate_forward(slope, x0, x_match, dense=True)
    if fwd.t[-1] < x_match:
        raise ShootingError("forward integration terminated before the match point")
    y_match = float(fwd.sol(x_match)[0])

    # secant iteration on the tail amplitude
    c0, c1 = -13.5, -13.0
    f0 = float(_integrate_backward(c0, x_max, x_match).sol(x_match)[0]) - y_match
    f1 = float(_integrate_backward(c1, x_max, x_match).sol(x_match)[0]) - y_match
    for _ in range(60):
        if f1 == f0:
            break
        c2 = c1 - f1 * (c1 - c0) / (f1 - f0)
        f2 = float(_integrate_backward(c2, x_max, x_match).sol(x_match)[0]) - y_match
        c0, f0, c1, f1 = c1, f1, c2, f2
        if abs(f1) < 1e-14 * max(y_match, 1e-30):
            break
    bwd = _integrate_backward(c1, x_max, x_match)

    return UniversalTF(
        slope_B=slope,
        tail_c=c1,
        x_max=x_max,
        _fwd=fwd,
        _bwd=bwd,
        x_match=x_match,
        x0=x0,
    )


_UNIVERSAL_CACHE: dict = {}


def universal_profile() -> UniversalTF:
    """Module-level cached universal profile at default settings."""
    if "u" not in _UNIVERSAL_CACHE:
        _UNIVERSAL_CACHE["u"] = solve_universal()
    return _UNIVERSAL_CACHE["u"]


def slope_energy_constant(slope_B: float) -> float:
    """e_TF with E(z) = -e_TF z^(7/3), from the initial-slope relation."""
    return (3.0 / 7.0) * abs(slope_B) / TF_LENGTH_B


@dataclass(frozen=True)
class AtomicTFSolution:
    """Neutral atomic TF solution on a radial grid (mu = 0)."""

    z: float
    grid: RadialGrid
    rho: ScalarField
    phi: ScalarField
    energy: float
    mu: float
    profile: UniversalTF

    def phi_at(self, r):
        """TF potential at arbitrary radii, from the universal profile."""
        r = np.asarray(r, dtype=float)
        x = r * self.z ** (1.0 / 3.0) / TF_LENGTH_B
        return self.z * self.profile.y(x) / r

    def rho_at(self, r):
        phi = self.phi_at(r)
        return (2.0 * np.maximum(phi, 0.0)) ** 1.5 / (3.0 * math.pi**2)


def default_atomic_grid(z: float, n: int = 3001, r_max_factor: float = 2000.0):
    scale = z ** (-1.0 / 3.0)
    return RadialGrid.logarithmic(1e-7 * scale, r_max_factor * scale, n)


def atomic_tf(z: float, grid: RadialGrid | None = None) -> AtomicTFSolution:
    """Neutral atomic TF solution for charge z.

    Energy is evaluated by quadrature of the TF functional; the exact
    scaling E(z) = z^(7/3) E(1) is inherited from the universal profile.
    """
    if z <= 0.0:
        raise ValueError("z must be positive")
    if grid is None:
        grid = default_atomic_grid(z)
    scale = z ** (-1.0 / 3.0)
    if grid.r_max < 20.0 * scale:
        raise GridError("grid too short: must cover well beyond the TF length z^(-1/3)")

    u = universal_profile()
    r = grid.nodes
    x = r / (TF_LENGTH_B * scale)
    y = u.y(x)
    phi = z * y / r
    rho = (2.0 * np.maximum(phi, 0.0)) ** 1.5 / (3.0 * math.pi**2)

    charge = grid.integrate(rho)
    if charge < 0.999 * z:
        raise GridError(
            f"grid captures only {charge / z:.4%} of the charge; extend r_max"
        )

    c_tf = tf_kinetic_constant(2)
    rho_f = ScalarField(grid=grid, values=rho, kind="density")
    hart = radial_hartree_potential(rho_f)
    energy = grid.integrate(
        c_tf * rho ** (5.0 / 3.0) - (z / r) * rho + 0.5 * rho * hart
    )

    return AtomicTFSolution(
        z=z,
        grid=grid,
        rho=rho_f,
        phi=ScalarField(grid=grid, values=phi, kind="potential"),
        energy=energy,
        mu=0.0,
        profile=u,
    )


def atomic_screened_tf(sol: AtomicTFSolution, r: float) -> ScalarField:
    """Screened potential z/|x| minus the Coulomb field of the charge inside r.

    Evaluated on the solution's radial grid via Newton's theorem.
    """
    grid = sol.grid
    if not (0.0 < r <= grid.r_max):
        raise GridError("screening radius must lie inside the grid")
    nodes = grid.nodes
    contrib = grid.weights * sol.rho.values
    inside = nodes <= r
    q_in_cum = np.cumsum(np.where(inside, contrib, 0.0))
    q_ball = float(q_in_cum[-1])
    # potential at s of the density restricted to the ball of radius r:
    # charge within min(s, r) acts as a point charge; shells between s and r
    # (when s < r) contribute charge / shell-radius.
    shell_term = np.where(inside, contrib / nodes, 0.0)
    outer = np.cumsum(shell_term[::-1])[::-1] - shell_term
    pot_ball = np.where(
        nodes >= r,
        q_ball / nodes,
        q_in_cum / nodes + outer,
    )
    values = sol.z / nodes - pot_ball
    return ScalarField(grid=grid, values=values, kind="potential")


def screened_sup_at(sol: AtomicTFSolution, r: float) -> float:
    """|Phi_r| evaluated on its own sphere |x| = r (radial sup is the value)."""
    field = atomic_screened_tf(sol, r)
    return float(np.abs(np.interp(r, sol.grid.nodes, field.values)))


def sommerfeld_tail_constant() -> float:
    """c_S = 3^4 2^-3 pi^2, the limit of r^4 phi(r) for the neutral atom."""
    return SOMMERFELD_C
