"""Kohn-Sham LDA self-consistent field on a 3D box.

Orbitals come from the sparse eigensolver applied to the effective
Hamiltonian -1/2 Laplacian + v_eff with v_eff = -V_R + rho * |x|^-1
- g'(rho); the density is Anderson-mixed between sweeps.
"""

from __future__ import annotations

import math

import numpy as np

from .eig import apply_hamiltonian, lowest_eigenpairs
from .grids import Grid3D, ScalarField
from .ks_common import AndersonMixer, KSState, SCFError, aufbau_occupations
from .poisson import poisson_solve
from .tf_atom import atomic_tf
from .tf_molecule import NuclearConfiguration, check_grid_margin, external_potential
from .xc import XCFunctional


def _hartree_3d(grid: Grid3D, rho: np.ndarray) -> np.ndarray:
    return poisson_solve(ScalarField(grid=grid, values=rho)).values


def scf_molecule(
    config: NuclearConfiguration,
    N: float,
    xc: XCFunctional,
    grid: Grid3D,
    q: float = 2.0,
    tol: float = 1e-6,
    eig_tol: float = 1e-7,
    max_iter: int = 120,
    mix_alpha: float = 0.4,
    extra_orbitals: int = 1,
) -> KSState:
    """Converged molecular KS-LDA state with aufbau occupations."""
    if N <= 0.0:
        raise ValueError("N must be positive (use the trivial state for N = 0)")
    if N > config.Z + 1e-12:
        raise ValueError("need N <= Z (existence regime)")
    check_grid_margin(grid, config)

    v_ext = external_potential(grid, config).values
    n_orb = int(math.ceil(N / q)) + extra_orbitals

    X, Y, Z = grid.meshgrid()
    rho = np.zeros(grid.shape)
    for pos, z in zip(config.positions, config.charges):
        ref = atomic_tf(float(z))
        d = np.sqrt((X - pos[0]) ** 2 + (Y - pos[1]) ** 2 + (Z - pos[2]) ** 2)
        rho += ref.rho_at(np.maximum(d, grid.h / 4.0))
    rho *= N / grid.integrate(rho)

    mixer = AndersonMixer(alpha=mix_alpha)
    history = []
    orbitals = None
    pairs = None
    occ = None
    for it in range(max_iter):
        v_eff = -v_ext + _hartree_3d(grid, rho) - xc.derivative(rho)
        v_field = ScalarField(grid=grid, values=v_eff, kind="potential")
        initial = (
            np.stack([p[1].values.ravel() for p in pairs], axis=1)
            if pairs is not None
            else None
        )
        # loose eigensolves while the density is far from self-consistent
        it_tol = max(eig_tol, 0.1 * history[-1]) if history else 1e-4
        pairs = lowest_eigenpairs(
            v_field, n_orb, degeneracy_budget=1, tol=it_tol, initial=initial,
            maxiter=500,
        )
        eig = np.array([p[0] for p in pairs])
        occ = aufbau_occupations(eig, np.full(len(pairs), float(q)), N)
        rho_out = np.zeros(grid.shape)
        for lam, (eps, orb) in zip(occ, pairs):
            if lam > 0.0:
                rho_out += lam * orb.values**2
        resid = grid.integrate(np.abs(rho_out - rho)) / N
        history.append(resid)
        if resid < tol:
            rho = rho_out
            break
        mixed = mixer.mix(rho.ravel(), rho_out.ravel()).reshape(grid.shape)
        rho = np.maximum(mixed, 0.0)
    else:
        raise SCFError(
            f"molecular SCF did not reach {tol:g} in {max_iter} iterations "
            f"(last residual {history[-1]:.3e})",
            history,
        )

    # stationarity of every occupied orbital under the converged potential
    v_eff = -v_ext + _hartree_3d(grid, rho) - xc.derivative(rho)
    scale = math.sqrt(grid.cell_volume)
    stat_resids = []
    for lam, (eps, orb) in zip(occ, pairs):
        if lam <= 1e-12:
            continue
        hpsi = apply_hamiltonian(grid, v_eff, orb.values)
        stat_resids.append(float(np.linalg.norm(hpsi - eps * orb.values)) * scale)

    eig = np.array([p[0] for p in pairs])
    external = -grid.integrate(v_ext * rho)
    hartree = 0.5 * grid.integrate(_hartree_3d(grid, rho) * rho)
    exc = grid.integrate(xc.evaluate(rho))
    vxc_rho = grid.integrate(xc.derivative(rho) * rho)
    e_sum = float(np.dot(occ, eig))
    kinetic = e_sum - external - 2.0 * hartree + vxc_rho
    total = kinetic + external + hartree - exc

    keep = occ > 1e-12
    return KSState(
        orbitals=tuple(p[1] for p, k in zip(pairs, keep) if k),
        occupations=occ[keep],
        eigenvalues=eig[keep],
        q=q,
        rho0=ScalarField(grid=grid, values=rho, kind="density"),
        energy={
            "kinetic": kinetic,
            "external": external,
            "hartree": hartree,
            "xc": exc,
            "total": total,
        },
        scf_history=tuple(history),
        meta={
            "config": config.descriptor(),
            "N": N,
            "grid": grid.descriptor(),
            "stationarity": tuple(stat_resids),
        },
    )
