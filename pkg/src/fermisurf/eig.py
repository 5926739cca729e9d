"""Lowest eigenpairs of -1/2 Lap + V on the 3D box (Dirichlet walls).

A block preconditioned solver (scipy's LOBPCG with the inverse-diagonal
preconditioner) computes the few lowest states; small boxes can be checked
against dense diagonalization.
"""

from __future__ import annotations

import numpy as np
from scipy.fft import dstn, idstn
from scipy.sparse.linalg import LinearOperator, lobpcg

from .grids import Grid3D, GridError, ScalarField


class EigenError(RuntimeError):
    """Krylov stagnation: residual tolerance not reached."""

    def __init__(self, message: str, best_residual: float):
        super().__init__(f"{message} (best residual {best_residual:.3e})")
        self.best_residual = best_residual


def apply_hamiltonian(grid: Grid3D, v: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """(-1/2 Lap_h + V) psi with psi = 0 outside the box."""
    h2 = grid.h**2
    out = (6.0 * psi) / (2.0 * h2) + v * psi
    out[:-1, :, :] -= psi[1:, :, :] / (2.0 * h2)
    out[1:, :, :] -= psi[:-1, :, :] / (2.0 * h2)
    out[:, :-1, :] -= psi[:, 1:, :] / (2.0 * h2)
    out[:, 1:, :] -= psi[:, :-1, :] / (2.0 * h2)
    out[:, :, :-1] -= psi[:, :, 1:] / (2.0 * h2)
    out[:, :, 1:] -= psi[:, :, :-1] / (2.0 * h2)
    return out


def hamiltonian_operator(grid: Grid3D, v: np.ndarray) -> LinearOperator:
    n = grid.n_points
    shape = grid.shape

    def matvec(x):
        return apply_hamiltonian(grid, v, x.reshape(shape)).ravel()

    def matmat(x):
        cols = [matvec(x[:, j]) for j in range(x.shape[1])]
        return np.stack(cols, axis=1)

    return LinearOperator((n, n), matvec=matvec, matmat=matmat, dtype=float)


def dense_hamiltonian(grid: Grid3D, v: np.ndarray) -> np.ndarray:
    """Dense matrix of the same operator; oracle for small boxes only."""
    n = grid.n_points
    if n > 4096:
        raise GridError("dense oracle limited to 16^3 boxes")
    H = np.zeros((n, n))
    eye = np.eye(n)
    for j in range(n):
        H[:, j] = apply_hamiltonian(grid, v, eye[:, j].reshape(grid.shape)).ravel()
    return 0.5 * (H + H.T)


def lowest_eigenpairs(
    potential: ScalarField,
    count: int,
    degeneracy_budget: int = 2,
    tol: float = 1e-7,
    maxiter: int = 300,
    initial: np.ndarray | None = None,
    seed: int = 7,
):
    """Lowest `count` eigenpairs, solving for count + degeneracy_budget states.

    Returns (eigenvalues, orbitals) with eigenvalues nondecreasing and
    orbitals orthonormal under the grid inner product (h^3 sum).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    grid = potential.grid
    if not isinstance(grid, Grid3D):
        raise GridError("lowest_eigenpairs expects a 3D potential")
    v = potential.values
    if not np.all(np.isfinite(v)):
        raise GridError("potential must be finite at all nodes")

    nev = count + max(0, degeneracy_budget)
    n = grid.n_points
    nev = min(nev, max(1, n - 1))
    A = hamiltonian_operator(grid, v)

    # spectral preconditioner: exact inverse of -1/2 Lap_h + c via sine
    # transforms; kills the stiff Laplacian part of the error in one apply
    shape = grid.shape
    h = grid.h
    c_shift = 1.0 + max(0.0, -float(v.min())) * 0.1

    def _half_lap_eigs(m):
        k = np.arange(1, m + 1)
        return 0.5 * (2.0 - 2.0 * np.cos(np.pi * k / (m + 1))) / h**2

    denom = (
        _half_lap_eigs(shape[0])[:, None, None]
        + _half_lap_eigs(shape[1])[None, :, None]
        + _half_lap_eigs(shape[2])[None, None, :]
        + c_shift
    )

    def _precond_one(x):
        return idstn(dstn(x.reshape(shape), type=1) / denom, type=1).ravel()

    def _precond_mat(X):
        return np.stack([_precond_one(X[:, j]) for j in range(X.shape[1])], axis=1)

    M = LinearOperator(
        (n, n),
        matvec=lambda x: _precond_one(np.asarray(x).ravel()),
        matmat=_precond_mat,
        dtype=float,
    )

    rng = np.random.default_rng(seed)
    if initial is not None and initial.shape == (n, nev):
        X = initial.copy()
    else:
        X = rng.standard_normal((n, nev))
        if initial is not None:
            k = min(initial.shape[1], nev)
            X[:, :k] = initial[:, :k]

    import warnings

    with np.errstate(all="ignore"), warnings.catch_warnings():
        # our own residual check below is the authority, not lobpcg's
        warnings.simplefilter("ignore", UserWarning)
        vals, vecs = lobpcg(A, X, M=M, tol=tol * 0.1, maxiter=maxiter, largest=False)
    order = np.argsort(vals)
    vals = vals[order]
    vecs = vecs[:, order]

    # orthonormalize under the h^3 inner product
    w = np.sqrt(grid.cell_volume)
    q, _ = np.linalg.qr(vecs * w)
    vecs = q / w

    # Rayleigh-Ritz in the orthonormal basis to restore eigen structure
    Hv = np.stack([A.matvec(vecs[:, j]) for j in range(vecs.shape[1])], axis=1)
    small = (vecs * grid.cell_volume).T @ Hv
    small = 0.5 * (small + small.T)
    s_vals, s_vecs = np.linalg.eigh(small)
    vecs = vecs @ s_vecs
    vals = s_vals

    # residual check on the reported pairs
    best = 0.0
    pairs = []
    for j in range(count):
        psi = vecs[:, j]
        r = A.matvec(psi) - vals[j] * psi
        rn = float(np.sqrt(np.sum(r * r) * grid.cell_volume))
        best = max(best, rn)
        pairs.append(
            (float(vals[j]), ScalarField(grid=grid, values=psi.reshape(grid.shape)))
        )
    if best > tol * max(1.0, float(np.max(np.abs(vals[:count])))):
        raise EigenError("eigensolver did not reach residual tolerance", best)
    return pairs
