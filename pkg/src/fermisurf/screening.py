"""Screened-potential comparison between the KS and TF densities.

Phi_r = V_R - (rho 1_{A_r^c}) * |x|^-1 is evaluated on the spheres
dB(R_j, r) through spherically averaged per-nucleus density profiles:
the charge inside each ball acts through Newton's theorem, so the sphere
values need only the cumulative charges q_j(r). Using one sampling
pipeline for both densities makes their difference meaningful even for
r below the grid spacing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fitting import PowerLawFit, powerlaw_fit
from .grids import ScalarField, fibonacci_sphere, trilinear_sample
from .tf_molecule import NuclearConfiguration


@dataclass(frozen=True)
class NucleusProfile:
    """Spherically averaged density and cumulative charge around a nucleus."""

    center: np.ndarray
    s: np.ndarray  # radii
    rho_bar: np.ndarray
    q_cum: np.ndarray  # charge inside radius s

    def charge_within(self, r: float) -> float:
        return float(np.interp(r, self.s, self.q_cum))


def nucleus_profile(rho: ScalarField, center, s_max: float, n_s: int = 240,
                    n_sphere: int = 256, s_min: float = 1e-3) -> NucleusProfile:
    """Average a 3D density over spheres around `center` (Fibonacci lattice)."""
    center = np.asarray(center, dtype=float)
    s = np.geomspace(s_min, s_max, n_s)
    rho_bar = np.empty(n_s)
    for k, sk in enumerate(s):
        pts = fibonacci_sphere(center, sk, n_sphere)
        rho_bar[k] = float(np.mean(trilinear_sample(rho, pts)))
    shell = 4.0 * np.pi * s**2 * rho_bar
    q = np.zeros(n_s)
    # trapezoid cumulative; the first shell is extended to s = 0
    q[0] = shell[0] * s[0] / 3.0
    q[1:] = q[0] + np.cumsum(0.5 * (shell[1:] + shell[:-1]) * np.diff(s))
    return NucleusProfile(center=center, s=s, rho_bar=rho_bar, q_cum=q)


@dataclass(frozen=True)
class ScreenedProfile:
    """Sphere sups of the screened potentials over a window of radii."""

    r_values: tuple
    sup_diff: tuple  # sup over all spheres of |Phi_r^TF - Phi_r|
    sup_phi: tuple  # sup of |Phi_r| (KS density)
    sup_phi_tf: tuple
    per_nucleus_diff: tuple  # one tuple per r
    membership: tuple  # (r, beta, eps) records for the comparison set
    fit: PowerLawFit | None


def screened_compare(
    config: NuclearConfiguration,
    rho_ks: ScalarField,
    rho_tf: ScalarField,
    r_list,
    eps: float = 0.5,
    n_sphere: int = 256,
) -> ScreenedProfile:
    """Sphere sups of Phi_r, Phi_r^TF and their difference over r_list.

    Both densities go through the identical spherical-average pipeline.
    r values must lie in (0, R_min/4] (the working window) for K >= 2.
    """
    rs = sorted(float(r) for r in r_list)
    if config.K >= 2 and rs[-1] > config.R_min / 4.0 + 1e-12:
        raise ValueError("screening radii must be <= R_min/4")
    if rs[0] <= 0.0:
        raise ValueError("screening radii must be positive")

    s_max = rs[-1] * 1.05
    prof_ks = [
        nucleus_profile(rho_ks, p, s_max, n_sphere=n_sphere)
        for p in config.positions
    ]
    prof_tf = [
        nucleus_profile(rho_tf, p, s_max, n_sphere=n_sphere)
        for p in config.positions
    ]

    sup_diff, sup_phi, sup_phi_tf, per_nuc = [], [], [], []
    for r in rs:
        q_ks = np.array([p.charge_within(r) for p in prof_ks])
        q_tf = np.array([p.charge_within(r) for p in prof_tf])
        diffs, phis, phis_tf = [], [], []
        for j in range(config.K):
            pts = fibonacci_sphere(config.positions[j], r, n_sphere)
            d = np.stack(
                [np.linalg.norm(pts - p, axis=1) for p in config.positions]
            )  # (K, n_sphere); row j is identically r
            d = np.maximum(d, 1e-12)
            phi_ks = ((config.charges - q_ks)[:, None] / d).sum(axis=0)
            phi_tf = ((config.charges - q_tf)[:, None] / d).sum(axis=0)
            diffs.append(float(np.max(np.abs(phi_tf - phi_ks))))
            phis.append(float(np.max(np.abs(phi_ks))))
            phis_tf.append(float(np.max(np.abs(phi_tf))))
        per_nuc.append(tuple(diffs))
        sup_diff.append(max(diffs))
        sup_phi.append(max(phis))
        sup_phi_tf.append(max(phis_tf))

    fit = None
    positive = [(r, dv) for r, dv in zip(rs, sup_diff) if dv > 0.0]
    if len(positive) >= 4:
        fit = powerlaw_fit(
            np.array([p[0] for p in positive]), np.array([p[1] for p in positive])
        )
    membership = tuple(
        (r, float(dv * r ** (4.0 - eps)), eps) for r, dv in zip(rs, sup_diff)
    )
    return ScreenedProfile(
        r_values=tuple(rs),
        sup_diff=tuple(sup_diff),
        sup_phi=tuple(sup_phi),
        sup_phi_tf=tuple(sup_phi_tf),
        per_nucleus_diff=tuple(per_nuc),
        membership=membership,
        fit=fit,
    )
