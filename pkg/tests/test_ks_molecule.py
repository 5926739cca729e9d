import numpy as np
import pytest

from fermisurf.bo import GridPolicy
from fermisurf.ks_molecule import scf_molecule
from fermisurf.ks_radial import scf_atom
from fermisurf.tf_molecule import NuclearConfiguration
from fermisurf.xc import make_functional


@pytest.fixture(scope="module")
def lda():
    return make_functional("lda_exchange")


@pytest.fixture(scope="module")
def hydrogen_state(lda):
    cfg = NuclearConfiguration(positions=[[0.0, 0.0, 0.0]], charges=[1.0])
    grid = GridPolicy(spacing=0.25, margin_factor=7.0).build(cfg)
    return scf_molecule(cfg, 1.0, lda, grid)


@pytest.fixture(scope="module")
def h2_state(lda):
    # separation is a multiple of the spacing so both nuclei sit on nodes
    cfg = NuclearConfiguration(positions=[[0.0, 0.0, 0.0], [1.5, 0.0, 0.0]],
                               charges=[1.0, 1.0])
    grid = GridPolicy(spacing=0.3).build(cfg)
    return scf_molecule(cfg, 2.0, lda, grid), cfg, grid


class TestHydrogen:
    def test_matches_radial_solver(self, hydrogen_state, lda):
        radial = scf_atom(1.0, 1.0, lda)
        gap = abs(hydrogen_state.energy["total"] - radial.energy["total"])
        assert gap < 1e-2

    def test_orbital_orthonormality(self, hydrogen_state):
        vol = hydrogen_state.rho0.grid.cell_volume
        orbs = [o.values.ravel() for o in hydrogen_state.orbitals]
        for i, a in enumerate(orbs):
            for j, b in enumerate(orbs):
                ov = float(np.dot(a, b)) * vol
                assert ov == pytest.approx(1.0 if i == j else 0.0, abs=1e-8)

    def test_energy_decomposition_identity(self, hydrogen_state):
        e = hydrogen_state.energy
        total = e["kinetic"] + e["external"] + e["hartree"] - e["xc"]
        assert abs(total - e["total"]) <= 1e-10 * max(1.0, abs(e["total"]))

    def test_density_nonnegative_and_normalized(self, hydrogen_state):
        rho = hydrogen_state.rho0
        assert np.all(rho.values >= 0.0)
        assert rho.integrate() == pytest.approx(1.0, rel=1e-6)


class TestDiatomic:
    def test_homonuclear_density_mirror_symmetric(self, lda):
        # grid built symmetric about the bond midplane, nuclei on nodes
        from fermisurf.grids import Grid3D

        cfg = NuclearConfiguration(
            positions=[[-0.75, 0.0, 0.0], [0.75, 0.0, 0.0]],
            charges=[1.0, 1.0],
        )
        grid = Grid3D.cube((0.0, 0.0, 0.0), 6.75, 55)
        state = scf_molecule(cfg, 2.0, lda, grid)
        vals = state.rho0.values
        assert np.allclose(vals, vals[::-1], atol=1e-7 * vals.max())
        assert np.allclose(vals, vals[:, ::-1, :], atol=1e-7 * vals.max())

    def test_binding_energy_negative(self, h2_state, lda):
        state, cfg, grid = h2_state
        from fermisurf.bo import bo_ks

        sample = bo_ks(cfg, lda, GridPolicy(spacing=0.3))
        assert sample.D < 0.0  # LDA hydrogen pair binds

    def test_stationarity_residuals_reported(self, h2_state):
        state, _, _ = h2_state
        res = state.meta["stationarity"]
        assert len(res) >= 1
        assert max(res) < 1e-3

    def test_occupations_respect_bound(self, h2_state):
        state, _, _ = h2_state
        assert np.all(state.occupations <= state.q + 1e-12)
        assert state.n_electrons == pytest.approx(2.0, abs=1e-9)


class TestContracts:
    def test_rejects_n_above_z(self, lda):
        cfg = NuclearConfiguration(positions=[[0.0, 0.0, 0.0]], charges=[1.0])
        grid = GridPolicy(spacing=0.4).build(cfg)
        with pytest.raises(ValueError):
            scf_molecule(cfg, 2.0, lda, grid)
