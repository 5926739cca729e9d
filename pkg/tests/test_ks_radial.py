import numpy as np
import pytest

from fermisurf.ks_common import aufbau_occupations
from fermisurf.ks_radial import scf_atom
from fermisurf.xc import make_functional


@pytest.fixture(scope="module")
def lda():
    return make_functional("lda_exchange")


class TestAufbau:
    def test_fills_lowest_first(self):
        occ = aufbau_occupations(np.array([-2.0, -1.0, -0.5]),
                                 np.array([2.0, 2.0, 2.0]), 3.0)
        assert np.allclose(occ, [2.0, 1.0, 0.0])

    def test_degenerate_levels_share_by_capacity(self):
        occ = aufbau_occupations(np.array([-1.0, -1.0 + 1e-9, -0.2]),
                                 np.array([2.0, 6.0, 2.0]), 4.0)
        assert occ[0] == pytest.approx(1.0)
        assert occ[1] == pytest.approx(3.0)

    def test_occupations_within_bounds(self):
        occ = aufbau_occupations(np.array([-3.0, -2.0, -1.0]),
                                 np.array([2.0, 2.0, 2.0]), 5.5)
        assert np.all(occ >= 0.0) and np.all(occ <= 2.0)
        assert occ.sum() == pytest.approx(5.5)


class TestAtoms:
    def test_neon_shell_structure(self, lda):
        state = scf_atom(10.0, 10.0, lda)
        occupied = state.occupations[state.occupations > 1e-8]
        assert np.allclose(sorted(occupied), [2.0, 2.0, 6.0])
        assert state.energy["total"] < -100.0

    def test_empty_atom(self, lda):
        state = scf_atom(2.0, 0.0, lda)
        assert state.energy["total"] == 0.0
        assert state.n_electrons == 0.0

    def test_energy_monotone_in_electron_number(self, lda):
        e_partial = scf_atom(2.0, 1.5, lda).energy["total"]
        e_full = scf_atom(2.0, 2.0, lda).energy["total"]
        assert e_full <= e_partial

    def test_lda_below_rhf(self, lda):
        # adding a negative exchange term lowers the total energy
        rhf = make_functional("zero")
        e_rhf = scf_atom(2.0, 2.0, rhf).energy["total"]
        e_lda = scf_atom(2.0, 2.0, lda).energy["total"]
        assert e_lda < e_rhf

    def test_energy_decomposition_identity(self, lda):
        state = scf_atom(2.0, 2.0, lda)
        e = state.energy
        total = e["kinetic"] + e["external"] + e["hartree"] - e["xc"]
        assert abs(total - e["total"]) <= 1e-10 * max(1.0, abs(e["total"]))

    def test_helium_lda_reference_value(self, lda):
        # exchange-only LDA helium ground state is near -2.72 Hartree
        state = scf_atom(2.0, 2.0, lda)
        assert state.energy["total"] == pytest.approx(-2.7233, abs=5e-3)

    def test_fractional_occupation_at_fermi_level(self, lda):
        state = scf_atom(3.0, 3.0, lda)  # 1s^2 2s^1
        occ = np.sort(state.occupations[state.occupations > 1e-8])
        assert occ[0] == pytest.approx(1.0, abs=1e-6)
        assert occ[-1] == pytest.approx(2.0, abs=1e-6)

    def test_rejects_overcharged(self, lda):
        with pytest.raises(ValueError):
            scf_atom(2.0, 3.0, lda)
