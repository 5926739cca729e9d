import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fermisurf.grids import RadialGrid, ScalarField
from fermisurf.xc import (
    LDA_EXCHANGE_COEF,
    LIEB_OXFORD_COEF,
    XCFunctional,
    XCValidationError,
    exchange_energy,
    make_functional,
)


class TestCoefficients:
    def test_dirac_exchange_coefficient(self):
        assert LDA_EXCHANGE_COEF == pytest.approx(
            0.75 * (3.0 / math.pi) ** (1.0 / 3.0), rel=1e-15
        )

    def test_lieb_oxford_coefficient(self):
        assert LIEB_OXFORD_COEF == 1.45

    def test_named_kinds(self):
        assert make_functional("lda_exchange").beta == pytest.approx(1.0 / 3.0)
        assert make_functional("zero").evaluate(3.0) == 0.0
        with pytest.raises(XCValidationError):
            make_functional("nope")


class TestValidation:
    def test_negative_coefficient_rejected_naming_clause(self):
        with pytest.raises(XCValidationError, match="g' >= 0"):
            XCFunctional("bad", -1.0, 1.0 / 3.0)

    def test_strict_rejects_large_beta_plus(self):
        with pytest.raises(XCValidationError, match="beta_plus"):
            make_functional("power", c=1.0, beta=0.5, strict_mode=True)

    def test_strict_rejects_vanishing_g(self):
        with pytest.raises(XCValidationError, match="vanishes"):
            make_functional("zero", strict_mode=True)

    def test_strict_accepts_lda_exchange(self):
        xc = make_functional("lda_exchange", strict_mode=True)
        assert xc.alpha == pytest.approx(4.0 / 3.0)
        assert 1.0 <= xc.alpha < 1.5

    def test_nonstrict_accepts_zero(self):
        make_functional("zero", strict_mode=False)


class TestEvaluation:
    def test_g_and_derivative_consistent(self):
        xc = make_functional("lda_exchange")
        t = np.linspace(0.5, 2.0, 9)
        eps = 1e-6
        fd = (xc.evaluate(t + eps) - xc.evaluate(t - eps)) / (2 * eps)
        assert np.allclose(fd, xc.derivative(t), rtol=1e-6)

    def test_normalized_envelope_below_one(self):
        xc = make_functional("lieb_oxford")
        norm, factor = xc.normalized()
        assert norm.derivative_envelope_sup() <= 1.0 + 1e-12
        assert factor >= 1.0
        assert norm.coefficient * factor == pytest.approx(xc.coefficient)

    def test_exchange_energy_hydrogenic_oracle(self):
        # rho = e^{-2r}/pi (hydrogen ground state):
        # int c rho^{4/3} = c pi^{-4/3} * 4 pi int r^2 e^{-8r/3} dr
        #                 = c pi^{-1/3} * 8 (3/8)^3
        grid = RadialGrid.logarithmic(1e-7, 40.0, 4001)
        rho = ScalarField(grid=grid, values=np.exp(-2.0 * grid.nodes) / math.pi,
                          kind="density")
        xc = make_functional("lda_exchange")
        exact = (LDA_EXCHANGE_COEF * math.pi ** (-1.0 / 3.0)
                 * 8.0 * (3.0 / 8.0) ** 3)
        assert exchange_energy(rho, xc) == pytest.approx(exact, rel=1e-8)

    def test_exchange_energy_rejects_negative_density(self):
        grid = RadialGrid.logarithmic(1e-4, 5.0, 51)
        field = ScalarField(grid=grid, values=np.ones(51))
        object.__setattr__(field, "values", -np.ones(51))
        with pytest.raises(ValueError):
            exchange_energy(field, make_functional("lda_exchange"))


@given(c=st.floats(0.01, 10.0), beta=st.floats(0.05, 0.39))
@settings(max_examples=25, deadline=None)
def test_property_valid_power_laws_accepted_strict(c, beta):
    xc = make_functional("power", c=c, beta=beta, strict_mode=True)
    t = np.logspace(-6, 6, 25)
    assert np.all(xc.evaluate(t) >= 0.0)
    assert np.all(xc.derivative(t) >= 0.0)
    assert xc.evaluate(0.0) == 0.0
