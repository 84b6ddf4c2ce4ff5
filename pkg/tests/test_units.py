import numpy as np
import pytest

from qxpanse import (DimensionlessParams, ParameterError, PhysicalParams,
                     Potential, UnitSystem, nondimensionalize, potential_derivs)


def test_zero_point_units_product():
    params = PhysicalParams(mass=3.7e-18, omega=2 * np.pi * 1e5, hbar=1.0545718e-34)
    units = UnitSystem.from_params(params)
    assert units.x_zpf * units.p_zpf == pytest.approx(params.hbar / 2, rel=1e-14)


def test_thermal_composition_exact():
    p = PhysicalParams.from_thermal_bath(mass=1.0, omega=2.0, gamma=0.3,
                                         temperature=5.0, k_boltzmann=1.4,
                                         white_force_rate=0.7, hbar=1.0)
    assert p.big_gamma == 0.3 * 1.4 * 5.0 / (1.0 * 2.0) + 0.7


def test_parameter_validation():
    with pytest.raises(ParameterError):
        PhysicalParams(mass=-1.0, omega=1.0)
    with pytest.raises(ParameterError):
        PhysicalParams(mass=1.0, omega=0.0)
    with pytest.raises(ParameterError):
        PhysicalParams(mass=1.0, omega=1.0, gamma=-0.1)


def test_quartic_preset_coefficient():
    pot = Potential.quartic(1e2)
    assert pot.c[3] == 2.5e-9
    assert pot.degree == 4
    # harmonic preset gives V(u) = u^2/4 in units of hbar*Omega, i.e. m w^2 x^2/2
    assert Potential.harmonic().value(2.0) == pytest.approx(1.0)


def test_noise_rate_passthrough():
    params = PhysicalParams(mass=1.0, omega=1.0, gamma=0.0, big_gamma=1e-5)
    dp = nondimensionalize(params, Potential.quartic(100.0))
    assert dp.big_gamma == pytest.approx(1e-5, rel=1e-14)


def test_nondimensional_round_trip():
    params = PhysicalParams(mass=2.5e-20, omega=7.3e4, gamma=12.0,
                            big_gamma=3.4e-2, hbar=1.0545718e-34)
    dp = nondimensionalize(params, Potential.harmonic())
    back = dp.redimensionalize(params.mass, params.omega, params.hbar)
    assert back.gamma == pytest.approx(params.gamma, rel=1e-14)
    assert back.big_gamma == pytest.approx(params.big_gamma, rel=1e-14)


def test_quartic_derivatives_symbolic():
    # d3V/du3 of u^4/(4 eta^4) is 6u/eta^4; all values in hbar*Omega units
    eta = 1.0
    pot = Potential.quartic(eta)
    d1, d2, d3, d4 = potential_derivs(pot, 1.0)
    assert d3 == pytest.approx(6.0)
    assert d4 == pytest.approx(6.0)
    d1, d2, d3, d4 = potential_derivs(pot, 0.0)
    assert (d1, d2, d3) == (0.0, 0.0, 0.0)
    assert d4 == pytest.approx(6.0)


def test_quadratic_has_no_cubic_derivatives():
    rng = np.random.default_rng(0)
    pot = Potential(c1=0.3, c2=0.25)
    u = rng.normal(scale=5.0, size=1000)
    _, _, d3, d4 = potential_derivs(pot, u)
    assert np.all(d3 == 0.0)
    assert np.all(d4 == 0.0)
    assert pot.is_quadratic


def test_internal_force_convention():
    # du/dtau = v, dv/dtau = -2 U'(u): harmonic preset gives unit frequency
    pot = Potential.harmonic()
    assert pot.force_internal(1.0) == pytest.approx(-1.0)


def test_classical_flag():
    dp = DimensionlessParams(gamma=0.0, big_gamma=0.0,
                             potential=Potential.quartic(10.0), classical=True)
    assert dp.classical
