"""Physical parameters, zero-point units, and polynomial potentials.

Internally everything is expressed in zero-point units: position u = x/x_zpf,
momentum v = p/p_zpf, time tau = Omega*t.  In these coordinates the effective
constants are m = 1, Omega = 1 and hbar = 2 (because x_zpf * p_zpf = hbar/2),
so the internal classical equations of motion read

    du/dtau = v,        dv/dtau = -2 U'(u),

where U(u) = V(x_zpf*u) / (hbar*Omega) is the dimensionless potential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

#: Effective Planck constant of the internal (u, v) coordinates.
HBAR_INTERNAL = 2.0


@dataclass(frozen=True)
class PhysicalParams:
    """Mass, reference frequency and noise rates of the particle.

    ``big_gamma`` is the displacement noise rate.  It can either be given
    directly or composed from thermal inputs via :meth:`from_thermal_bath`.
    """

    mass: float
    omega: float
    gamma: float = 0.0
    big_gamma: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        if self.mass <= 0:
            raise ParameterError(f"mass must be positive, got {self.mass}")
        if self.omega <= 0:
            raise ParameterError(f"reference frequency must be positive, got {self.omega}")
        if self.gamma < 0:
            raise ParameterError(f"damping rate must be non-negative, got {self.gamma}")
        if self.big_gamma < 0:
            raise ParameterError(f"noise rate must be non-negative, got {self.big_gamma}")
        if self.hbar <= 0:
            raise ParameterError("hbar must be positive")

    @classmethod
    def from_thermal_bath(cls, mass, omega, gamma, temperature, k_boltzmann,
                          white_force_rate=0.0, hbar=1.0):
        """Compose the displacement noise rate from a thermal bath.

        big_gamma = gamma * k_B * T / (hbar * Omega) + Gamma_1
        """
        big_gamma = gamma * k_boltzmann * temperature / (hbar * omega) + white_force_rate
        return cls(mass=mass, omega=omega, gamma=gamma, big_gamma=big_gamma, hbar=hbar)


@dataclass(frozen=True)
class UnitSystem:
    """Zero-point scales derived from (m, Omega, hbar)."""

    x_zpf: float
    p_zpf: float
    t_unit: float
    hbar: float

    @classmethod
    def from_params(cls, params: PhysicalParams) -> "UnitSystem":
        x_zpf = math.sqrt(params.hbar / (2.0 * params.mass * params.omega))
        p_zpf = params.hbar / (2.0 * x_zpf)
        return cls(x_zpf=x_zpf, p_zpf=p_zpf, t_unit=1.0 / params.omega, hbar=params.hbar)


class Potential:
    """Polynomial potential V(x) = hbar*Omega * sum_k c_k (x/x_zpf)^k, k = 1..4.

    Coefficients are stored exactly so every derivative used by the
    variational hierarchy is exact.  Degree is capped at four: the fifth and
    higher derivatives vanish identically.
    """

    def __init__(self, c1=0.0, c2=0.0, c3=0.0, c4=0.0):
        self.c = np.array([float(c1), float(c2), float(c3), float(c4)])

    @classmethod
    def harmonic(cls) -> "Potential":
        """Reference harmonic well m*Omega^2*x^2/2, i.e. c2 = 1/4."""
        return cls(c2=0.25)

    @classmethod
    def quartic(cls, eta: float) -> "Potential":
        """Pure quartic well of strength eta: c4 = 1/(4*eta^4).

        The classical turning point of the harmonic ground state sits at
        x = eta * x_zpf.
        """
        if eta <= 0:
            raise ParameterError(f"quartic strength must be positive, got {eta}")
        return cls(c4=1.0 / (4.0 * eta**4))

    @property
    def degree(self) -> int:
        nz = np.nonzero(self.c)[0]
        return int(nz[-1] + 1) if nz.size else 0

    @property
    def is_quadratic(self) -> bool:
        return self.c[2] == 0.0 and self.c[3] == 0.0

    def value(self, u):
        """U(u) in units of hbar*Omega."""
        c1, c2, c3, c4 = self.c
        return u * (c1 + u * (c2 + u * (c3 + u * c4)))

    def derivs(self, u):
        """First through fourth derivative of U(u), units hbar*Omega/x_zpf^k.

        Returns (U', U'', U''', U''''); all higher derivatives are zero.
        """
        c1, c2, c3, c4 = self.c
        u = np.asarray(u, dtype=np.float64)
        d1 = c1 + u * (2.0 * c2 + u * (3.0 * c3 + u * 4.0 * c4))
        d2 = 2.0 * c2 + u * (6.0 * c3 + u * 12.0 * c4)
        d3 = 6.0 * c3 + 24.0 * c4 * u
        d4 = 24.0 * c4 * np.ones_like(u)
        return d1, d2, d3, d4

    def force_internal(self, u):
        """Internal force -W'(u) with W = 2U (the hbar = 2 unit system)."""
        return -2.0 * self.derivs(u)[0]

    def __eq__(self, other):
        if not isinstance(other, Potential):
            return NotImplemented
        return bool(np.array_equal(self.c, other.c))

    def __repr__(self):
        return f"Potential(c1={self.c[0]!r}, c2={self.c[1]!r}, c3={self.c[2]!r}, c4={self.c[3]!r})"


def potential_derivs(potential: Potential, u):
    """Exact polynomial derivatives (U', U'', U''', U'''') at u."""
    return potential.derivs(u)


@dataclass(frozen=True)
class DimensionlessParams:
    """Everything the solver needs, in internal (u, v, tau) units.

    gamma and big_gamma are the rates divided by Omega.  ``classical``
    switches off the cubic-derivative quantum term (the hbar -> 0 limit).
    """

    gamma: float
    big_gamma: float
    potential: Potential
    units: UnitSystem = None
    classical: bool = False

    def __post_init__(self):
        if self.gamma < 0 or self.big_gamma < 0:
            raise ParameterError("rates must be non-negative")

    def redimensionalize(self, mass, omega, hbar=1.0) -> PhysicalParams:
        """Inverse of :func:`nondimensionalize` for a given (m, Omega, hbar)."""
        return PhysicalParams(mass=mass, omega=omega, gamma=self.gamma * omega,
                              big_gamma=self.big_gamma * omega, hbar=hbar)


def nondimensionalize(params: PhysicalParams, potential: Potential,
                      classical: bool = False) -> DimensionlessParams:
    """Strip dimensions: rates in units of Omega, potential already in zpf units."""
    units = UnitSystem.from_params(params)
    return DimensionlessParams(
        gamma=params.gamma / params.omega,
        big_gamma=params.big_gamma / params.omega,
        potential=potential,
        units=units,
        classical=classical,
    )
