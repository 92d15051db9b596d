"""Closed forms for a pair of counter-propagating Gaussian wave packets.

The family describes two equal-mass free particles prepared either as a
product of single-particle Gaussian packets (width parameter ``a``, momentum
centers ``+k_c`` and ``-k_c``) or as an EPR-like superposition of such
products whose total momentum is concentrated around zero with a width set
by a second parameter ``b``.  Finite ``b`` entangles the pair; ``b = inf``
is the exactly separable product state.  All of the ``b`` dependence enters
through the combinations ``f_n = 1 + n a^2/b^2`` (n = 1, 2), which reduce to
1 exactly at ``b = inf``, so no special casing of the separable limit is
needed anywhere.

Everything here is analytic: dispersions, marginal densities and the t = 0
two-particle amplitude.  The :mod:`localent.oracle` module re-derives the
same quantities by brute-force quadrature on a spectral grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "PhysicalConstants",
    "PairParams",
    "GaussianDensity",
    "entanglement_factor",
    "spreading_factor",
    "drift_velocity",
    "position_dispersion",
    "momentum_dispersion",
    "marginal_position",
    "marginal_momentum",
    "initial_amplitude",
]


@dataclass(frozen=True)
class PhysicalConstants:
    """Planck constant and particle mass (both particles share the mass)."""

    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self) -> None:
        if not self.hbar > 0:
            raise DomainError(f"hbar must be positive, got {self.hbar}")
        if not self.mass > 0:
            raise DomainError(f"mass must be positive, got {self.mass}")


@dataclass(frozen=True)
class PairParams:
    """Parameters selecting one member of the two-particle Gaussian family.

    a
        Width parameter of the single-particle packets (> 0).
    b
        Width of the momentum anticorrelation (> 0).  ``math.inf`` selects
        the exactly separable product state; smaller ``b`` means stronger
        entanglement.
    k_c
        Packet center wavenumber: particle 1 moves with ``+k_c``,
        particle 2 with ``-k_c``.
    """

    a: float
    b: float
    k_c: float = 0.0
    constants: PhysicalConstants = PhysicalConstants()

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise DomainError(f"width parameter a must be positive, got {self.a}")
        if not self.b > 0:
            raise DomainError(
                f"anticorrelation width b must be positive (or math.inf), got {self.b}"
            )

    def is_separable(self) -> bool:
        return math.isinf(self.b)


@dataclass(frozen=True)
class GaussianDensity:
    """Normalized one-dimensional normal density with mean and standard deviation."""

    mean: float
    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        z = (x - self.mean) / self.sigma
        return np.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2.0 * math.pi))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.normal(self.mean, self.sigma, size=n)


def entanglement_factor(n: int, params: PairParams) -> float:
    """The combination 1 + n a^2/b^2 for n in {1, 2}; exactly 1 when b = inf."""
    if n not in (1, 2):
        raise DomainError(f"entanglement factor index must be 1 or 2, got {n}")
    r = params.a / params.b
    return 1.0 + n * r * r


def spreading_factor(t: float, params: PairParams) -> float:
    """Dimensionless free-spreading term 4 hbar^2 t^2 / (m^2 a^4) at time t >= 0."""
    if t < 0:
        raise DomainError(f"time must be nonnegative, got {t}")
    c = params.constants
    q = 2.0 * c.hbar * t / (c.mass * params.a * params.a)
    return q * q


def drift_velocity(params: PairParams) -> float:
    """Group velocity hbar k_c / m of particle 1's packet center."""
    c = params.constants
    return c.hbar * params.k_c / c.mass


def position_dispersion(t: float, params: PairParams) -> float:
    """Standard deviation of particle 1's position at time t.

    Separable pairs spread as (a/2) sqrt(1 + F(t)); entangled pairs start
    narrower by sqrt(f1/f2) and spread faster by the factor f2 inside the
    square root.  The two expressions coincide exactly at b = inf.
    """
    f1 = entanglement_factor(1, params)
    f2 = entanglement_factor(2, params)
    return 0.5 * params.a * math.sqrt((f1 / f2) * (1.0 + f2 * spreading_factor(t, params)))


def momentum_dispersion(params: PairParams) -> float:
    """Standard deviation of particle 1's momentum; constant under free evolution."""
    f1 = entanglement_factor(1, params)
    return params.constants.hbar * math.sqrt(f1) / params.a


def marginal_position(t: float, params: PairParams) -> GaussianDensity:
    """Position-space marginal density of particle 1 at time t.

    The marginal stays Gaussian for all t because free evolution preserves
    Gaussianity; mean drifts with the group velocity, width follows
    :func:`position_dispersion`.  (The spectral-grid oracle validates this
    for the entangled branch, where only the t = 0 form is obvious.)
    """
    return GaussianDensity(drift_velocity(params) * t, position_dispersion(t, params))


def marginal_momentum(params: PairParams) -> GaussianDensity:
    """Momentum-representation marginal of particle 1; time independent.

    Centered at the packet wavenumber ``k_c`` with width equal to
    :func:`momentum_dispersion` (center and width coincide numerically with
    the wavenumber-space density in the hbar = 1 units used by every
    consumer in this package).
    """
    return GaussianDensity(params.k_c, momentum_dispersion(params))


def initial_amplitude(x1, x2, params: PairParams):
    """Two-particle amplitude at t = 0, vectorized over positions.

    The squared modulus integrates to 1 over the plane.  For finite b the
    exponent carries the cross term (2/b^2) x1 x2, which is what makes the
    state non-separable; at b = inf the cross term vanishes and the
    amplitude factorizes into a product of single-particle packets.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    a2 = params.a * params.a
    f1 = entanglement_factor(1, params)
    f2 = entanglement_factor(2, params)
    cross = 2.0 / (params.b * params.b)  # exactly 0.0 in the separable limit
    prefactor = math.sqrt(2.0 / (math.pi * a2)) * f2**0.25
    phase = np.exp(1j * params.k_c * (x1 - x2))
    envelope = np.exp(-(f1 / a2) * (x1 * x1 + x2 * x2) + cross * x1 * x2)
    return prefactor * phase * envelope
