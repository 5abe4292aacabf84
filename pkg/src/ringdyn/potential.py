"""Potential and field of a fixed homogeneous circle in 3-space.

The circle has radius rho, lies in the z = 0 plane centered at the origin,
and carries linear mass density lam (total mass M = 2 pi lam rho). For a
point P, the extreme distances to the circle are

    d = sqrt((s - rho)^2 + z^2),   D = sqrt((s + rho)^2 + z^2),

with s the cylindrical radius of P, and the potential is the closed form

    V(P) = -M / sigma(d, D)

with sigma the arithmetic-geometric mean. The gradient follows analytically
from the chi series, so no quadrature is needed anywhere in this module.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._kernels import agm_val, chi_val, grad_meridional
from .errors import DomainError, OnCircleError

__all__ = [
    "Circle",
    "DistancePair",
    "dist_extremes",
    "potential",
    "gradient",
    "agm_potential",
    "agm_potential_partials",
    "rescale_solution",
]


@dataclass(frozen=True)
class Circle:
    """Source circle: radius ``rho`` and linear density ``lam``.

    The default instance is the normalized configuration rho = 1,
    lam = 1/(2 pi), i.e. total mass 1.
    """

    rho: float = 1.0
    lam: float = 1.0 / (2.0 * math.pi)

    def __post_init__(self):
        if not (math.isfinite(self.rho) and self.rho > 0.0):
            raise DomainError(f"circle radius must be positive, got {self.rho}")
        if not (math.isfinite(self.lam) and self.lam > 0.0):
            raise DomainError(f"circle density must be positive, got {self.lam}")

    @property
    def mass(self):
        return 2.0 * math.pi * self.lam * self.rho

    @classmethod
    def with_mass(cls, rho=1.0, mass=1.0):
        """Construct from total mass instead of density."""
        if not (math.isfinite(mass) and mass > 0.0):
            raise DomainError(f"circle mass must be positive, got {mass}")
        return cls(rho=rho, lam=mass / (2.0 * math.pi * rho))


class DistancePair(NamedTuple):
    d: float  # distance to the nearest circle point
    D: float  # distance to the farthest circle point


def _as_point(p):
    a = np.asarray(p, dtype=float)
    if a.shape != (3,):
        raise DomainError(f"expected a 3-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"point has non-finite components: {a}")
    return a


def dist_extremes(p, circle=Circle()):
    """Nearest and farthest distance from p to the circle.

    Satisfies D^2 - d^2 = 4 rho s with s the cylindrical radius of p, and
    d = D exactly on the symmetry axis.
    """
    a = _as_point(p)
    s = math.hypot(a[0], a[1])
    d = math.hypot(s - circle.rho, a[2])
    D = math.hypot(s + circle.rho, a[2])
    return DistancePair(d=d, D=D)


def potential(p, circle=Circle()):
    """Potential V(p) = -M / agm(d, D); strictly negative off the circle.

    Raises
    ------
    OnCircleError
        If p lies on the circle (d = 0), where V diverges.
    """
    d, D = dist_extremes(p, circle)
    if d == 0.0:
        raise OnCircleError(f"potential is singular on the circle: {p}")
    return -circle.mass / agm_val(d, D)


def gradient(p, circle=Circle()):
    """Gradient of V at p (the force on a unit mass is its negative).

    Off the symmetry axis the chi chain rule through (d, D) is used; on the
    axis (cylindrical radius below 1e-12) the closed form
    (0, 0, M z / (rho^2 + z^2)^{3/2}) applies.
    """
    a = _as_point(p)
    s2 = a[0] * a[0] + a[1] * a[1]
    z = a[2]
    rho, M = circle.rho, circle.mass
    if s2 < 1e-24:
        R2 = rho * rho + z * z
        return np.array([0.0, 0.0, M * z / (R2 * math.sqrt(R2))])
    s = math.sqrt(s2)
    if z == 0.0 and s == rho:
        raise OnCircleError(f"gradient is singular on the circle: {p}")
    gs, gz = grad_meridional(s, z, rho, M)
    return np.array([gs * a[0] / s, gs * a[1] / s, gz])


def agm_potential(d, D, mass=1.0):
    """-mass/agm(d, D) as a function of the extreme distances directly."""
    if d <= 0.0 or D <= 0.0:
        raise DomainError(f"distances must be positive, got ({d}, {D})")
    return -mass / agm_val(float(d), float(D))


def agm_potential_partials(d, D, mass=1.0):
    """(dV/dd, dV/dD) for V = -mass/agm(d, D), D >= d > 0, via the chi series."""
    d = float(d)
    D = float(D)
    if d <= 0.0 or D < d:
        raise DomainError(f"requires D >= d > 0, got ({d}, {D})")
    V = -mass / agm_val(d, D)
    c = chi_val(D, d)
    return (-(c / d) * V, (c - 1.0) / D * V)


def rescale_solution(times, positions, velocities, rho_from, mass_from, rho_to, mass_to):
    """Map a solution of one circle problem onto another by the scaling law.

    If r(t) solves the (rho, M) problem, then

        s(t) = (zeta/rho) * r(sqrt(N rho^3 / (M zeta^3)) * t)

    solves the (zeta, N) problem. Given samples (times, positions,
    velocities) of r, returns the corresponding samples of s: times divide by
    tau = sqrt(N rho^3 / (M zeta^3)), positions scale by zeta/rho, and
    velocities scale by (zeta/rho) * tau.
    """
    for name, v in (("rho_from", rho_from), ("mass_from", mass_from),
                    ("rho_to", rho_to), ("mass_to", mass_to)):
        if not (math.isfinite(v) and v > 0.0):
            raise DomainError(f"{name} must be positive, got {v}")
    t = np.asarray(times, dtype=float)
    pos = np.asarray(positions, dtype=float)
    vel = np.asarray(velocities, dtype=float)
    tau = math.sqrt(mass_to * rho_from**3 / (mass_from * rho_to**3))
    geo = rho_to / rho_from
    return t / tau, geo * pos, geo * tau * vel
