"""Field of a huge circle through the origin and its straight-wire limit.

A circle of radius 1/eps is translated so it passes through the origin with
its center on the positive x-axis; the field point (x, z) lives in the
vertical plane containing the center. The extreme distances to the circle
are then

    d^2 = x^2 + z^2,   D^2 = (c - x)^2 + z^2,   c = 2/eps,

with (0, 0) and (c, 0) the two points where the circle pierces the plane.
As eps -> 0 the near arc straightens and the field tends to the
straight-wire form; here that limit is normalized to

    64 lam (x, z) / (x^2 + z^2).

All outputs of this module carry the constant WIRE_CALIBRATION so that
finite-eps fields, the h ladder, and the closed-form limit share that
normalization; the gradient of the plain circle potential (see
``ringdyn.potential``) for the same configuration is obtained by dividing
by WIRE_CALIBRATION.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import agm_val
from .errors import DomainError, OnCircleError
from .special import _f_any, _fprime_quad

__all__ = [
    "WIRE_CALIBRATION",
    "WireLimitPoint",
    "wire_potential",
    "grad_W",
    "grad_W_limit",
    "h_components",
    "HComponents",
    "decomposition",
    "convergence_scan",
]

# Overall field normalization: with this factor the eps -> 0 limit of grad_W
# is exactly 64 lam (x, z)/(x^2 + z^2), and h -> 64 lam.
WIRE_CALIBRATION = 32.0


@dataclass(frozen=True)
class WireLimitPoint:
    """Field point (x, z) at inverse circle radius epsilon >= 0."""

    x: float
    z: float
    epsilon: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "z", float(self.z))
        object.__setattr__(self, "epsilon", float(self.epsilon))
        if not (self.epsilon >= 0.0 and math.isfinite(self.epsilon)):
            raise DomainError(f"epsilon must be finite and >= 0, got {self.epsilon}")
        if self.x == 0.0 and self.z == 0.0:
            raise OnCircleError("(0, 0) is on the circle for every epsilon")
        if self.epsilon > 0.0:
            c = 2.0 / self.epsilon
            if self.x == c and self.z == 0.0:
                raise OnCircleError(f"({c}, 0) is on the circle")
            if self.x > c:
                raise DomainError(
                    f"x = {self.x} exceeds 2/epsilon = {c}; the distance formulas hold only for x <= 2/epsilon"
                )


def _geometry(p):
    c = 2.0 / p.epsilon
    d2 = p.x * p.x + p.z * p.z
    D2 = (c - p.x) ** 2 + p.z * p.z
    return c, math.sqrt(d2), math.sqrt(D2), d2 / D2


def wire_potential(p, lam=1.0):
    """Potential of the translated circle, scaled by WIRE_CALIBRATION.

    W = -CAL * (4 lam / eps) * T(d, D) with T = pi / (2 agm(d, D)); its
    gradient is grad_W. The potential itself has no eps -> 0 limit (it
    diverges with the circle), only the gradient does.
    """
    if p.epsilon == 0.0:
        raise DomainError("the wire potential needs epsilon > 0 (only the gradient has a limit)")
    _, d, D, _ = _geometry(p)
    T = math.pi / (2.0 * agm_val(d, D))
    return -WIRE_CALIBRATION * 4.0 * lam / p.epsilon * T


def grad_W(p, lam=1.0):
    """Gradient of the wire potential at (x, z), epsilon >= 0.

    For epsilon > 0 this is the closed form

        2 lam' c f(t)/D^3 (x - c, z) - 4 lam' c^2/D^5 f'(t) (cx + z^2 - x^2, cz - 2xz)

    with lam' = CAL * lam; epsilon = 0 dispatches to the defining limit
    grad_W_limit. Agrees with finite differences of wire_potential.
    """
    if p.epsilon == 0.0:
        return grad_W_limit(p.x, p.z, lam)
    le = WIRE_CALIBRATION * lam
    c, d, D, t = _geometry(p)
    f = _f_any(t)
    fp = _fprime_quad(t)
    a1 = 2.0 * le * c * f / D**3
    a2 = 4.0 * le * c * c * fp / D**5
    gx = a1 * (p.x - c) - a2 * (c * p.x + p.z * p.z - p.x * p.x)
    gz = a1 * p.z - a2 * (c * p.z - 2.0 * p.x * p.z)
    return np.array([gx, gz])


def grad_W_limit(x, z, lam=1.0):
    """Straight-wire field 64 lam (x, z)/(x^2 + z^2)."""
    x = float(x)
    z = float(z)
    r2 = x * x + z * z
    if r2 == 0.0:
        raise DomainError("the wire field is singular at the origin")
    return 64.0 * lam / r2 * np.array([x, z])


@dataclass(frozen=True)
class HComponents:
    """Bounded building blocks of the gradient near the limit.

    With lam' = CAL * lam:
      h1 = 4 lam' f(t) / (eps^{5/2} D^3)
      h2 = -32 lam' / (eps D)^5
      h3 = 16 lam' f'(t) / (eps^{5/2} D^5)
      h  = (x^2 + z^2) eps^2 f'(t) h2    (tends to 64 lam)
    """

    h1: float
    h2: float
    h3: float
    h: float


def h_components(p, lam=1.0):
    if p.epsilon == 0.0:
        raise DomainError("h components are defined for epsilon > 0")
    le = WIRE_CALIBRATION * lam
    eps = p.epsilon
    _, d, D, t = _geometry(p)
    f = _f_any(t)
    fp = _fprime_quad(t)
    h1 = 4.0 * le * f / (eps**2.5 * D**3)
    h2 = -32.0 * le / (eps * D) ** 5
    h3 = 16.0 * le * fp / (eps**2.5 * D**5)
    h = d * d * eps * eps * fp * h2
    return HComponents(h1=h1, h2=h2, h3=h3, h=h)


def decomposition(p, lam=1.0):
    """Reassemble the gradient from the h pieces.

    grad_W = [eps^{3/2} h1](x,z) - [2 sqrt(eps) h1](1,0)
             + h (x,z)/(x^2+z^2) + [sqrt(eps) h3](x^2 - z^2, 2xz)

    This is an exact algebraic identity with grad_W (two code paths, one
    field); tests pin the agreement at 1e-12.
    """
    hc = h_components(p, lam)
    eps = p.epsilon
    x, z = p.x, p.z
    r2 = x * x + z * z
    se = math.sqrt(eps)
    out = eps * se * hc.h1 * np.array([x, z])
    out -= 2.0 * se * hc.h1 * np.array([1.0, 0.0])
    out += hc.h / r2 * np.array([x, z])
    out += se * hc.h3 * np.array([x * x - z * z, 2.0 * x * z])
    return out


def convergence_scan(points, eps_sequence, lam=1.0):
    """Deviation of the finite-eps field from the limit field.

    Returns rows (x, z, eps, deviation) with deviation =
    ||grad_W(p; eps) - grad_W_limit(p)||_2, ordered points-major. The
    deviation decreases monotonically in eps for points at unit scale.
    """
    rows = []
    for x, z in points:
        gl = grad_W_limit(x, z, lam)
        for eps in eps_sequence:
            gw = grad_W(WireLimitPoint(x, z, eps), lam)
            rows.append((float(x), float(z), float(eps), float(np.linalg.norm(gw - gl))))
    return rows
