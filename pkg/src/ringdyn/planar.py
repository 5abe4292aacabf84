"""Planar dynamics in the plane of the circle.

In the circle's own plane the extreme distances collapse to |rho - r| and
rho + r, so the restriction of the potential to the plane has the closed
forms

    inside  (0 <= r < rho):  V(r) = -M / agm(rho - r, rho + r)
    outside (r > rho):       V(r) = -M / agm(r - rho, r + rho)

Angular momentum K = x vy - y vx is conserved, and radial motion is governed
by the effective potential U(r) = K^2/(2 r^2) + V(r). Outside the circle the
scaled slope g(r) = r^3 V'(r) is strictly convex with a single interior
minimum r0 in (rho, 2 rho); K0 = sqrt(g(r0)) separates angular momenta with
no circular orbit (|K| < K0) from those with an unstable/stable pair r1 < r2
(|K| > K0).

Evaluations are clipped at a relative distance of 1e-9 from the circle; the
AGM itself is stable far closer, but the clip keeps callers from silently
operating in the singular layer.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from ._kernels import agm_val, chi_val
from .errors import DomainError
from .potential import Circle

__all__ = [
    "EffectiveParams",
    "CriticalData",
    "RegimeClassification",
    "potential_inside",
    "potential_outside",
    "dV_dr",
    "effective_potential",
    "g",
    "g_prime",
    "critical_data",
    "critical_radii",
    "classify_regime",
    "phase_portrait",
]

_CLIP = 1e-9  # relative clearance from the circle required of r


@dataclass(frozen=True)
class EffectiveParams:
    """Angular momentum and source circle for the effective potential."""

    K: float
    circle: Circle = Circle()


@dataclass(frozen=True)
class CriticalData:
    """Critical structure of g outside the circle.

    r0 minimizes g on (rho, 2 rho); K0 = sqrt(g(r0)). ``gprime_residual`` is
    |g'(r0)| from the quadrature route used to locate the root.
    """

    r0: float
    K0: float
    circle: Circle
    gprime_residual: float


@dataclass(frozen=True)
class RegimeClassification:
    regime: str
    region_label: Optional[str] = None


def _inside_r(r, rho):
    a = abs(float(r))
    if a > rho * (1.0 - _CLIP):
        raise DomainError(f"inside potential requires |r| <= rho(1 - 1e-9), got r = {r}")
    return a


def potential_inside(r, circle=Circle()):
    """Planar potential for |r| < rho; even in r (the K = 0 extension)."""
    rho = circle.rho
    a = _inside_r(r, rho)
    return -circle.mass / agm_val(rho - a, rho + a)


def potential_outside(r, circle=Circle()):
    """Planar potential for r > rho."""
    rho = circle.rho
    r = float(r)
    if r < rho * (1.0 + _CLIP):
        raise DomainError(f"outside potential requires r >= rho(1 + 1e-9), got r = {r}")
    return -circle.mass / agm_val(r - rho, r + rho)


def _check_side(side):
    if side not in ("inside", "outside"):
        raise DomainError(f"side must be 'inside' or 'outside', got {side!r}")


def dV_dr(r, side, circle=Circle()):
    """Radial slope of the planar potential via the chi chain rule.

    Strictly negative inside (the field pushes toward the circle) and
    strictly positive outside. Odd in r on the inside even extension;
    dV/dr(0) = 0 exactly.
    """
    _check_side(side)
    rho = circle.rho
    r = float(r)
    if side == "inside":
        a = _inside_r(r, rho)
        if a == 0.0:
            return 0.0
        d = rho - a
        D = rho + a
        V = -circle.mass / agm_val(d, D)
        c = chi_val(D, d)
        # dd/dr = -1, dD/dr = +1 inside
        slope = V * ((c - 1.0) / D + c / d)
        return slope if r > 0 else -slope
    if r < rho * (1.0 + _CLIP):
        raise DomainError(f"outside slope requires r >= rho(1 + 1e-9), got r = {r}")
    d = r - rho
    D = r + rho
    V = -circle.mass / agm_val(d, D)
    c = chi_val(D, d)
    return V * ((c - 1.0) / D - c / d)


def effective_potential(r, params, side):
    """U(r) = K^2/(2 r^2) + V(r) on the requested side.

    For K = 0 the centrifugal term vanishes identically and the inside
    branch extends evenly through r = 0; for K != 0 the inside branch
    requires r > 0.
    """
    _check_side(side)
    K = float(params.K)
    circle = params.circle
    r = float(r)
    if side == "inside":
        V = potential_inside(r, circle)
        if K == 0.0:
            return V
        if r <= 0.0:
            raise DomainError("inside effective potential with K != 0 requires r > 0")
        return K * K / (2.0 * r * r) + V
    V = potential_outside(r, circle)
    return K * K / (2.0 * r * r) + V


def g(r, circle=Circle()):
    """g(r) = r^3 V'(r) outside the circle; g(r)/r -> M as r -> infinity."""
    return float(r) ** 3 * dV_dr(r, "outside", circle)


def g_prime(r, circle=Circle()):
    """dg/dr by adaptive quadrature of its integral form.

    In the rho = 1 variables x = r/rho,

        g'(x) = 4 lam x^3 * integral_0^{pi/2}
                (x^2 - 4 sin^2) (x^2 - sin^2)^{-5/2} dtheta,

    and a circle of radius rho scales this by rho. This is the route used to
    bracket and locate r0; g itself stays on the AGM route.
    """
    rho = circle.rho
    r = float(r)
    if r < rho * (1.0 + _CLIP):
        raise DomainError(f"g' requires r >= rho(1 + 1e-9), got r = {r}")
    x = r / rho
    x2 = x * x

    def integrand(th):
        s2 = math.sin(th) ** 2
        return (x2 - 4.0 * s2) * (x2 - s2) ** -2.5

    # full_output suppresses the endpoint-spike warning right at the clip
    # radius, where only the (divergent, negative) sign is ever used
    val = quad(integrand, 0.0, math.pi / 2.0, epsabs=0.0, epsrel=1e-11, limit=500, full_output=1)[0]
    return rho * 4.0 * circle.lam * x * x2 * val


@lru_cache(maxsize=64)
def critical_data(circle=Circle()):
    """Locate the minimum of g; cached per circle.

    The bracket (rho(1 + 1e-9), 2 rho) is guaranteed by the structure of g:
    g' -> -infinity at the circle, g'(2 rho) > 0, and g'' > 0 in between, so
    the sign change is unique.
    """
    rho = circle.rho
    lo = rho * (1.0 + _CLIP)
    hi = 2.0 * rho
    r0 = brentq(lambda r: g_prime(r, circle), lo, hi, xtol=1e-14, rtol=4.0 * 2.0**-52)
    return CriticalData(
        r0=r0,
        K0=math.sqrt(g(r0, circle)),
        circle=circle,
        gprime_residual=abs(g_prime(r0, circle)),
    )


def critical_radii(K, data=None):
    """Solve g(r) = K^2 on both monotone branches.

    Returns None for |K| < K0 (no circular orbits), the degenerate pair
    (r0, r0) at |K| = K0, and r1 in (rho, r0), r2 in (r0, infinity) for
    |K| > K0.
    """
    if data is None:
        data = critical_data()
    circle = data.circle
    K0 = data.K0
    k = abs(float(K))
    reltol = 1e-12
    if k < K0 * (1.0 - reltol):
        return None
    if k <= K0 * (1.0 + reltol):
        return (data.r0, data.r0)
    K2 = k * k
    lo = circle.rho * (1.0 + _CLIP)
    if g(lo, circle) < K2:
        raise DomainError(f"K = {K} too large to bracket r1 above the clip radius")
    fn = lambda r: g(r, circle) - K2
    r1 = brentq(fn, lo, data.r0, xtol=1e-14, rtol=4.0 * 2.0**-52)
    hi = 2.0 * data.r0
    while g(hi, circle) <= K2:
        hi *= 2.0
    r2 = brentq(fn, data.r0, hi, xtol=1e-14, rtol=4.0 * 2.0**-52)
    return (r1, r2)


_ETOL = 1e-12  # absolute binning tolerance for energy comparisons


def classify_regime(side, K, E, r_init, rdot_sign=0, circle=Circle()):
    """Qualitative fate of the orbit with the given conserved quantities.

    The decision table follows the phase-portrait structure:

    inside, K = 0: E < E0 = V(0) -> ``radial-oscillation`` (turns back before
    the origin); E > E0 -> ``collide`` (crosses to the antipode); E = E0 with
    r = 0 -> ``rest-at-origin``, with r != 0 -> ``rest-at-origin`` when
    moving inward (converges to the rest solution) and ``collide`` outward.
    inside, K != 0: always ``collide`` (no interior critical points).

    outside, |K| < K0: ``collide-or-escape-both-branches`` for every E.
    outside, |K| = K0: the single circular orbit at r0 is
    ``circular-unstable``; other orbits at its energy are
    ``asymptotic-to-r1-circular``; the rest ``collide-or-escape``.
    outside, |K| > K0 (Ebar = U(r1), labels per the energy landscape):
    E = Ebar -> ``circular-unstable`` at r1, else ``asymptotic-to-r1-circular``;
    E = U(r2) at r2 -> ``circular-stable``; E < Ebar with r < r1 ->
    ``collide`` (region I); E < min(Ebar, 0) with r > r1 ->
    ``bounded-annulus`` (region V when Ebar > 0, else IV); 0 <= E < Ebar with
    r > r1 -> ``escape`` (region IV, unbounded bounce off the barrier);
    Ebar < E < 0 -> ``bounded-annulus`` (region V, over the submerged
    barrier and back); E >= max(Ebar, 0) -> ``collide`` inbound (region II)
    or ``escape`` outbound (region III).

    ``rdot_sign`` only matters where both fates are possible; 0 is treated
    as inbound. Binning tolerance for energy comparisons is 1e-12 absolute.
    """
    _check_side(side)
    K = float(K)
    E = float(E)
    r_init = float(r_init)
    if side == "inside":
        if r_init < 0.0:
            raise DomainError("classify_regime takes r_init >= 0 (use the even symmetry)")
        U_init = effective_potential(r_init, EffectiveParams(K, circle), "inside")
        if E < U_init - _ETOL:
            raise DomainError(f"E = {E} is below U(r_init) = {U_init}")
        if K == 0.0:
            E0 = -circle.mass / circle.rho
            if E < E0 - _ETOL:
                return RegimeClassification("radial-oscillation")
            if E > E0 + _ETOL:
                return RegimeClassification("collide")
            if abs(r_init) <= 1e-12 * circle.rho or rdot_sign < 0:
                return RegimeClassification("rest-at-origin")
            return RegimeClassification("collide")
        return RegimeClassification("collide")

    data = critical_data(circle)
    K0 = data.K0
    k = abs(K)
    params = EffectiveParams(K, circle)
    U_init = effective_potential(r_init, params, "outside")
    if E < U_init - _ETOL:
        raise DomainError(f"E = {E} is below U(r_init) = {U_init}")
    ktol = 1e-12 * K0
    if k < K0 - ktol:
        return RegimeClassification("collide-or-escape-both-branches")
    if k <= K0 + ktol:
        E_circ = effective_potential(data.r0, params, "outside")
        if abs(E - E_circ) <= _ETOL:
            if abs(r_init - data.r0) <= 1e-9 * data.r0:
                return RegimeClassification("circular-unstable")
            return RegimeClassification("asymptotic-to-r1-circular")
        return RegimeClassification("collide-or-escape-both-branches")

    r1, r2 = critical_radii(k, data)
    Ebar = effective_potential(r1, params, "outside")
    E2 = effective_potential(r2, params, "outside")
    if abs(E - Ebar) <= _ETOL:
        if abs(r_init - r1) <= 1e-9 * r1:
            return RegimeClassification("circular-unstable")
        return RegimeClassification("asymptotic-to-r1-circular")
    if abs(E - E2) <= _ETOL and abs(r_init - r2) <= 1e-9 * r2:
        return RegimeClassification("circular-stable")
    if E < Ebar:
        if r_init < r1:
            return RegimeClassification("collide", "I")
        if E < -_ETOL:
            return RegimeClassification("bounded-annulus", "V" if Ebar > _ETOL else "IV")
        return RegimeClassification("escape", "IV")
    if E < -_ETOL:
        return RegimeClassification("bounded-annulus", "V")
    if rdot_sign > 0:
        return RegimeClassification("escape", "III")
    return RegimeClassification("collide", "II")


def phase_portrait(side, K, r_grid, rdot_grid, circle=Circle()):
    """Energy table E(r, rdot) = rdot^2/2 + U(r), row-major in r then rdot.

    Grid points inside the 1e-9 clip layer around the circle map to NaN, and
    r = 0 with K != 0 maps to +inf (the centrifugal wall).
    """
    _check_side(side)
    r_grid = np.asarray(r_grid, dtype=float)
    rdot_grid = np.asarray(rdot_grid, dtype=float)
    params = EffectiveParams(K, circle)
    out = np.empty((r_grid.size, rdot_grid.size))
    kin = 0.5 * rdot_grid**2
    for i, r in enumerate(r_grid):
        try:
            U = effective_potential(r, params, side)
        except DomainError:
            U = math.inf if (side == "inside" and K != 0.0 and r == 0.0) else math.nan
        out[i, :] = U + kin
    return out
