"""AGM-based special functions underlying the circle potential.

The whole package reduces to three scalar kernels: the arithmetic-geometric
mean sigma(m, n), the complete elliptic kernel

    f(t) = integral_0^{pi/2} dtheta / sqrt(cos^2 theta + t sin^2 theta)
         = pi / (2 sigma(sqrt(t), 1)),   0 < t <= 1,

and the series coefficient chi(D, d) that turns the AGM into the partial
derivatives of the potential -M/sigma(d, D) with respect to the extreme
distances d and D.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from ._kernels import agm_val, chi_val
from .errors import DomainError

_EPS = float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class AgmResult:
    """Converged AGM value plus the nested mean sequence that produced it.

    ``sequence`` holds the (arithmetic, geometric) pairs (m_i, n_i) for
    i = 1, 2, ...; they are strictly nested between the inputs whenever the
    inputs differ.
    """

    value: float
    iterations: int
    sequence: tuple


def agm(m, n):
    """Arithmetic-geometric mean of two positive reals.

    Iterates m_{i+1} = (m_i + n_i)/2, n_{i+1} = sqrt(m_i n_i) until the pair
    agrees to ~4 ulp, and returns the midpoint together with the iteration
    trace. Symmetric in its arguments and first-degree homogeneous.

    Raises
    ------
    DomainError
        If either argument is not a positive finite number.
    """
    m = float(m)
    n = float(n)
    if not (math.isfinite(m) and math.isfinite(n)) or m <= 0.0 or n <= 0.0:
        raise DomainError(f"agm requires positive finite arguments, got ({m}, {n})")
    big, small = (m, n) if m >= n else (n, m)
    seq = []
    its = 0
    while big - small > 4.0 * _EPS * big and its < 64:
        big, small = 0.5 * (big + small), math.sqrt(big * small)
        seq.append((big, small))
        its += 1
    return AgmResult(value=0.5 * (big + small), iterations=its, sequence=tuple(seq))


def elliptic_f(t):
    """The kernel f(t) on (0, 1], computed through the AGM.

    f(t) = pi / (2 agm(sqrt(t), 1)). Decreasing, convex, f(1) = pi/2, and
    f(t) -> infinity logarithmically as t -> 0+.
    """
    t = float(t)
    if not math.isfinite(t) or t <= 0.0:
        raise DomainError(f"elliptic_f requires 0 < t <= 1, got {t}")
    if t > 1.0:
        raise DomainError(f"elliptic_f requires 0 < t <= 1, got {t}")
    return math.pi / (2.0 * agm_val(math.sqrt(t), 1.0))


def _f_any(t):
    """f extended to all t > 0 (internal; the integral converges for t > 1 too)."""
    return math.pi / (2.0 * agm_val(math.sqrt(t), 1.0))


def _fprime_quad(t):
    # d/dt of the defining integral, rewritten with u = cos(theta):
    #   f'(t) = -1/2 * integral_0^1 sqrt(1-u^2) (u^2 + t(1-u^2))^{-3/2} du
    # The integrand peaks at u = 0 with width sqrt(t); for small t QUADPACK
    # needs the spike location spelled out as breakpoints.
    def integrand(u):
        w = 1.0 - u * u
        return math.sqrt(w) / (u * u + t * w) ** 1.5

    if t < 1e-3:
        if t < 1e-280:
            raise DomainError(f"elliptic_f_prime underflows for t = {t}")
        s = math.sqrt(t)
        pts = sorted({min(0.5, s * 10.0**k) for k in range(7)})
        val, _ = quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=1e-12, limit=800, points=pts)
    else:
        val, _ = quad(integrand, 0.0, 1.0, epsabs=1e-14, epsrel=1e-12, limit=800)
    return -0.5 * val


def elliptic_f_prime(t):
    """Derivative f'(t) on (0, 1] by adaptive quadrature of the defining integral.

    Strictly negative and increasing; f'(1) = -pi/8 and t f'(t) -> -1/2 as
    t -> 0+.
    """
    t = float(t)
    if not math.isfinite(t) or t <= 0.0 or t > 1.0:
        raise DomainError(f"elliptic_f_prime requires 0 < t <= 1, got {t}")
    return _fprime_quad(t)


def chi(D, d):
    """Logarithmic-derivative coefficient of the AGM potential, for D >= d > 0.

    With V = -M/sigma(d, D):

        dV/dD = (chi - 1)/D * V,      dV/dd = -(chi/d) * V.

    The series is summed on the mean iteration of (D, d); terms decay at
    least geometrically, and the loop stops once a term drops below 1e-16 of
    the partial sum (or at 64 terms). chi(D, D) = 1/2 exactly, and
    0 < chi <= 1/2 with equality only on the diagonal.
    """
    D = float(D)
    d = float(d)
    if not (math.isfinite(D) and math.isfinite(d)) or d <= 0.0:
        raise DomainError(f"chi requires D >= d > 0, got ({D}, {d})")
    if d > D:
        raise DomainError(f"chi requires D >= d, got ({D}, {d})")
    return chi_val(D, d)
