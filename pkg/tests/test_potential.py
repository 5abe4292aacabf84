"""3D potential, analytic gradient, symmetries, and the scaling identities."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

import ringdyn as rd
from ringdyn import Circle, DomainError, OnCircleError, dist_extremes, gradient, potential

AGM_1_3 = 1.8636167832448965424


def rot_z(a):
    return np.array(
        [[math.cos(a), -math.sin(a), 0.0], [math.sin(a), math.cos(a), 0.0], [0.0, 0.0, 1.0]]
    )


def potential_quad(p, circle):
    """Independent oracle: -4*lam*rho times the half-period average of 1/dist."""
    d, D = dist_extremes(p, circle)
    val, _ = quad(
        lambda psi: 1.0 / math.sqrt(d * d * math.cos(psi) ** 2 + D * D * math.sin(psi) ** 2),
        0.0,
        math.pi / 2,
        epsabs=1e-14,
        epsrel=1e-13,
        limit=200,
    )
    return -4.0 * circle.lam * circle.rho * val


class TestCircle:
    def test_mass_identity(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            rho, lam = rng.uniform(0.1, 10.0, 2)
            c = Circle(rho=rho, lam=lam)
            assert c.mass == pytest.approx(2 * math.pi * lam * rho, rel=1e-15)

    def test_with_mass_roundtrip(self):
        c = Circle.with_mass(rho=2.0, mass=5.0)
        assert c.mass == pytest.approx(5.0, rel=1e-15)
        assert c.lam == pytest.approx(5.0 / (2 * math.pi * 2.0), rel=1e-15)

    def test_default_normalization(self):
        c = Circle()
        assert c.rho == 1.0
        assert c.mass == pytest.approx(1.0, rel=1e-15)

    def test_invalid_parameters(self):
        for kw in ({"rho": 0.0}, {"rho": -1.0}, {"lam": 0.0}, {"lam": -2.0}):
            with pytest.raises(DomainError):
                Circle(**kw)


class TestDistExtremes:
    def test_center(self):
        d, D = dist_extremes([0.0, 0.0, 0.0], Circle())
        assert (d, D) == (1.0, 1.0)

    def test_axis(self):
        for z in (0.5, 1.0, -2.0):
            d, D = dist_extremes([0.0, 0.0, z], Circle())
            assert d == pytest.approx(math.sqrt(1 + z * z), rel=1e-15)
            assert d == D

    def test_collinear(self):
        d, D = dist_extremes([2.0, 0.0, 0.0], Circle())
        assert d == pytest.approx(1.0, rel=1e-15)
        assert D == pytest.approx(3.0, rel=1e-15)

    def test_difference_of_squares_identity(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            p = rng.uniform(-3, 3, 3)
            rho = rng.uniform(0.2, 4.0)
            d, D = dist_extremes(p, Circle(rho=rho))
            s = math.hypot(p[0], p[1])
            assert D * D - d * d == pytest.approx(4 * rho * s, rel=1e-12, abs=1e-12)

    def test_on_circle_gives_zero(self):
        d, D = dist_extremes([1.0, 0.0, 0.0], Circle())
        assert d == 0.0
        assert D == 2.0


class TestPotential:
    def test_center_value(self):
        c = Circle(lam=1.0)
        assert potential([0.0, 0.0, 0.0], c) == pytest.approx(-2 * math.pi, rel=1e-15)

    def test_axis_closed_form(self):
        c = Circle()
        for z in (0.3, 1.0, 5.0):
            assert potential([0.0, 0.0, z], c) == pytest.approx(
                -c.mass / math.sqrt(1 + z * z), rel=1e-14
            )

    def test_pinned_outside_point(self):
        c = Circle(lam=1.0)
        assert potential([2.0, 0.0, 0.0], c) == pytest.approx(-2 * math.pi / AGM_1_3, rel=1e-14)

    def test_against_quadrature(self):
        c = Circle()
        for p in ([0.4, 0.2, 0.1], [2.0, -1.0, 0.5], [0.0, 1.7, -0.6], [5.0, 0.0, 2.0]):
            assert potential(p, c) == pytest.approx(potential_quad(p, c), rel=1e-10)

    def test_on_circle_raises(self):
        with pytest.raises(OnCircleError):
            potential([1.0, 0.0, 0.0], Circle())
        with pytest.raises(OnCircleError):
            potential([0.0, -2.0, 0.0], Circle(rho=2.0))

    def test_rotation_invariance(self):
        c = Circle()
        rng = np.random.default_rng(5)
        for _ in range(100):
            p = rng.uniform(-3, 3, 3)
            if abs(math.hypot(p[0], p[1]) - 1.0) < 1e-3 and abs(p[2]) < 1e-3:
                continue
            v0 = potential(p, c)
            v1 = potential(rot_z(rng.uniform(0, 2 * math.pi)) @ p, c)
            assert v1 == pytest.approx(v0, rel=1e-14)

    def test_reflection_invariance_exact(self):
        c = Circle()
        rng = np.random.default_rng(6)
        for _ in range(50):
            x, y, z = rng.uniform(-2, 2, 3)
            if abs(math.hypot(x, y) - 1.0) < 1e-3 and abs(z) < 1e-3:
                continue
            assert potential([x, y, -z], c) == potential([x, y, z], c)

    def test_far_field_sandwich(self):
        c = Circle()
        rng = np.random.default_rng(11)
        for _ in range(100):
            p = rng.normal(size=3)
            p *= rng.uniform(1.5, 50.0) / np.linalg.norm(p)
            r = np.linalg.norm(p)
            v = potential(p, c)
            assert -c.mass / (r - c.rho) <= v <= -c.mass / (r + c.rho)

    def test_vanishes_only_at_infinity(self):
        c = Circle()
        vals = [potential([r, 0.0, 0.0], c) for r in (1e2, 1e4, 1e6, 1e8)]
        assert all(a < b < 0 for a, b in zip(vals, vals[1:]))
        assert abs(vals[-1]) < 1e-7

    def test_proximity_divergence(self):
        c = Circle()
        prev = 0.0
        for k in range(2, 11):
            p = [1.0 + 10.0 ** -k, 0.0, 0.0]
            d, _ = dist_extremes(p, c)
            v = potential(p, c)
            assert -v <= c.mass / d
            assert v < prev
            prev = v


class TestGradient:
    def test_equilibrium_at_center(self):
        g = gradient([0.0, 0.0, 0.0], Circle())
        assert np.all(g == 0.0)

    def test_axis_closed_form(self):
        c = Circle()
        g = gradient([0.0, 0.0, 1.0], c)
        assert g[0] == 0.0 and g[1] == 0.0
        assert g[2] == pytest.approx(c.mass / 2 ** 1.5, rel=1e-14)

    def test_against_finite_differences(self):
        c = Circle()
        h = 1e-6
        p = np.array([1.7, 0.3, 0.4])
        g = gradient(p, c)
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            fd = (potential(p + e, c) - potential(p - e, c)) / (2 * h)
            assert g[i] == pytest.approx(fd, rel=1e-7)

    def test_vertical_component_sign(self):
        c = Circle()
        rng = np.random.default_rng(12)
        for _ in range(100):
            p = rng.uniform(-3, 3, 3)
            if abs(p[2]) < 1e-6 or abs(math.hypot(p[0], p[1]) - 1.0) < 1e-2:
                continue
            assert math.copysign(1.0, gradient(p, c)[2]) == math.copysign(1.0, p[2])

    def test_rotation_equivariance(self):
        c = Circle()
        rng = np.random.default_rng(13)
        for _ in range(100):
            p = rng.uniform(-3, 3, 3)
            if abs(math.hypot(p[0], p[1]) - 1.0) < 5e-2 and abs(p[2]) < 5e-2:
                continue
            R = rot_z(rng.uniform(0, 2 * math.pi))
            g1 = gradient(R @ p, c)
            g2 = R @ gradient(p, c)
            scale = max(1.0, float(np.abs(g2).max()))
            assert np.abs(g1 - g2).max() / scale < 1e-12

    def test_on_circle_raises(self):
        with pytest.raises(OnCircleError):
            gradient([0.0, 1.0, 0.0], Circle())


class TestScalingIdentities:
    def test_mass_radius_and_gradient_scalings(self):
        rng = np.random.default_rng(14)
        base = Circle(rho=1.0, lam=1.0)
        for c_fac in (0.5, 2.0, 10.0):
            heavier = Circle.with_mass(rho=1.0, mass=c_fac * base.mass)
            wider = Circle.with_mass(rho=c_fac, mass=base.mass)
            for _ in range(20):
                p = rng.uniform(-3, 3, 3)
                if abs(math.hypot(p[0], p[1]) - 1.0) < 1e-2 and abs(p[2]) < 1e-2:
                    continue
                v = potential(p, base)
                assert potential(p, heavier) == pytest.approx(c_fac * v, rel=1e-13)
                assert potential(c_fac * p, wider) == pytest.approx(v / c_fac, rel=1e-13)
                g = gradient(p, base)
                gw = gradient(c_fac * p, wider)
                assert np.abs(gw - g / c_fac ** 2).max() <= 1e-13 * max(
                    1.0, float(np.abs(g).max())
                )


class TestRescaleSolution:
    def test_identity_rescale(self):
        times = np.linspace(0.0, 3.0, 7)
        pos = np.outer(times, [1.0, 0.5, -0.2])
        vel = np.tile([1.0, 0.5, -0.2], (7, 1))
        t2, p2, v2 = rd.rescale_solution(times, pos, vel, 1.0, 1.0, 1.0, 1.0)
        assert np.array_equal(t2, times)
        assert np.array_equal(p2, pos)
        assert np.array_equal(v2, vel)

    def test_circular_orbit_period_scaling(self):
        c = Circle()
        data = rd.critical_data(c)
        K = 1.5 * data.K0
        _, r2 = rd.critical_radii(K, data)
        omega = K / r2 ** 2
        T = 2 * math.pi / omega
        times = np.linspace(0.0, T, 200)
        pos = np.stack(
            [r2 * np.cos(omega * times), r2 * np.sin(omega * times), np.zeros_like(times)], axis=1
        )
        vel = np.stack(
            [-r2 * omega * np.sin(omega * times), r2 * omega * np.cos(omega * times),
             np.zeros_like(times)], axis=1
        )
        zeta = 3.0
        t2, p2, v2 = rd.rescale_solution(times, pos, vel, 1.0, c.mass, zeta, c.mass)
        radii = np.linalg.norm(p2, axis=1)
        assert np.abs(radii - zeta * r2).max() < 1e-12
        assert t2[-1] == pytest.approx(T * math.sqrt(zeta ** 3), rel=1e-14)
        # the rescaled arc still closes after one (scaled) period
        assert np.abs(p2[-1] - p2[0]).max() < 1e-9

    def test_domain_errors(self):
        times = np.zeros(1)
        pos = np.zeros((1, 3))
        vel = np.zeros((1, 3))
        for bad in ((0.0, 1.0, 1.0, 1.0), (1.0, -1.0, 1.0, 1.0), (1.0, 1.0, 0.0, 1.0), (1.0, 1.0, 1.0, -2.0)):
            with pytest.raises(DomainError):
                rd.rescale_solution(times, pos, vel, *bad)
