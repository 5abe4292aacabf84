import numpy as np
import pytest

import ringdyn as rd


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    """Pay the JIT compilation cost once, before any timed test runs."""
    c = rd.Circle()
    tr = rd.integrate_cartesian(
        rd.CartesianState([2.0, 0.0, 0.0], [0.0, 0.8, 0.0]), c, 0.1
    )
    tr.sample(np.array([0.05]))
    tr.energy()
    tr.angular_momentum()
    rd.integrate_reduced(
        rd.CylindricalState(r=0.5, z=0.0, rdot=-1.0, zdot=0.0, K=0.0), c, 0.01
    )
    rd.gradient([1.7, 0.3, 0.4], c)
