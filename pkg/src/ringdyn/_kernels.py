"""Jitted numeric core: AGM, chi series, field evaluation, and the RK5(4) stepper.

Everything in this module works on plain float64 scalars/arrays so numba can
compile it; the public API lives in the other modules and validates inputs
before calling in here. Gradients are computed analytically through the AGM
chain rule (no quadrature on the integrator's hot path).
"""

import numpy as np
from numba import njit

_EPS = float(np.finfo(np.float64).eps)

# ---------------------------------------------------------------------------
# scalar special-function kernels


@njit(cache=True, error_model="numpy")
def agm_val(a, b):
    """Common limit of the arithmetic/geometric mean iteration, a, b > 0."""
    if a == b:
        return a
    big = a if a >= b else b
    small = b if a >= b else a
    for _ in range(64):
        m = 0.5 * (big + small)
        n = np.sqrt(big * small)
        big = m
        small = n
        # AM >= GM keeps the pair ordered; stop at ~4 ulp relative gap
        if big - small <= 4.0 * _EPS * big:
            break
    return 0.5 * (big + small)


@njit(cache=True, error_model="numpy")
def chi_val(big, small):
    """Series coefficient chi(D, d) of the AGM partial derivatives, D >= d > 0.

    chi = sum_n 2^-n (d_{n-1}/D_n) prod_{j<n} (1 - d_{j-1}/D_j) on the mean
    iteration D_n = (D_{n-1}+d_{n-1})/2, d_n = sqrt(D_{n-1} d_{n-1}).
    """
    if big == small:
        return 0.5
    total = 0.0
    prod = 1.0
    pw = 1.0
    D = big
    d = small
    for _ in range(64):
        pw *= 0.5
        Dn = 0.5 * (D + d)
        dn = np.sqrt(D * d)
        term = pw * (d / Dn) * prod
        total += term
        if term < 1e-16 * total:
            break
        prod *= 1.0 - d / Dn
        D = Dn
        d = dn
    return total


@njit(cache=True, error_model="numpy")
def potential_meridional(s, z, rho, M):
    """V at cylindrical radius s and height z (s may be any real; V is even in s)."""
    dm = s - rho
    dp = s + rho
    d = np.sqrt(dm * dm + z * z)
    D = np.sqrt(dp * dp + z * z)
    return -M / agm_val(d, D)


@njit(cache=True, error_model="numpy")
def grad_meridional(s, z, rho, M):
    """(dV/ds, dV/dz) via the chi chain rule through the extreme distances.

    Valid for any real s (the near/far distances swap roles for s < 0, which
    transient Runge-Kutta stages may probe); the caller must keep the point
    off the circle itself.
    """
    dm = s - rho
    dp = s + rho
    d = np.sqrt(dm * dm + z * z)
    D = np.sqrt(dp * dp + z * z)
    if d <= D:
        near = d
        far = D
        near_off = dm
        far_off = dp
    else:
        near = D
        far = d
        near_off = dp
        far_off = dm
    V = -M / agm_val(near, far)
    c = chi_val(far, near)
    dVdfar = (c - 1.0) / far * V
    dVdnear = -(c / near) * V
    dVds = dVdfar * (far_off / far) + dVdnear * (near_off / near)
    dVdz = (dVdfar / far + dVdnear / near) * z
    return dVds, dVdz


# ---------------------------------------------------------------------------
# right-hand sides
#
# system 0: Cartesian, y = (x, y, z, vx, vy, vz)
# system 1: reduced cylindrical, y = (r, z, vr, vz, phi), K passed separately

AXIS_EPS_SQ = 1e-24  # below this s^2 the closed-form axis field is used


@njit(cache=True, error_model="numpy")
def rhs(system, y, out, rho, M, K):
    if system == 0:
        x = y[0]
        yy = y[1]
        zz = y[2]
        out[0] = y[3]
        out[1] = y[4]
        out[2] = y[5]
        s2 = x * x + yy * yy
        if s2 < AXIS_EPS_SQ:
            R2 = rho * rho + zz * zz
            out[3] = 0.0
            out[4] = 0.0
            out[5] = -M * zz / (R2 * np.sqrt(R2))
        else:
            s = np.sqrt(s2)
            gs, gz = grad_meridional(s, zz, rho, M)
            out[3] = -gs * x / s
            out[4] = -gs * yy / s
            out[5] = -gz
    else:
        r = y[0]
        zz = y[1]
        gs, gz = grad_meridional(r, zz, rho, M)
        out[0] = y[2]
        out[1] = y[3]
        out[3] = -gz
        if K == 0.0:
            # keep r = 0 crossings finite: no centrifugal term, phi frozen
            out[2] = -gs
            out[4] = 0.0
        else:
            out[2] = K * K / (r * r * r) - gs
            out[4] = K / (r * r)


@njit(cache=True, error_model="numpy")
def circle_distance(system, y, rho):
    """Distance from the state's position to the circle."""
    if system == 0:
        s = np.sqrt(y[0] * y[0] + y[1] * y[1])
        return np.sqrt((s - rho) * (s - rho) + y[2] * y[2])
    # |r|: a K=0 radial solution may cross the center, where negative r
    # stands for the antipodal meridional half-plane
    dr = np.abs(y[0]) - rho
    return np.sqrt(dr * dr + y[1] * y[1])


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4) with PI step control and dense output
#
# Butcher tableau and the quartic interpolant weights are the standard
# published coefficients for this pair.

_C2, _C3, _C4, _C5 = 0.2, 0.3, 0.8, 8.0 / 9.0
_A21 = 0.2
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

_P = np.array(
    [
        [1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0, -12715105075.0 / 11282082432.0],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0, 87487479700.0 / 32700410799.0],
        [0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0, -10690763975.0 / 1880347072.0],
        [0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0, 701980252875.0 / 199316789632.0],
        [0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0, -1453857185.0 / 822651844.0],
        [0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0, 69997945.0 / 29380423.0],
    ]
)

STATUS_DONE = 0
STATUS_COLLISION = 1
STATUS_UNDERFLOW = 2
STATUS_MAXSTEPS = 3


@njit(cache=True, error_model="numpy")
def _error_norm(err, y0, y1, rtol, atol, dim):
    acc = 0.0
    for j in range(dim):
        sc = atol + rtol * max(abs(y0[j]), abs(y1[j]))
        r = err[j] / sc
        acc += r * r
    return np.sqrt(acc / dim)


@njit(cache=True, error_model="numpy")
def _dense_point(yL, q, h, theta, out, dim):
    for j in range(dim):
        out[j] = yL[j] + h * theta * (
            q[0, j] + theta * (q[1, j] + theta * (q[2, j] + theta * q[3, j]))
        )


@njit(cache=True, error_model="numpy")
def dp45_core(system, y0, t0, t1, rtol, atol, max_step, d_stop, rho, M, K, max_steps):
    """Integrate to t1, stopping early on circle approach below d_stop.

    Returns (status, ts, ys, qs, hs, n_accepted, n_rejected) where ts/ys hold
    the accepted mesh (including the endpoint), and qs[i]/hs[i] define the
    quartic interpolant on [ts[i], ts[i]+hs[i]] (hs can exceed ts[i+1]-ts[i]
    only on an event-truncated final step).
    """
    dim = y0.shape[0]
    direction = 1.0 if t1 >= t0 else -1.0
    k = np.empty((7, dim))
    ytmp = np.empty(dim)
    yev = np.empty(dim)

    cap = 4096
    ts = np.empty(cap)
    ys = np.empty((cap, dim))
    qs = np.empty((cap, 4, dim))
    hs = np.empty(cap)

    t = t0
    y = y0.copy()
    ts[0] = t
    for j in range(dim):
        ys[0, j] = y[j]
    m = 1

    rhs(system, y, k[0], rho, M, K)  # FSAL slot

    # Hairer-style first step guess
    d0 = 0.0
    d1 = 0.0
    for j in range(dim):
        sc = atol + rtol * abs(y[j])
        d0 += (y[j] / sc) ** 2
        d1 += (k[0, j] / sc) ** 2
    d0 = np.sqrt(d0 / dim)
    d1 = np.sqrt(d1 / dim)
    if d0 < 1e-5 or d1 < 1e-5:
        h = 1e-6
    else:
        h = 0.01 * d0 / d1
    for j in range(dim):
        ytmp[j] = y[j] + h * direction * k[0, j]
    rhs(system, ytmp, k[1], rho, M, K)
    d2 = 0.0
    for j in range(dim):
        sc = atol + rtol * abs(y[j])
        d2 += ((k[1, j] - k[0, j]) / sc) ** 2
    d2 = np.sqrt(d2 / dim) / h
    dmax = max(d1, d2)
    if dmax <= 1e-15:
        h1 = max(1e-6, h * 1e-3)
    else:
        h1 = (0.01 / dmax) ** 0.2
    h = min(100.0 * h, h1)
    h = min(h, max_step, abs(t1 - t0))

    safe = 0.9
    beta = 0.04
    expo1 = 0.2 - 0.75 * beta
    facold = 1e-4
    facc1 = 1.0 / 0.2
    facc2 = 1.0 / 10.0
    nacc = 0
    nrej = 0
    status = STATUS_DONE
    last = False

    while True:
        if nacc >= max_steps:
            status = STATUS_MAXSTEPS
            break
        hmin = 1e-15 * max(1.0, abs(t))
        if h < hmin:
            status = STATUS_UNDERFLOW
            break
        if direction * (t + direction * h - t1) > 0.0:
            h = abs(t1 - t)
            last = True
        else:
            last = False
        hd = h * direction

        # stages (k[0] holds f(t, y) from FSAL)
        for j in range(dim):
            ytmp[j] = y[j] + hd * _A21 * k[0, j]
        rhs(system, ytmp, k[1], rho, M, K)
        for j in range(dim):
            ytmp[j] = y[j] + hd * (_A31 * k[0, j] + _A32 * k[1, j])
        rhs(system, ytmp, k[2], rho, M, K)
        for j in range(dim):
            ytmp[j] = y[j] + hd * (_A41 * k[0, j] + _A42 * k[1, j] + _A43 * k[2, j])
        rhs(system, ytmp, k[3], rho, M, K)
        for j in range(dim):
            ytmp[j] = y[j] + hd * (
                _A51 * k[0, j] + _A52 * k[1, j] + _A53 * k[2, j] + _A54 * k[3, j]
            )
        rhs(system, ytmp, k[4], rho, M, K)
        for j in range(dim):
            ytmp[j] = y[j] + hd * (
                _A61 * k[0, j] + _A62 * k[1, j] + _A63 * k[2, j] + _A64 * k[3, j] + _A65 * k[4, j]
            )
        rhs(system, ytmp, k[5], rho, M, K)
        for j in range(dim):
            ytmp[j] = y[j] + hd * (
                _B1 * k[0, j] + _B3 * k[2, j] + _B4 * k[3, j] + _B5 * k[4, j] + _B6 * k[5, j]
            )
        rhs(system, ytmp, k[6], rho, M, K)

        bad = False
        errn = 0.0
        for j in range(dim):
            e = hd * (
                _E1 * k[0, j]
                + _E3 * k[2, j]
                + _E4 * k[3, j]
                + _E5 * k[4, j]
                + _E6 * k[5, j]
                + _E7 * k[6, j]
            )
            if not np.isfinite(e) or not np.isfinite(ytmp[j]):
                bad = True
            sc = atol + rtol * max(abs(y[j]), abs(ytmp[j]))
            r = e / sc
            errn += r * r
        errn = np.sqrt(errn / dim)
        if bad:
            errn = 1e10

        if errn > 1.0:
            nrej += 1
            fac11 = errn**expo1
            h = h / min(facc1, fac11 / safe)
            continue

        # accepted: dense coefficients for this step, then advance
        if m >= cap:
            ncap = cap * 2
            ts2 = np.empty(ncap)
            ys2 = np.empty((ncap, dim))
            qs2 = np.empty((ncap, 4, dim))
            hs2 = np.empty(ncap)
            for i in range(cap):
                ts2[i] = ts[i]
                hs2[i] = hs[i]
                for j in range(dim):
                    ys2[i, j] = ys[i, j]
                for c in range(4):
                    for j in range(dim):
                        qs2[i, c, j] = qs[i, c, j]
            ts = ts2
            ys = ys2
            qs = qs2
            hs = hs2
            cap = ncap

        for c in range(4):
            for j in range(dim):
                acc = 0.0
                for s in range(7):
                    acc += _P[s, c] * k[s, j]
                qs[m - 1, c, j] = acc
        hs[m - 1] = hd

        tnew = t1 if last else t + hd
        collided = False
        if d_stop > 0.0 and circle_distance(system, ytmp, rho) <= d_stop:
            # bisect the interpolant for first crossing of d_stop
            lo = 0.0
            hi = 1.0
            for _ in range(100):
                mid = 0.5 * (lo + hi)
                _dense_point(y, qs[m - 1], hd, mid, yev, dim)
                if circle_distance(system, yev, rho) <= d_stop:
                    hi = mid
                else:
                    lo = mid
            _dense_point(y, qs[m - 1], hd, hi, yev, dim)
            tnew = t + hd * hi
            for j in range(dim):
                ytmp[j] = yev[j]
            collided = True

        t = tnew
        for j in range(dim):
            y[j] = ytmp[j]
        ts[m] = t
        for j in range(dim):
            ys[m, j] = y[j]
        m += 1
        nacc += 1

        if collided:
            status = STATUS_COLLISION
            break
        if last:
            status = STATUS_DONE
            break

        # FSAL: stage 7 was evaluated at (t_new, y_new)
        for j in range(dim):
            k[0, j] = k[6, j]

        fac11 = errn**expo1
        fac = fac11 / facold**beta
        fac = max(facc2, min(facc1, fac / safe))
        h = min(h / fac, max_step)
        facold = max(errn, 1e-4)

    return status, ts[:m], ys[:m], qs[: m - 1], hs[: m - 1], nacc, nrej


@njit(cache=True, error_model="numpy")
def diagnostics(system, ys, rho, M, K):
    """Energy and angular momentum at every sample of an accepted mesh."""
    n = ys.shape[0]
    E = np.empty(n)
    L = np.empty(n)
    for i in range(n):
        if system == 0:
            x, yy, zz = ys[i, 0], ys[i, 1], ys[i, 2]
            vx, vy, vz = ys[i, 3], ys[i, 4], ys[i, 5]
            s = np.sqrt(x * x + yy * yy)
            V = potential_meridional(s, zz, rho, M)
            E[i] = V + 0.5 * (vx * vx + vy * vy + vz * vz)
            L[i] = x * vy - yy * vx
        else:
            r, zz, vr, vz = ys[i, 0], ys[i, 1], ys[i, 2], ys[i, 3]
            V = potential_meridional(r, zz, rho, M)
            E[i] = V + 0.5 * (vr * vr + vz * vz) + K * K / (2.0 * r * r)
            L[i] = K
    return E, L


@njit(cache=True, error_model="numpy")
def sample_dense(ts, ys, qs, hs, times, out):
    """Evaluate the stored interpolant at sorted query times."""
    n = ts.shape[0]
    dim = ys.shape[1]
    forward = ts[n - 1] >= ts[0]
    idx = 0
    for q in range(times.shape[0]):
        tq = times[q]
        if forward:
            while idx < n - 2 and ts[idx + 1] < tq:
                idx += 1
        else:
            while idx < n - 2 and ts[idx + 1] > tq:
                idx += 1
        h = hs[idx]
        theta = (tq - ts[idx]) / h if h != 0.0 else 0.0
        for j in range(dim):
            out[q, j] = ys[idx, j] + h * theta * (
                qs[idx, 0, j]
                + theta * (qs[idx, 1, j] + theta * (qs[idx, 2, j] + theta * qs[idx, 3, j]))
            )
