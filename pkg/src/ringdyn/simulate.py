"""Trajectory integration around the circle with collision handling.

Two systems share one adaptive RK5(4) core:

    cartesian  y = (x, y, z, vx, vy, vz),   r'' = -grad V
    reduced    y = (r, z, vr, vz, phi),     r'' = K^2/r^3 - dV/dr,
                                            z'' = -dV/dz, phi' = K/r^2

Runs stop at t_end or when the distance to the circle falls below d_stop
(the singularity is a genuine finite-time collision; it is cut off, not
regularized). The final step is bisected on the dense interpolant so the
last sample sits on the cutoff surface, and the collision time, hit point
and impact geometry are extrapolated from the tail.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad

from . import _kernels as ker
from .errors import DomainError, IntegrationError, StateError
from .planar import EffectiveParams, effective_potential, g
from .potential import Circle

__all__ = [
    "CartesianState",
    "CylindricalState",
    "CollisionReport",
    "Trajectory",
    "integrate_cartesian",
    "integrate_reduced",
    "detect_collision",
    "time_to_collision_quadrature",
    "trajectory_shape_check",
    "ShapeReport",
    "stability_probe",
    "StabilityReport",
    "write_trajectory_csv",
    "read_trajectory_csv",
    "summarize_trajectory",
]

CSV_COLUMNS = ("t", "x", "y", "z", "vx", "vy", "vz", "E", "K")


def _vec3(v, name):
    a = np.asarray(v, dtype=float).reshape(-1)
    if a.shape != (3,) or not np.all(np.isfinite(a)):
        raise DomainError(f"{name} must be a finite 3-vector, got {v!r}")
    return a


@dataclass(frozen=True)
class CartesianState:
    position: np.ndarray
    velocity: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", _vec3(self.position, "position"))
        object.__setattr__(self, "velocity", _vec3(self.velocity, "velocity"))
        object.__setattr__(self, "t", float(self.t))

    @property
    def angular_momentum(self):
        x, y, _ = self.position
        vx, vy, _ = self.velocity
        return x * vy - y * vx


@dataclass(frozen=True)
class CylindricalState:
    """Reduced state; r is the signed meridional radius and K is fixed.

    r(0) must be strictly positive (the axis r = 0 is a coordinate
    singularity of the reduction); K = 0 runs may cross the axis later,
    which just flips the sign of r.
    """

    r: float
    z: float
    rdot: float
    zdot: float
    K: float
    phi: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        for name in ("r", "z", "rdot", "zdot", "K", "phi", "t"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.r > 0.0:
            raise DomainError("reduced states need r > 0 (axis points are excluded)")


@dataclass(frozen=True)
class CollisionReport:
    t_collision: float
    theta_star: float
    hit_point: np.ndarray
    side: str
    terminal_speed: float
    velocity_angle_to_circle_deg: float

    def to_dict(self):
        return {
            "t_collision": self.t_collision,
            "theta_star": self.theta_star,
            "hit_point": [float(v) for v in self.hit_point],
            "side": self.side,
            "terminal_speed": self.terminal_speed,
            "velocity_angle_to_circle_deg": self.velocity_angle_to_circle_deg,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["hit_point"] = np.asarray(d["hit_point"], dtype=float)
        return cls(**d)


_TERMINATIONS = {
    ker.STATUS_DONE: "completed",
    ker.STATUS_COLLISION: "collision",
    ker.STATUS_UNDERFLOW: "underflow",
    ker.STATUS_MAXSTEPS: "max-steps",
}


@dataclass
class Trajectory:
    """Accepted mesh plus the per-step quartic interpolant.

    ``y`` rows are (x, y, z, vx, vy, vz) for kind 'cartesian' and
    (r, z, vr, vz, phi) for kind 'reduced'. Records are immutable by
    convention once returned; nothing here mutates them.
    """

    kind: str
    t: np.ndarray
    y: np.ndarray
    circle: Circle
    K: float
    termination: str
    rtol: float
    atol: float
    d_stop: float
    collision: Optional[CollisionReport] = None
    stats: dict = field(default_factory=dict)
    _qs: Optional[np.ndarray] = field(default=None, repr=False)
    _hs: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def t_start(self):
        return float(self.t[0])

    @property
    def t_final(self):
        return float(self.t[-1])

    def sample(self, times):
        """Dense-output states at query times inside the integrated span."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if self._qs is None or self._qs.shape[0] == 0:
            raise StateError("trajectory carries no interpolant (single sample)")
        lo = min(self.t_start, self.t_final)
        hi = max(self.t_start, self.t_final)
        if np.any(times < lo - 1e-12) or np.any(times > hi + 1e-12):
            raise DomainError("sample times outside the integrated span")
        forward = self.t_final >= self.t_start
        order = np.argsort(times)
        if not forward:
            order = order[::-1]
        out = np.empty((times.size, self.y.shape[1]))
        tmp = np.empty_like(out)
        ker.sample_dense(self.t, self.y, self._qs, self._hs, times[order], tmp)
        out[order] = tmp
        return out

    def energy(self):
        sys_id = 0 if self.kind == "cartesian" else 1
        E, _ = ker.diagnostics(sys_id, self.y, self.circle.rho, self.circle.mass, self.K)
        return E

    def angular_momentum(self):
        sys_id = 0 if self.kind == "cartesian" else 1
        _, L = ker.diagnostics(sys_id, self.y, self.circle.rho, self.circle.mass, self.K)
        return L

    def lift(self):
        """Cartesian (n, 6) view of the samples; identity for cartesian runs."""
        if self.kind == "cartesian":
            return self.y.copy()
        return _lift_reduced(self.y, self.K)

    def to_csv(self, path):
        write_trajectory_csv(self, path)


def _lift_reduced(y, K):
    r = y[:, 0]
    z = y[:, 1]
    vr = y[:, 2]
    vz = y[:, 3]
    phi = y[:, 4]
    cp = np.cos(phi)
    sp = np.sin(phi)
    with np.errstate(divide="ignore", invalid="ignore"):
        phidot = np.where(r != 0.0, K / (r * r), 0.0)
    out = np.empty((y.shape[0], 6))
    out[:, 0] = r * cp
    out[:, 1] = r * sp
    out[:, 2] = z
    out[:, 3] = vr * cp - r * sp * phidot
    out[:, 4] = vr * sp + r * cp * phidot
    out[:, 5] = vz
    return out


def _run(system, y0, t0, t_end, circle, K, rtol, atol, max_step, d_stop, max_steps):
    status, ts, ys, qs, hs, nacc, nrej = ker.dp45_core(
        system,
        np.asarray(y0, dtype=float),
        float(t0),
        float(t_end),
        float(rtol),
        float(atol),
        float(max_step),
        float(d_stop),
        circle.rho,
        circle.mass,
        float(K),
        int(max_steps),
    )
    traj = Trajectory(
        kind="cartesian" if system == 0 else "reduced",
        t=ts,
        y=ys,
        circle=circle,
        K=float(K),
        termination=_TERMINATIONS[status],
        rtol=float(rtol),
        atol=float(atol),
        d_stop=float(d_stop),
        stats={"accepted": int(nacc), "rejected": int(nrej)},
        _qs=qs,
        _hs=hs,
    )
    if status == ker.STATUS_UNDERFLOW:
        raise IntegrationError(
            f"step size underflow at t = {traj.t_final} before reaching the cutoff",
            trajectory=traj,
        )
    if status == ker.STATUS_MAXSTEPS:
        raise IntegrationError(
            f"step budget {max_steps} exhausted at t = {traj.t_final}", trajectory=traj
        )
    if status == ker.STATUS_COLLISION:
        traj.collision = detect_collision(traj)
    return traj


def integrate_cartesian(
    s0,
    circle=Circle(),
    t_end=10.0,
    *,
    rtol=1e-10,
    atol=1e-12,
    max_step=math.inf,
    d_stop=None,
    max_steps=10_000_000,
):
    """Integrate the full 3D equations of motion from a CartesianState."""
    if not isinstance(s0, CartesianState):
        raise DomainError("s0 must be a CartesianState")
    if rtol <= 0.0 or atol <= 0.0:
        raise DomainError("tolerances must be positive")
    if d_stop is None:
        d_stop = 1e-8 * circle.rho
    elif d_stop <= 0.0:
        raise DomainError("d_stop must be positive")
    y0 = np.concatenate([s0.position, s0.velocity])
    start_d = ker.circle_distance(0, y0, circle.rho)
    if start_d <= d_stop:
        raise DomainError(f"initial point is within the collision cutoff (d = {start_d})")
    if t_end == s0.t:
        raise DomainError("t_end equals the initial time")
    return _run(0, y0, s0.t, t_end, circle, s0.angular_momentum, rtol, atol, max_step, d_stop, max_steps)


def integrate_reduced(
    s0,
    circle=Circle(),
    t_end=10.0,
    *,
    rtol=1e-10,
    atol=1e-12,
    max_step=math.inf,
    d_stop=None,
    max_steps=10_000_000,
):
    """Integrate the reduced (r, z) system, carrying phi along by quadrature."""
    if not isinstance(s0, CylindricalState):
        raise DomainError("s0 must be a CylindricalState")
    if rtol <= 0.0 or atol <= 0.0:
        raise DomainError("tolerances must be positive")
    if d_stop is None:
        d_stop = 1e-8 * circle.rho
    elif d_stop <= 0.0:
        raise DomainError("d_stop must be positive")
    y0 = np.array([s0.r, s0.z, s0.rdot, s0.zdot, s0.phi])
    start_d = ker.circle_distance(1, y0, circle.rho)
    if start_d <= d_stop:
        raise DomainError(f"initial point is within the collision cutoff (d = {start_d})")
    if t_end == s0.t:
        raise DomainError("t_end equals the initial time")
    return _run(1, y0, s0.t, t_end, circle, s0.K, rtol, atol, max_step, d_stop, max_steps)


def _aitken_limit(seq):
    """Accelerated limit of a near-geometric sequence; falls back to the tail."""
    est = seq[-1]
    if len(seq) >= 3:
        a0, a1, a2 = seq[-3], seq[-2], seq[-1]
        denom = (a2 - a1) - (a1 - a0)
        if abs(denom) > 1e-300:
            cand = a2 - (a2 - a1) ** 2 / denom
            # reject wild extrapolations from a non-contracting tail
            if abs(cand - a2) <= 10.0 * (abs(a2 - a1) + 1e-300):
                est = cand
    return est


def detect_collision(trajectory):
    """Collision geometry extrapolated from the tail of a cutoff run.

    The hit angle is the accelerated limit of the polar angle over the last
    accepted samples; the collision time adds the remaining free-fall time
    d/|d'| at the cutoff. The velocity angle is measured against the circle
    tangent at the hit point and approaches 90 degrees.
    """
    if trajectory.termination != "collision":
        raise StateError("detect_collision needs a trajectory terminated by the cutoff")
    rho = trajectory.circle.rho
    tail = trajectory.lift()[-6:]
    x, y, z = tail[:, 0], tail[:, 1], tail[:, 2]
    vx, vy, vz = tail[:, 3], tail[:, 4], tail[:, 5]

    theta = np.unwrap(np.arctan2(y, x))
    theta_star = float(_aitken_limit(list(theta)))

    s = math.hypot(x[-1], y[-1])
    d = math.sqrt((s - rho) ** 2 + z[-1] ** 2)
    sdot = (x[-1] * vx[-1] + y[-1] * vy[-1]) / s if s > 0 else 0.0
    ddot = ((s - rho) * sdot + z[-1] * vz[-1]) / d if d > 0 else 0.0
    t_final = trajectory.t_final
    dt_rem = d / abs(ddot) if ddot < 0 else 0.0

    speed = math.sqrt(vx[-1] ** 2 + vy[-1] ** 2 + vz[-1] ** 2)
    tangent = np.array([-math.sin(theta_star), math.cos(theta_star), 0.0])
    v = np.array([vx[-1], vy[-1], vz[-1]])
    cosang = abs(float(v @ tangent)) / speed if speed > 0 else 1.0
    angle = math.degrees(math.acos(min(1.0, max(0.0, cosang))))

    return CollisionReport(
        t_collision=t_final + dt_rem,
        theta_star=theta_star,
        hit_point=np.array([rho * math.cos(theta_star), rho * math.sin(theta_star), 0.0]),
        side="inside" if s < rho else "outside",
        terminal_speed=speed,
        velocity_angle_to_circle_deg=angle,
    )


def time_to_collision_quadrature(r_start, E, K, side, circle=Circle()):
    """Radial travel time from r_start to the circle at fixed E and K.

    Evaluates the quadrature of 1/sqrt(2(E - U(r))) along the monotone
    radial path toward the circle. The endpoint is integrable because
    U -> -infinity there; the integral is truncated at the 1e-9 clip
    radius, which contributes less than 1e-9/sqrt(2).
    """
    rho = circle.rho
    r_start = float(r_start)
    params = EffectiveParams(float(K), circle)
    if side == "inside":
        if not 0.0 <= r_start < rho:
            raise DomainError("inside start needs 0 <= r_start < rho")
        if K != 0.0 and r_start == 0.0:
            raise DomainError("r_start must be positive when K != 0")
        a, b = r_start, rho * (1.0 - 1e-9)
    elif side == "outside":
        if r_start <= rho:
            raise DomainError("outside start needs r_start > rho")
        a, b = rho * (1.0 + 1e-9), r_start
    else:
        raise DomainError(f"side must be 'inside' or 'outside', got {side!r}")
    if b <= a:
        return 0.0

    grid = np.linspace(a, b, 2001)
    U = np.array([effective_potential(r, params, side) for r in grid])
    gap = E - U
    # interior turning point: the motion is not monotone to the circle
    if gap[1:].min() <= 0.0 or gap[0] < -1e-12:
        raise DomainError(
            "E - U(r) vanishes on the path; split the trajectory at the turning point"
        )

    def integrand(r):
        return 1.0 / math.sqrt(2.0 * (E - effective_potential(r, params, side)))

    # full_output silences the roundoff warning from the integrable endpoint
    val = quad(integrand, a, b, epsabs=1e-14, epsrel=1e-11, limit=400, full_output=1)[0]
    return val


@dataclass(frozen=True)
class ShapeReport:
    x_monotone: bool
    evenness_defect: float
    min_second_difference: float
    perigee_alignment: float


def trajectory_shape_check(trajectory, n_dense=4001, n_grid=401, trim=0.02):
    """Shape diagnostics for a normalized planar inside orbit with K != 0.

    The trace of such an orbit is the graph of an even convex function
    y(x) once the perigee is rotated onto the positive y-axis. Reports
    whether x(t) is strictly monotone, the evenness defect
    max |y(x) - y(-x)| on an interpolated grid, the minimum second
    difference of y on a uniform x grid (positive for a convex graph),
    and |rhat . vhat| at the perigee sample (should vanish).
    """
    if trajectory.K == 0.0:
        raise DomainError("shape check needs K != 0")
    n = max(int(n_dense), 101)
    times = np.linspace(trajectory.t_start, trajectory.t_final, n)
    states = trajectory.sample(times)
    if trajectory.kind == "reduced":
        states = _lift_reduced(states, trajectory.K)
    x, y, z = states[:, 0], states[:, 1], states[:, 2]
    vx, vy = states[:, 3], states[:, 4]
    scale = trajectory.circle.rho
    if np.max(np.abs(z)) > 1e-9 * scale:
        raise DomainError("shape check needs a planar trajectory (z = 0)")
    rr = np.hypot(x, y)
    if np.max(rr) > trajectory.circle.rho:
        raise DomainError("shape check needs an inside-circle trajectory")

    ip = int(np.argmin(rr))
    if y[ip] <= 0.0 or abs(x[ip]) > 1e-6 * max(rr[ip], 1e-12):
        raise DomainError("trajectory is not normalized (perigee off the positive y-axis)")
    vnorm = math.hypot(vx[ip], vy[ip])
    perigee_alignment = abs(x[ip] * vx[ip] + y[ip] * vy[ip]) / (rr[ip] * vnorm)

    dx = np.diff(x)
    x_monotone = bool(np.all(dx > 0.0) or np.all(dx < 0.0))

    order = np.argsort(x)
    xs, ysorted = x[order], y[order]
    half = (1.0 - trim) * min(-xs[0], xs[-1])
    grid = np.linspace(0.0, half, n_grid)
    defect = float(np.max(np.abs(np.interp(grid, xs, ysorted) - np.interp(-grid[::-1], xs, ysorted)[::-1])))

    full = np.linspace(-half, half, 2 * n_grid + 1)
    yg = np.interp(full, xs, ysorted)
    d2 = yg[2:] - 2.0 * yg[1:-1] + yg[:-2]
    return ShapeReport(
        x_monotone=x_monotone,
        evenness_defect=defect,
        min_second_difference=float(d2.min()),
        perigee_alignment=float(perigee_alignment),
    )


@dataclass(frozen=True)
class StabilityReport:
    radial_excursion: float
    vertical_excursion: float
    collided: bool
    K: float
    period: float
    t_end: float


def stability_probe(radius, perturbation, circle=Circle(), t_end=None, periods=50.0, **opts):
    """Peak |r - radius| and |z| after perturbing a circular orbit.

    ``radius`` must lie outside the circle; the orbit's angular momentum is
    K = sqrt(g(radius)) and the default horizon is 50 azimuthal periods.
    ``perturbation`` is (dr, dz, drdot, dzdot). A collision during the probe
    simply caps the run; the excursion is taken over the recorded samples.
    """
    radius = float(radius)
    dr, dz, drdot, dzdot = (float(v) for v in perturbation)
    K = math.sqrt(g(radius, circle))
    period = 2.0 * math.pi * radius * radius / K
    if t_end is None:
        t_end = periods * period
    s0 = CylindricalState(r=radius + dr, z=dz, rdot=drdot, zdot=dzdot, K=K)
    try:
        traj = integrate_reduced(s0, circle, t_end, **opts)
    except IntegrationError as err:
        traj = err.trajectory
        if traj is None:
            raise
    nq = 8001
    times = np.linspace(traj.t_start, traj.t_final, nq)
    states = traj.sample(times) if traj.t.size > 1 else traj.y
    return StabilityReport(
        radial_excursion=float(np.max(np.abs(states[:, 0] - radius))),
        vertical_excursion=float(np.max(np.abs(states[:, 1]))),
        collided=traj.termination == "collision",
        K=K,
        period=period,
        t_end=float(traj.t_final),
    )


# ---------------------------------------------------------------------------
# serialization


def _meta_dict(traj):
    c = traj.circle
    return {
        "format": "ringdyn-trajectory-1",
        "kind": traj.kind,
        "termination": traj.termination,
        "rho": c.rho,
        "lam": c.lam,
        "mass": c.mass,
        "K": traj.K,
        "rtol": traj.rtol,
        "atol": traj.atol,
        "d_stop": traj.d_stop,
        "stats": traj.stats,
        "collision": traj.collision.to_dict() if traj.collision else None,
    }


def write_trajectory_csv(traj, path):
    """CSV with cartesian columns plus per-sample diagnostics.

    The first line is a '#'-prefixed JSON header carrying the circle
    parameters, tolerances, termination reason, and collision report;
    reduced trajectories are lifted so the column schema is uniform.
    """
    cart = traj.lift()
    E = traj.energy()
    if traj.kind == "cartesian":
        L = traj.angular_momentum()
    else:
        L = np.full(traj.t.size, traj.K)
    buf = io.StringIO()
    buf.write("# " + json.dumps(_meta_dict(traj), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for i in range(traj.t.size):
        row = [traj.t[i], *cart[i], E[i], L[i]]
        w.writerow(f"{v:.17g}" for v in row)
    data = buf.getvalue()
    if hasattr(path, "write"):
        path.write(data)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(data)


def read_trajectory_csv(path):
    """Inverse of write_trajectory_csv: (meta dict, (n, 9) float array)."""
    if hasattr(path, "read"):
        text = path.read()
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise DomainError("missing JSON header line")
    meta = json.loads(lines[0][1:].strip())
    if lines[1].split(",") != list(CSV_COLUMNS):
        raise DomainError("unexpected column header")
    rows = [[float(v) for v in r] for r in csv.reader(lines[2:]) if r]
    return meta, np.asarray(rows, dtype=float)


def summarize_trajectory(meta, table):
    """Deterministic run summary from serialized data.

    Everything is derived from the file contents, so re-reading a CSV and
    summarizing it again reproduces the summary exactly.
    """
    t = table[:, 0]
    E = table[:, 7]
    L = table[:, 8]
    e0 = E[0]
    energy_drift = float(np.max(np.abs(E - e0)) / max(1.0, abs(e0)))
    momentum_drift = float(np.max(np.abs(L - L[0])))
    term = meta["termination"]
    return {
        "kind": meta["kind"],
        "termination": "t_end reached" if term == "completed" else term,
        "rho": meta["rho"],
        "lam": meta["lam"],
        "mass": meta["mass"],
        "K": meta["K"],
        "samples": int(table.shape[0]),
        "t_start": float(t[0]),
        "t_final": float(t[-1]),
        "energy_drift": energy_drift,
        "momentum_drift": momentum_drift,
        "collision": meta.get("collision"),
    }
