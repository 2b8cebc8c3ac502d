"""Uniformly sampled base-space trajectories and their discrete calculus.

A trajectory is a sequence of 2D or 3D positions on a uniform time grid.
All downstream machinery (command recovery, deformations, corrections)
operates on this representation: derivatives come from second-order
finite-difference stencils, local frames from the normalized velocity and
acceleration, and the regularity checks are discrete jump tests on the
one-sided derivative estimates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonUniformGrid, TrajectoryTooShort, ZeroVelocitySample

V_MIN_DEFAULT = 1e-6
A_FLOOR = 1e-9
MIN_SAMPLES = 9


@dataclass
class Trajectory:
    """Base-space curve sampled at t_k = k*dt.

    Attributes
    ----------
    dt : float
        Grid step in seconds, strictly positive.
    points : ndarray, shape (n, dim)
        Positions in meters, dim is 2 or 3, n >= 9.
    """

    dt: float
    points: np.ndarray

    def __post_init__(self):
        self.points = np.ascontiguousarray(self.points, dtype=float)
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.points.ndim != 2 or self.points.shape[1] not in (2, 3):
            raise ValueError("points must have shape (n, 2) or (n, 3)")
        if self.points.shape[0] < MIN_SAMPLES:
            raise TrajectoryTooShort(
                f"need at least {MIN_SAMPLES} samples, got {self.points.shape[0]}"
            )
        if not np.all(np.isfinite(self.points)):
            raise ValueError("points contain non-finite values")

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def n_samples(self):
        return self.points.shape[0]

    @property
    def duration(self):
        return (self.n_samples - 1) * self.dt

    @property
    def times(self):
        return np.arange(self.n_samples) * self.dt

    @property
    def start(self):
        return self.points[0]

    @property
    def end(self):
        return self.points[-1]

    def with_points(self, points):
        """New trajectory on the same grid."""
        return Trajectory(self.dt, points)

    def slice(self, start, stop=None):
        """Sub-trajectory on [start, stop) sample indices (same dt)."""
        return Trajectory(self.dt, self.points[start:stop])

    def copy(self):
        return Trajectory(self.dt, self.points.copy())


@dataclass
class FrameSample:
    """Velocity/acceleration data and the local orthonormal frame at one sample.

    In 2D the frame is {u_par, u_perp} with u_perp the +90 degree rotation
    of u_par.  In 3D it is {u_par, w1, w2}, right-handed, with w1 the
    normalized component of the acceleration orthogonal to u_par (or a
    deterministic fallback when that component vanishes).
    """

    v: np.ndarray
    a: np.ndarray
    u_par: np.ndarray
    speed: float
    u_perp: np.ndarray | None = None
    w1: np.ndarray | None = None
    w2: np.ndarray | None = None

    def basis(self):
        """Frame vectors as matrix columns (orthonormal, so inverse = transpose)."""
        if self.u_perp is not None:
            return np.column_stack([self.u_par, self.u_perp])
        return np.column_stack([self.u_par, self.w1, self.w2])


@dataclass
class Tolerances:
    """Tolerance knobs for the discrete regularity checks.

    A velocity jump at sample k is the difference between the forward and
    backward first differences; for smooth data it scales like dt*|a|, so
    the threshold is velocity_factor*dt*(local acceleration scale).  The
    heading-rate check works the same way on the unwrapped heading series.
    Absolute overrides tol_v / tol_omega take precedence when set.
    """

    v_min: float = V_MIN_DEFAULT
    tol_v: float | None = None
    tol_omega: float | None = None
    velocity_factor: float = 10.0
    heading_factor: float = 50.0
    accel_scale_floor: float = 1e-3
    omega_scale_floor: float = 1.0
    tol_cross: float = 1e-6


@dataclass
class RegularityReport:
    """Outcome of the discrete D2 checks on a sampled trajectory."""

    is_D2: bool
    worst_velocity_jump: float
    worst_accel_jump_tangential: float
    heading_D2: bool | None
    discontinuity_indices: list = field(default_factory=list)
    heading_discontinuity_indices: list = field(default_factory=list)
    worst_heading_rate_jump: float = 0.0


def diff_series(y, dt, order=1):
    """Finite-difference derivative of a sampled series (n,) or (n, d).

    Central differences at interior samples and one-sided second-order
    stencils at the endpoints; exact on polynomials of degree <= 2.  The
    endpoint stencils are chosen so their leading error constant matches
    the central one (they equal a central stencil applied to a cubic /
    quartic ghost extrapolation), which keeps repeated differentiation of
    derived series second-order accurate up to the boundary.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    p = np.asarray(y, dtype=float)
    out = np.empty_like(p)
    if order == 1:
        out[1:-1] = (p[2:] - p[:-2]) / (2.0 * dt)
        out[0] = (-4.0 * p[0] + 7.0 * p[1] - 4.0 * p[2] + p[3]) / (2.0 * dt)
        out[-1] = (4.0 * p[-1] - 7.0 * p[-2] + 4.0 * p[-3] - p[-4]) / (2.0 * dt)
    else:
        dt2 = dt * dt
        out[1:-1] = (p[2:] - 2.0 * p[1:-1] + p[:-2]) / dt2
        out[0] = (3.0 * p[0] - 9.0 * p[1] + 10.0 * p[2] - 5.0 * p[3] + p[4]) / dt2
        out[-1] = (3.0 * p[-1] - 9.0 * p[-2] + 10.0 * p[-3] - 5.0 * p[-4] + p[-5]) / dt2
    return out


def differentiate(traj, order=1):
    """Sampled derivative of the trajectory coordinates (same grid)."""
    return diff_series(traj.points, traj.dt, order)


def speeds(traj):
    return np.linalg.norm(differentiate(traj, 1), axis=1)


def min_interior_speed(traj):
    return float(speeds(traj)[1:-1].min())


def _perp2(u):
    return np.array([-u[1], u[0]])


def frame_at(traj, k, v_min=V_MIN_DEFAULT):
    """Local frame at sample index k.

    Raises ZeroVelocitySample if the discrete speed is below v_min.
    """
    v = differentiate(traj, 1)[k]
    a = differentiate(traj, 2)[k]
    s = float(np.linalg.norm(v))
    if s <= v_min:
        raise ZeroVelocitySample(f"speed {s:.3e} at sample {k} below v_min={v_min:.3e}")
    u_par = v / s
    if traj.dim == 2:
        return FrameSample(v=v, a=a, u_par=u_par, speed=s, u_perp=_perp2(u_par))
    a_perp = a - (a @ u_par) * u_par
    na = np.linalg.norm(a_perp)
    if na > 1e-9 * max(1.0, np.linalg.norm(a)):
        w1 = a_perp / na
    else:
        # a is parallel to v: fall back to the projection of a fixed axis
        ref = np.array([0.0, 0.0, 1.0])
        if abs(u_par @ ref) > 1.0 - 1e-9:
            ref = np.array([1.0, 0.0, 0.0])
        w1 = ref - (ref @ u_par) * u_par
        w1 /= np.linalg.norm(w1)
    w2 = np.cross(u_par, w1)
    return FrameSample(v=v, a=a, u_par=u_par, speed=s, w1=w1, w2=w2)


def unit_tangents(traj, v_min=V_MIN_DEFAULT):
    """Unit tangent at every sample (vectorized frame_at for searches)."""
    d1 = differentiate(traj, 1)
    s = np.linalg.norm(d1, axis=1)
    if np.any(s <= v_min):
        k = int(np.argmin(s))
        raise ZeroVelocitySample(f"speed {s[k]:.3e} at sample {k} below v_min")
    return d1 / s[:, None]


def heading(traj, v_min=V_MIN_DEFAULT):
    """Unwrapped atan2 heading of the velocity along a 2D trajectory."""
    if traj.dim != 2:
        raise ValueError("heading is defined for 2D trajectories")
    d1 = differentiate(traj, 1)
    s = np.linalg.norm(d1, axis=1)
    if np.any(s <= v_min):
        k = int(np.argmin(s))
        raise ZeroVelocitySample(f"speed {s[k]:.3e} at sample {k} below v_min")
    return np.unwrap(np.arctan2(d1[:, 1], d1[:, 0]))


def _series_jumps(y, dt):
    """Jump diagnostics for a sampled series (n, d) or (n,).

    Returns (jump, local_scale): jump[k] is the norm of the difference of
    one-sided first derivatives at interior sample k (k = 1..n-2), and
    local_scale[k] the larger norm of the one-sided second-derivative
    estimates that do not straddle k.
    """
    y = np.atleast_2d(y.T).T
    n = y.shape[0]
    dt2 = dt * dt
    second = np.linalg.norm(y[2:] - 2.0 * y[1:-1] + y[:-2], axis=1)  # centered at 1..n-2
    jump = second / dt
    sec = second / dt2
    # local curvature scale from stencils centered two samples away from k:
    # series derived through central differences smear a break over +-1
    # sample, so distance-1 stencils would see the break they are meant to
    # calibrate against
    left = np.full(n - 2, np.nan)
    right = np.full(n - 2, np.nan)
    left[2:] = sec[:-2]
    right[:-2] = sec[2:]
    local = np.fmax(left, right)
    return jump, local


def check_regularity(traj, tol=None):
    """Discrete D2 diagnosis of the trajectory (and of its heading in 2D).

    is_D2 holds when no interior sample shows a velocity jump above
    tolerance; heading_D2 additionally requires the heading rate to be
    jump-free (only evaluated in 2D, None in 3D).  The report always
    carries the worst observed jumps and the offending indices.
    """
    tol = tol or Tolerances()
    p = traj.points
    dt = traj.dt
    jump, local = _series_jumps(p, dt)
    if tol.tol_v is not None:
        thresh = np.full_like(jump, tol.tol_v)
    else:
        thresh = tol.velocity_factor * dt * np.fmax(local, tol.accel_scale_floor) + 1e-12
    bad = np.nonzero(jump > thresh)[0] + 1
    worst_v = float(jump.max()) if jump.size else 0.0

    # tangential acceleration jump (informational; D2 allows it)
    d1 = differentiate(traj, 1)
    s = np.linalg.norm(d1, axis=1)
    u = d1 / np.fmax(s, V_MIN_DEFAULT)[:, None]
    dt2 = dt * dt
    sec = (p[2:] - 2.0 * p[1:-1] + p[:-2]) / dt2
    worst_at = 0.0
    if sec.shape[0] >= 2:
        da = sec[1:] - sec[:-1]
        tangential = np.abs(np.einsum("ij,ij->i", da, u[1:-1][: da.shape[0]]))
        worst_at = float(tangential.max())

    heading_ok = None
    h_bad = []
    worst_w = 0.0
    if traj.dim == 2:
        th = heading(traj, tol.v_min)
        wjump, wlocal = _series_jumps(th, dt)
        if tol.tol_omega is not None:
            wthresh = np.full_like(wjump, tol.tol_omega)
        else:
            wthresh = tol.heading_factor * dt * np.fmax(wlocal, tol.omega_scale_floor) + 1e-12
        h_bad = (np.nonzero(wjump > wthresh)[0] + 1).tolist()
        worst_w = float(wjump.max()) if wjump.size else 0.0
        heading_ok = len(h_bad) == 0

    return RegularityReport(
        is_D2=bad.size == 0,
        worst_velocity_jump=worst_v,
        worst_accel_jump_tangential=worst_at,
        heading_D2=heading_ok,
        discontinuity_indices=bad.tolist(),
        heading_discontinuity_indices=h_bad,
        worst_heading_rate_jump=worst_w,
    )


def omega_jump_at(traj, k, v_min=V_MIN_DEFAULT):
    """Difference of one-sided heading-rate estimates at sample k (2D)."""
    th = heading(traj, v_min)
    return abs(th[k + 1] - 2.0 * th[k] + th[k - 1]) / traj.dt


def velocity_jump_at(traj, k):
    """Difference of one-sided velocity estimates at sample k."""
    p = traj.points
    return float(np.linalg.norm(p[k + 1] - 2.0 * p[k] + p[k - 1]) / traj.dt)


def inflection_indices(traj, tol_cross=1e-6, a_floor=A_FLOOR):
    """Sample indices where velocity and acceleration are (nearly) collinear.

    These are excluded as deformation instants for class II robots: the
    one-parameter deformation family degenerates there.
    """
    if traj.dim != 2:
        raise ValueError("inflection detection is defined for 2D trajectories")
    v = differentiate(traj, 1)
    a = differentiate(traj, 2)
    cross = v[:, 0] * a[:, 1] - v[:, 1] * a[:, 0]
    denom = np.linalg.norm(v, axis=1) * np.fmax(np.linalg.norm(a, axis=1), a_floor)
    ratio = np.abs(cross) / np.fmax(denom, 1e-300)
    return np.nonzero(ratio < tol_cross)[0].tolist()


def save_csv(traj, path):
    """Write the trajectory as ``t,x,y[,z]`` rows with %.12g formatting."""
    cols = ["t", "x", "y", "z"][: 1 + traj.dim]
    t = traj.times
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(cols) + "\n")
        for k in range(traj.n_samples):
            row = [t[k], *traj.points[k]]
            f.write(",".join(f"{v:.12g}" for v in row) + "\n")


def load_csv(path):
    """Read a ``t,x,y[,z]`` file, rejecting non-uniform time grids."""
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip().split(",")
        data = np.loadtxt(f, delimiter=",", ndmin=2)
    if header[0] != "t" or header[1:] not in (["x", "y"], ["x", "y", "z"]):
        raise NonUniformGrid(f"unexpected CSV header {header!r}")
    t = data[:, 0]
    if len(t) < 2:
        raise TrajectoryTooShort("CSV has fewer than 2 samples")
    steps = np.diff(t)
    dt = float(np.median(steps))
    if dt <= 0 or np.max(np.abs(steps - dt)) > 1e-9 * dt:
        raise NonUniformGrid("time column is not a uniform grid")
    return Trajectory(dt, data[:, 1:])
