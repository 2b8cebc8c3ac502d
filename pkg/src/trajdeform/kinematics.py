"""Robot models: forward integration and reverse command recovery.

The forward equations follow the canonical five-type classification of
planar wheeled robots plus the familiar unicycle / kinematic-car forms, a
car towing trailers and a 3D underwater vehicle.  Forward integration is
a classical 4th-order one-step scheme on the command grid and serves as
the verification oracle; the reverse equations recover commands and
non-base variables algebraically from an admissible base-space trajectory
(only the trailer angles need an auxiliary ODE solve).

Convention note: for the canonical types whose forward equations drive
the robot along (-sin theta, cos theta), the internal theta equals the
velocity heading minus pi/2.  The reverse equations here are written to
be exactly consistent with the forward ones, so recover + integrate is an
identity up to discretization error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AdmissibilityError,
    EulerSingularity,
    SteeringSingularity,
    ZeroVelocitySample,
)
from .trajectory import (
    Tolerances,
    Trajectory,
    check_regularity,
    diff_series,
    differentiate,
    heading,
)

CLASS1_KINDS = frozenset({"type_3_0", "type_2_1", "type_1_2", "unicycle"})
CLASS2_KINDS = frozenset({"type_2_0", "type_1_1", "kinematic_car", "car_with_trailers"})

_STATE_FIELDS = {
    "type_3_0": ("x", "y", "theta"),
    "type_2_0": ("x", "y", "theta"),
    "type_2_1": ("x", "y", "theta", "beta"),
    "type_1_1": ("x", "y", "theta", "beta"),
    "type_1_2": ("x", "y", "theta", "beta1", "beta2"),
    "unicycle": ("x", "y", "theta"),
    "kinematic_car": ("x", "y", "theta", "beta"),
    "underwater_3d": ("x", "y", "z", "phi", "theta", "psi"),
}

_COMMAND_FIELDS = {
    "type_3_0": ("eta1", "eta2", "eta3"),
    "type_2_0": ("eta1", "eta2"),
    "type_2_1": ("eta1", "eta2", "zeta1"),
    "type_1_1": ("eta1", "zeta1"),
    "type_1_2": ("eta1", "zeta1", "zeta2"),
    "unicycle": ("v", "omega"),
    "kinematic_car": ("v", "zeta"),
    "car_with_trailers": ("v", "zeta"),
    "underwater_3d": ("v", "wx", "wy", "wz"),
}

# velocity-like commands, required to be discretely D1 (continuous with
# piecewise-continuous derivative); the remaining commands only need D0
D1_COMMAND_FIELDS = {
    "type_3_0": ("eta1", "eta2", "eta3"),
    "type_2_0": ("eta1", "eta2"),
    "type_2_1": ("eta1", "eta2"),
    "type_1_1": ("eta1",),
    "type_1_2": ("eta1",),
    "unicycle": ("v",),
    "kinematic_car": ("v",),
    "car_with_trailers": ("v",),
    "underwater_3d": ("v",),
}


@dataclass(frozen=True)
class RobotModel:
    """Tagged kinematic model selecting forward/reverse equations.

    kind is one of type_3_0, type_2_0, type_2_1, type_1_1, type_1_2,
    unicycle, kinematic_car, car_with_trailers, underwater_3d.
    wheelbase is required for type_1_1, type_1_2, kinematic_car and
    car_with_trailers (where it is the tractor length L_0);
    hitch_lengths holds L_1..L_p for the trailers.
    """

    kind: str
    wheelbase: float | None = None
    hitch_lengths: tuple = ()

    def __post_init__(self):
        if self.kind not in _COMMAND_FIELDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind in ("type_1_1", "type_1_2", "kinematic_car", "car_with_trailers"):
            if self.wheelbase is None or self.wheelbase <= 0:
                raise ValueError(f"{self.kind} requires a positive wheelbase")
        if self.kind == "car_with_trailers":
            if len(self.hitch_lengths) < 1 or any(L <= 0 for L in self.hitch_lengths):
                raise ValueError("car_with_trailers requires positive hitch lengths")
        object.__setattr__(self, "hitch_lengths", tuple(self.hitch_lengths))

    @property
    def base_dim(self):
        return 3 if self.kind == "underwater_3d" else 2

    @property
    def n_trailers(self):
        return len(self.hitch_lengths)

    @property
    def admissibility_class(self):
        if self.kind in CLASS1_KINDS:
            return "class1"
        if self.kind in CLASS2_KINDS:
            return "class2"
        return "d2"

    @property
    def state_fields(self):
        if self.kind == "car_with_trailers":
            return ("x", "y", "theta0", "beta") + tuple(
                f"theta{i}" for i in range(1, self.n_trailers + 1)
            )
        return _STATE_FIELDS[self.kind]

    @property
    def command_fields(self):
        return _COMMAND_FIELDS[self.kind]


def type_3_0():
    return RobotModel("type_3_0")


def type_2_0():
    return RobotModel("type_2_0")


def type_2_1():
    return RobotModel("type_2_1")


def type_1_1(wheelbase):
    return RobotModel("type_1_1", wheelbase=wheelbase)


def type_1_2(wheelbase):
    return RobotModel("type_1_2", wheelbase=wheelbase)


def unicycle():
    return RobotModel("unicycle")


def kinematic_car(wheelbase):
    return RobotModel("kinematic_car", wheelbase=wheelbase)


def car_with_trailers(wheelbase, hitch_lengths):
    return RobotModel("car_with_trailers", wheelbase=wheelbase, hitch_lengths=tuple(hitch_lengths))


def underwater_3d():
    return RobotModel("underwater_3d")


@dataclass
class CommandProfile:
    """Sampled command series on the same grid as the trajectories."""

    dt: float
    series: dict = field(default_factory=dict)

    def __post_init__(self):
        self.series = {k: np.asarray(v, dtype=float) for k, v in self.series.items()}
        lengths = {v.shape[0] for v in self.series.values()}
        if len(lengths) > 1:
            raise ValueError(f"command series have mismatched lengths {lengths}")

    @property
    def length(self):
        return next(iter(self.series.values())).shape[0]

    def stack(self, fields):
        return np.column_stack([self.series[f] for f in fields])


@dataclass
class StateSeries:
    """Full-state samples produced by integration or command recovery."""

    dt: float
    kind: str
    fields: tuple
    values: np.ndarray

    def __getitem__(self, name):
        return self.values[:, self.fields.index(name)]

    def trajectory(self, base_dim=2):
        return Trajectory(self.dt, self.values[:, :base_dim])


def ode_function(model):
    """Right-hand side f(state, commands) of the forward equations.

    Broadcasts over leading axes, so the same function integrates a single
    robot or a batch of them.
    """
    kind = model.kind
    L = model.wheelbase

    if kind == "type_3_0":
        def f(s, u):
            th = s[..., 2]
            c, sn = np.cos(th), np.sin(th)
            return np.stack(
                [c * u[..., 0] - sn * u[..., 1], sn * u[..., 0] + c * u[..., 1], u[..., 2]],
                axis=-1,
            )
    elif kind == "type_2_0":
        def f(s, u):
            th = s[..., 2]
            return np.stack(
                [-u[..., 0] * np.sin(th), u[..., 0] * np.cos(th), u[..., 1]], axis=-1
            )
    elif kind == "type_2_1":
        def f(s, u):
            ang = s[..., 2] + s[..., 3]
            return np.stack(
                [
                    -u[..., 0] * np.sin(ang),
                    u[..., 0] * np.cos(ang),
                    u[..., 1],
                    u[..., 2],
                ],
                axis=-1,
            )
    elif kind == "type_1_1":
        def f(s, u):
            th, b = s[..., 2], s[..., 3]
            e1 = u[..., 0]
            return np.stack(
                [
                    -e1 * L * np.sin(th) * np.sin(b),
                    e1 * L * np.cos(th) * np.sin(b),
                    e1 * np.cos(b),
                    u[..., 1],
                ],
                axis=-1,
            )
    elif kind == "type_1_2":
        def f(s, u):
            th, b1, b2 = s[..., 2], s[..., 3], s[..., 4]
            e1 = u[..., 0]
            s1, s2 = np.sin(b1), np.sin(b2)
            s12 = np.sin(b1 + b2)
            c, sn = np.cos(th), np.sin(th)
            return np.stack(
                [
                    -e1 * (2.0 * L * c * s1 * s2 + L * sn * s12),
                    -e1 * (2.0 * L * sn * s1 * s2 - L * c * s12),
                    e1 * np.sin(b2 - b1),
                    u[..., 1],
                    u[..., 2],
                ],
                axis=-1,
            )
    elif kind == "unicycle":
        def f(s, u):
            th = s[..., 2]
            return np.stack(
                [u[..., 0] * np.cos(th), u[..., 0] * np.sin(th), u[..., 1]], axis=-1
            )
    elif kind == "kinematic_car":
        def f(s, u):
            th, b = s[..., 2], s[..., 3]
            v = u[..., 0]
            return np.stack(
                [v * np.cos(th), v * np.sin(th), v * np.tan(b) / L, u[..., 1]], axis=-1
            )
    elif kind == "car_with_trailers":
        hitches = model.hitch_lengths

        def f(s, u):
            th0, b = s[..., 2], s[..., 3]
            v = u[..., 0]
            parts = [v * np.cos(th0), v * np.sin(th0), v * np.tan(b) / L, u[..., 1]]
            prod = np.ones_like(th0)
            prev = th0
            for i, Li in enumerate(hitches):
                thi = s[..., 4 + i]
                parts.append(v / Li * prod * np.sin(prev - thi))
                prod = prod * np.cos(prev - thi)
                prev = thi
            return np.stack(parts, axis=-1)
    elif kind == "underwater_3d":
        def f(s, u):
            phi, th, psi = s[..., 3], s[..., 4], s[..., 5]
            v, wx, wy, wz = u[..., 0], u[..., 1], u[..., 2], u[..., 3]
            cth = np.cos(th)
            sth = np.sin(th)
            cphi, sphi = np.cos(phi), np.sin(phi)
            tth = sth / cth
            return np.stack(
                [
                    v * np.cos(psi) * cth,
                    v * np.sin(psi) * cth,
                    -v * sth,
                    wx + sphi * tth * wy + cphi * tth * wz,
                    cphi * wy - sphi * wz,
                    (sphi * wy + cphi * wz) / cth,
                ],
                axis=-1,
            )
    else:  # pragma: no cover
        raise ValueError(kind)
    return f


def rk4_rollout(f, initial, u, dt):
    """Classical RK4 on the command grid; commands are linearly
    interpolated inside each step.  Returns all states, shape
    (n,) + initial.shape."""
    initial = np.asarray(initial, dtype=float)
    n = u.shape[0]
    out = np.empty((n,) + initial.shape)
    out[0] = initial
    s = initial
    h = dt
    h2 = 0.5 * dt
    h6 = dt / 6.0
    for k in range(n - 1):
        u0 = u[k]
        u1 = u[k + 1]
        um = 0.5 * (u0 + u1)
        k1 = f(s, u0)
        k2 = f(s + h2 * k1, um)
        k3 = f(s + h2 * k2, um)
        k4 = f(s + h * k3, u1)
        s = s + h6 * (k1 + 2.0 * (k2 + k3) + k4)
        out[k + 1] = s
    return out


def _rk4_rollout_tuples(f, initial, u, dt):
    """Same scheme on plain floats: several times faster for one robot."""
    n = u.shape[0]
    m = len(initial)
    out = np.empty((n, m))
    s = tuple(float(v) for v in initial)
    out[0] = s
    rows = u.tolist()
    h2 = 0.5 * dt
    h6 = dt / 6.0
    rng = range(m)
    for k in range(n - 1):
        u0 = rows[k]
        u1 = rows[k + 1]
        um = [0.5 * (a + b) for a, b in zip(u0, u1)]
        k1 = f(s, u0)
        k2 = f(tuple(s[i] + h2 * k1[i] for i in rng), um)
        k3 = f(tuple(s[i] + h2 * k2[i] for i in rng), um)
        k4 = f(tuple(s[i] + dt * k3[i] for i in rng), u1)
        s = tuple(s[i] + h6 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]) for i in rng)
        out[k + 1] = s
    return out


def integrate(model, initial, cmds, check_speed=True, v_min=1e-6):
    """Forward-integrate the model under the sampled commands.

    Returns the full StateSeries; the base-space projection is available
    as ``result.trajectory(model.base_dim)``.
    """
    initial = np.asarray(initial, dtype=float)
    fields = model.state_fields
    if initial.shape != (len(fields),):
        raise ValueError(f"initial state must have fields {fields}")
    u = cmds.stack(model.command_fields)
    if check_speed:
        # the standing assumption is a strictly positive linear velocity
        if model.kind in ("unicycle", "kinematic_car", "car_with_trailers", "underwater_3d"):
            if float(cmds.series["v"].min()) <= v_min:
                raise ZeroVelocitySample("speed command is not strictly positive")
        elif model.kind in ("type_2_0", "type_2_1", "type_1_1"):
            if float(np.abs(cmds.series["eta1"]).min()) <= v_min or (
                cmds.series["eta1"].min() < 0 < cmds.series["eta1"].max()
            ):
                raise ZeroVelocitySample("eta1 command crosses zero")
        elif model.kind == "type_3_0":
            if float(np.hypot(cmds.series["eta1"], cmds.series["eta2"]).min()) <= v_min:
                raise ZeroVelocitySample("(eta1, eta2) speed is not strictly positive")
    values = rk4_rollout(ode_function(model), initial, u, cmds.dt)
    if model.kind == "underwater_3d":
        if np.min(np.abs(np.cos(values[:, 4]))) < 1e-6:
            raise EulerSingularity("pitch approached +-pi/2 during integration")
    series = StateSeries(cmds.dt, model.kind, fields, values)
    if check_speed:
        traj = series.trajectory(model.base_dim)
        d1 = differentiate(traj, 1)
        smin = float(np.linalg.norm(d1, axis=1).min())
        if smin <= v_min:
            raise ZeroVelocitySample(f"integrated speed dropped to {smin:.3e}")
    return series


def check_admissible(model, traj, tol=None):
    """Regularity report for the trajectory under the model's rules.

    Class I models need the base coordinates to be discretely D2; class II
    models additionally need the heading to be discretely D2; the 3D
    vehicle needs D2 on (x, y, z).
    """
    return check_regularity(traj, tol)


def is_admissible(model, traj, tol=None):
    rep = check_admissible(model, traj, tol)
    if model.admissibility_class == "class2":
        return rep.is_D2 and bool(rep.heading_D2)
    return rep.is_D2


@dataclass
class RecoveryOptions:
    """Free functions the reverse equations leave arbitrary.

    theta_profile: orientation profile for type_3_0 / type_2_1 / type_1_2
        (scalar, series, or None for the model default: constant 0 for
        type_3_0/type_2_1, the path heading for type_1_2, whose reverse
        equations are singular wherever the velocity is perpendicular to
        the chassis axis under a constant profile).
    phi_profile: roll series for the underwater vehicle (None: zeros,
        i.e. keep the roll of the original trajectory when it had none).
    trailer_angles: initial trailer headings (None: aligned with the car).
    """

    theta_profile: object = None
    phi_profile: object = None
    trailer_angles: object = None


def _theta_series(traj, profile, default):
    n = traj.n_samples
    if profile is None:
        profile = default
    if np.isscalar(profile):
        return np.full(n, float(profile))
    arr = np.asarray(profile, dtype=float)
    if arr.shape != (n,):
        raise ValueError("theta/phi profile must be a scalar or match the grid")
    return arr


def recover_commands(model, traj, options=None, check=True, tol=None, v_min=1e-6):
    """Recover commands and non-base variables from a base trajectory.

    Pure algebra (differentiations and arctangents) except for the trailer
    angles, which are obtained by integrating their cascade ODE.  The
    round-trip contract is that ``integrate(model, states[0], commands)``
    reproduces the trajectory to discretization accuracy.
    """
    options = options or RecoveryOptions()
    if traj.dim != model.base_dim:
        raise ValueError(f"{model.kind} expects a {model.base_dim}D trajectory")
    if check and not is_admissible(model, traj, tol):
        rep = check_admissible(model, traj, tol)
        bad = rep.discontinuity_indices + rep.heading_discontinuity_indices
        raise AdmissibilityError(
            f"trajectory is not admissible for {model.kind}: "
            f"discontinuities at samples {bad[:8]}"
        )
    dt = traj.dt
    d1 = differentiate(traj, 1)
    s = np.linalg.norm(d1, axis=1)
    if np.any(s <= v_min):
        raise ZeroVelocitySample("speed below v_min during command recovery")
    kind = model.kind

    if kind in ("unicycle", "type_2_0", "type_1_1", "kinematic_car", "car_with_trailers",
                "type_3_0", "type_2_1", "type_1_2"):
        h = heading(traj, v_min)
        hdot = diff_series(h, dt)

    if kind == "unicycle":
        cmds = {"v": s, "omega": hdot}
        states = np.column_stack([traj.points, h])
    elif kind == "type_2_0":
        th = h - 0.5 * math.pi
        cmds = {"eta1": s, "eta2": hdot}
        states = np.column_stack([traj.points, th])
    elif kind == "type_3_0":
        th = _theta_series(traj, options.theta_profile, 0.0)
        c, sn = np.cos(th), np.sin(th)
        cmds = {
            "eta1": c * d1[:, 0] + sn * d1[:, 1],
            "eta2": -sn * d1[:, 0] + c * d1[:, 1],
            "eta3": diff_series(th, dt),
        }
        states = np.column_stack([traj.points, th])
    elif kind == "type_2_1":
        th = _theta_series(traj, options.theta_profile, 0.0)
        beta = h - 0.5 * math.pi - th
        cmds = {"eta1": s, "eta2": diff_series(th, dt), "zeta1": diff_series(beta, dt)}
        states = np.column_stack([traj.points, th, beta])
    elif kind == "type_1_1":
        L = model.wheelbase
        th = h - 0.5 * math.pi
        beta = np.arctan2(s, L * hdot)
        sinb = np.sin(beta)
        if np.min(np.abs(sinb)) < 1e-8:
            k = int(np.argmin(np.abs(sinb)))
            raise SteeringSingularity(f"sin(beta) ~ 0 at sample {k}")
        cmds = {"eta1": s / (L * sinb), "zeta1": diff_series(beta, dt)}
        states = np.column_stack([traj.points, th, beta])
    elif kind == "type_1_2":
        L = model.wheelbase
        th = options.theta_profile
        th = _theta_series(traj, th, None) if th is not None else h.copy()
        c, sn = np.cos(th), np.sin(th)
        xb = c * d1[:, 0] + sn * d1[:, 1]
        yb = -sn * d1[:, 0] + c * d1[:, 1]
        thdot = diff_series(th, dt)
        A = -xb
        Bv = yb + L * thdot
        Cv = yb - L * thdot
        if np.min(np.abs(A)) < 1e-9 * np.max(s):
            k = int(np.argmin(np.abs(A)))
            raise SteeringSingularity(
                f"velocity perpendicular to the chassis axis at sample {k}; "
                "choose a different orientation profile"
            )
        h1 = np.hypot(A, Bv)
        beta1 = np.unwrap(np.arctan2(A, Bv))
        q2 = Cv * h1 / A
        beta2 = np.unwrap(np.arctan2(h1, q2))
        cmds = {
            "eta1": np.hypot(h1, q2) / (2.0 * L),
            "zeta1": diff_series(beta1, dt),
            "zeta2": diff_series(beta2, dt),
        }
        states = np.column_stack([traj.points, th, beta1, beta2])
    elif kind in ("kinematic_car", "car_with_trailers"):
        L = model.wheelbase
        beta = np.arctan2(L * hdot, s)
        cmds = {"v": s, "zeta": diff_series(beta, dt)}
        states = [traj.points, h, beta]
        if kind == "car_with_trailers":
            thetas = _trailer_angles(model, s, h, dt, options.trailer_angles)
            states.append(thetas)
        states = np.column_stack(states)
    elif kind == "underwater_3d":
        psi = np.unwrap(np.arctan2(d1[:, 1], d1[:, 0]))
        ratio = np.clip(-d1[:, 2] / s, -1.0, 1.0)
        theta = np.arcsin(ratio)
        if np.min(np.abs(np.cos(theta))) < 1e-6:
            raise EulerSingularity("pitch at +-pi/2: heading undefined")
        phi = _theta_series(traj, options.phi_profile, 0.0)
        dphi = diff_series(phi, dt)
        dtheta = diff_series(theta, dt)
        dpsi = diff_series(psi, dt)
        cphi, sphi = np.cos(phi), np.sin(phi)
        cth, sth = np.cos(theta), np.sin(theta)
        cmds = {
            "v": s,
            "wx": dphi - dpsi * sth,
            "wy": dtheta * cphi + dpsi * sphi * cth,
            "wz": -dtheta * sphi + dpsi * cphi * cth,
        }
        states = np.column_stack([traj.points, phi, theta, psi])
    else:  # pragma: no cover
        raise ValueError(kind)

    profile = CommandProfile(dt, cmds)
    return profile, StateSeries(dt, kind, model.state_fields, states)


def _trailer_angles(model, v, theta0, dt, initial):
    """Integrate the trailer heading cascade driven by (v, theta0)."""
    p = model.n_trailers
    hitches = model.hitch_lengths
    if initial is None:
        th = np.full(p, theta0[0])
    else:
        th = np.asarray(initial, dtype=float).copy()
        if th.shape != (p,):
            raise ValueError(f"expected {p} initial trailer angles")

    def f(state, drive):
        vk, th_prev = drive[0], drive[1]
        d = np.empty(p)
        prod = 1.0
        prev = th_prev
        for i in range(p):
            d[i] = vk / hitches[i] * prod * math.sin(prev - state[i])
            prod *= math.cos(prev - state[i])
            prev = state[i]
        return d

    drive = np.column_stack([v, theta0])
    return rk4_rollout(f, th, drive, dt)


@dataclass
class Correspondence:
    """Variable wiring between a user-facing model and its canonical type."""

    canonical_kind: str
    to_canonical: object
    from_canonical: object


def correspondence_map(model):
    """Bijection between user variables and canonical Table variables.

    The unicycle is a (2,1) robot with frozen chassis orientation; the
    kinematic car is a (1,1) robot.  Angles map with a pi/2 offset so the
    canonical forward equations (driving along (-sin, cos)) reproduce the
    familiar (cos, sin) forms.
    """
    if model.kind == "unicycle":
        def to_canonical(d):
            return {
                "theta": 0.0,
                "beta": d["theta"] - 0.5 * math.pi,
                "eta1": d["v"],
                "eta2": 0.0,
                "zeta1": d["omega"],
            }

        def from_canonical(d):
            return {
                "theta": d["theta"] + d["beta"] + 0.5 * math.pi,
                "v": d["eta1"],
                "omega": d["eta2"] + d["zeta1"],
            }

        return Correspondence("type_2_1", to_canonical, from_canonical)
    if model.kind == "kinematic_car":
        L = model.wheelbase

        def to_canonical(d):
            return {
                "theta": d["theta"] - 0.5 * math.pi,
                "beta": 0.5 * math.pi - d["beta"],
                "eta1": d["v"] / (L * math.cos(d["beta"])),
                "zeta1": -d["zeta"],
            }

        def from_canonical(d):
            beta = 0.5 * math.pi - d["beta"]
            return {
                "theta": d["theta"] + 0.5 * math.pi,
                "beta": beta,
                "v": d["eta1"] * L * math.sin(d["beta"]),
                "zeta": -d["zeta1"],
            }

        return Correspondence("type_1_1", to_canonical, from_canonical)
    raise ValueError(f"no correspondence defined for {model.kind}")
