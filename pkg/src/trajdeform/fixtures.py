"""Built-in analytic trajectories used by demos, scenarios and tests.

The grid step is fitted to the requested duration (n = round(T/dt) + 1,
dt = T/(n-1)) so the stated endpoints are hit exactly.
"""

from __future__ import annotations

import math

import numpy as np

from .kinematics import CommandProfile, integrate, unicycle
from .trajectory import Trajectory


def _grid(duration, dt):
    n = int(round(duration / dt)) + 1
    dt = duration / (n - 1)
    return n, dt, np.arange(n) * dt


def circle(radius=1.0, speed=1.0, duration=math.pi, dt=1e-3, heading0=0.0, start=(0.0, 0.0)):
    """Counter-clockwise circular arc starting at ``start`` with the given
    initial heading; with the defaults it runs from (0,0) to (0,2)."""
    n, dt, t = _grid(duration, dt)
    w = speed / radius
    x = radius * np.sin(w * t)
    y = radius * (1.0 - np.cos(w * t))
    c, s = math.cos(heading0), math.sin(heading0)
    pts = np.column_stack([c * x - s * y + start[0], s * x + c * y + start[1]])
    return Trajectory(dt, pts)


def line(speed=1.0, duration=1.0, dt=1e-3, heading0=0.0, start=(0.0, 0.0)):
    n, dt, t = _grid(duration, dt)
    d = np.array([math.cos(heading0), math.sin(heading0)])
    return Trajectory(dt, np.asarray(start) + np.outer(speed * t, d))


def scurve(speed=1.0, duration=3.0, dt=1e-3, turn_rate=1.0, cycles=1.0,
           heading0=0.0, start=(0.0, 0.0)):
    """Smooth S-shaped curve with sinusoidal turn rate.

    Produced by forward-integrating a unicycle, so it is admissible for
    every model by construction (heading rate is smooth).
    """
    n, dt, t = _grid(duration, dt)
    omega = turn_rate * np.sin(2.0 * math.pi * cycles * t / duration)
    cmds = CommandProfile(dt, {"v": np.full(n, speed), "omega": omega})
    states = integrate(unicycle(), np.array([start[0], start[1], heading0]), cmds)
    return states.trajectory(2)


def helix(radius=1.0, angular_rate=1.0, climb_rate=1.0, duration=3.0, dt=1e-3):
    """3D helix (r cos wt, r sin wt, c t); speed is sqrt(r^2 w^2 + c^2)."""
    n, dt, t = _grid(duration, dt)
    pts = np.column_stack(
        [radius * np.cos(angular_rate * t), radius * np.sin(angular_rate * t), climb_rate * t]
    )
    return Trajectory(dt, pts)


def curvature_step(speed=1.0, straight_time=1.0, omega_after=1.0, duration=2.5, dt=1e-3,
                   heading0=0.0, start=(0.0, 0.0)):
    """Straight segment joined to a circular arc.

    The velocity vector is continuous at the junction but the heading rate
    jumps, so the curve is admissible for class I robots only.  The break
    time is snapped to the grid.
    """
    n, dt, t = _grid(duration, dt)
    kb = int(round(straight_time / dt))
    x = np.empty(n)
    y = np.empty(n)
    tb = kb * dt
    x[: kb + 1] = speed * t[: kb + 1]
    y[: kb + 1] = 0.0
    r = speed / omega_after
    ta = t[kb:] - tb
    x[kb:] = speed * tb + r * np.sin(omega_after * ta)
    y[kb:] = r * (1.0 - np.cos(omega_after * ta))
    c, s = math.cos(heading0), math.sin(heading0)
    pts = np.column_stack([c * x - s * y + start[0], s * x + c * y + start[1]])
    return Trajectory(dt, pts)


def corner(speed=1.0, leg_time=1.0, angle=0.5, dt=1e-3):
    """Two straight legs meeting at a corner: a genuine C1 break."""
    n_leg = int(round(leg_time / dt))
    n = 2 * n_leg + 1
    t = np.arange(n) * dt
    d1 = np.array([1.0, 0.0])
    d2 = np.array([math.cos(angle), math.sin(angle)])
    pts = np.empty((n, 2))
    pts[: n_leg + 1] = np.outer(speed * t[: n_leg + 1], d1)
    apex = pts[n_leg]
    pts[n_leg:] = apex + np.outer(speed * (t[n_leg:] - t[n_leg]), d2)
    return Trajectory(dt, pts)


GENERATORS = {
    "circle": circle,
    "line": line,
    "scurve": scurve,
    "helix": helix,
    "curvature_step": curvature_step,
    "corner": corner,
}


def generate_builtin(name, params=None):
    """Instantiate a built-in generator by name with keyword parameters."""
    if name not in GENERATORS:
        raise ValueError(f"unknown generator {name!r}; known: {sorted(GENERATORS)}")
    return GENERATORS[name](**(params or {}))
