"""Affine maps of the base space and the admissible deformation families.

A deformation at sample index tau leaves the trajectory untouched before
tau and maps every later sample through an affine transformation that
fixes the point C(tau) and the velocity vector v(tau).  Three families are
provided:

* a two-parameter group for class I wheeled robots (shear along the
  tangent plus a stretch along the normal),
* a one-parameter group I + lambda*B for class II robots, where B kills
  v(tau) and sends a(tau) to v(tau),
* a six-parameter family for the 3D underwater vehicle.

Everything is exact algebra on the samples: no re-integration is needed,
and applying a map never accumulates error along the trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    FixedPointMismatch,
    InflectionAtTau,
    SingularDeformation,
    ZeroVelocitySample,
)
from .trajectory import Trajectory, frame_at

DET_MIN = 1e-12
CROSS_GUARD = 1e-8


@dataclass
class AffineMap:
    """Affine transformation F(P) = matrix @ P + translation.

    Maps produced by the deformation families always fix a trajectory
    point and are built through :meth:`from_fixed_point`; the generic
    (matrix, translation) form is kept so compositions that happen to
    have no fixed point (e.g. pure translations) remain representable.
    """

    matrix: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        self.translation = np.asarray(self.translation, dtype=float)
        d = self.matrix.shape[0]
        if self.matrix.shape != (d, d) or self.translation.shape != (d,):
            raise ValueError("matrix/translation shapes are inconsistent")
        if abs(np.linalg.det(self.matrix)) <= DET_MIN:
            raise SingularDeformation(
                f"|det M| = {abs(np.linalg.det(self.matrix)):.3e} below {DET_MIN}"
            )

    @classmethod
    def identity(cls, dim):
        return cls(np.eye(dim), np.zeros(dim))

    @classmethod
    def from_fixed_point(cls, fixed_point, matrix):
        fixed_point = np.asarray(fixed_point, dtype=float)
        matrix = np.asarray(matrix, dtype=float)
        return cls(matrix, fixed_point - matrix @ fixed_point)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def __call__(self, points):
        p = np.asarray(points, dtype=float)
        return p @ self.matrix.T + self.translation

    def fixed_point(self):
        """A fixed point of the map, or None when no point is fixed."""
        d = self.dim
        A = np.eye(d) - self.matrix
        p, *_ = np.linalg.lstsq(A, self.translation, rcond=None)
        if np.linalg.norm(A @ p - self.translation) > 1e-9 * (1.0 + np.linalg.norm(self.translation)):
            return None
        return p

    def inverse(self):
        inv = np.linalg.inv(self.matrix)
        return AffineMap(inv, -inv @ self.translation)

    def frobenius_to_identity(self):
        return float(np.linalg.norm(self.matrix - np.eye(self.dim)))

    def is_identity(self, tol=1e-12):
        return (
            np.max(np.abs(self.matrix - np.eye(self.dim))) <= tol
            and np.max(np.abs(self.translation)) <= tol
        )

    def to_json(self):
        d = {
            "dim": self.dim,
            "matrix": [float(v) for v in self.matrix.ravel()],
            "translation": [float(v) for v in self.translation],
        }
        fp = self.fixed_point()
        if fp is not None:
            d["fixed_point"] = [float(v) for v in fp]
        return d

    @classmethod
    def from_json(cls, d):
        dim = int(d["dim"])
        m = np.array(d["matrix"], dtype=float).reshape(dim, dim)
        if "translation" in d:
            return cls(m, np.array(d["translation"], dtype=float))
        return cls.from_fixed_point(np.array(d["fixed_point"], dtype=float), m)


@dataclass
class ClassIParams:
    """Two-parameter class I deformation at a sample index."""

    tau_index: int
    lam: float
    mu: float


@dataclass
class ClassIIParams:
    """One-parameter class II deformation at a (non-inflection) sample index."""

    tau_index: int
    lam: float


@dataclass
class Uwv6Params:
    """Six-parameter 3D deformation at a sample index."""

    tau_index: int
    lam: float = 0.0
    mu: float = 0.0
    nu: float = 0.0
    xi: float = 0.0
    sigma: float = 0.0
    chi: float = 0.0

    def as_array(self):
        return np.array([self.lam, self.mu, self.nu, self.xi, self.sigma, self.chi])


def class1_map(traj, params, v_min=None):
    """Class I deformation: in the frame at tau the matrix is
    [[1, lam], [0, 1+mu]], which fixes v(tau) by construction."""
    fr = frame_at(traj, params.tau_index) if v_min is None else frame_at(traj, params.tau_index, v_min)
    if abs(1.0 + params.mu) <= DET_MIN:
        raise SingularDeformation("1 + mu must be nonzero")
    Q = fr.basis()
    Mp = np.array([[1.0, params.lam], [0.0, 1.0 + params.mu]])
    return AffineMap.from_fixed_point(traj.points[params.tau_index], Q @ Mp @ Q.T)


def class2_b_matrix(traj, tau_index):
    """The nilpotent generator B with B v(tau) = 0 and B a(tau) = v(tau)."""
    fr = frame_at(traj, tau_index)
    v, a = fr.v, fr.a
    cross = v[0] * a[1] - v[1] * a[0]
    if abs(cross) < CROSS_GUARD * np.linalg.norm(v) * np.linalg.norm(a):
        raise InflectionAtTau(
            f"v and a are (nearly) collinear at sample {tau_index}; "
            "class II deformations are singular at inflection points"
        )
    V = np.column_stack([v, a])
    Z = np.column_stack([np.zeros(2), v])
    return Z @ np.linalg.inv(V)


def class2_map(traj, params):
    """Class II deformation M = I + lambda*B at a non-inflection sample."""
    B = class2_b_matrix(traj, params.tau_index)
    M = np.eye(2) + params.lam * B
    return AffineMap.from_fixed_point(traj.points[params.tau_index], M)


def uwv_map(traj, params):
    """Six-parameter 3D deformation in the frame {u_par, w1, w2} at tau."""
    fr = frame_at(traj, params.tau_index)
    Q = fr.basis()
    Mp = np.array(
        [
            [1.0, params.lam, params.mu],
            [0.0, 1.0 + params.nu, params.xi],
            [0.0, params.sigma, 1.0 + params.chi],
        ]
    )
    if abs(np.linalg.det(Mp)) <= DET_MIN:
        raise SingularDeformation("deformation parameters give a singular matrix")
    return AffineMap.from_fixed_point(traj.points[params.tau_index], Q @ Mp @ Q.T)


def apply_map(traj, amap, tau_index, fixed_point_tol=1e-9):
    """Deform the trajectory: identity before tau, F(C(t)) from tau on.

    The map must fix C(tau) to within fixed_point_tol; samples before
    tau_index are returned bit-identical.
    """
    if amap.dim != traj.dim:
        raise ValueError("map dimension does not match trajectory dimension")
    if not 0 <= tau_index < traj.n_samples:
        raise ValueError(f"tau_index {tau_index} out of range")
    c_tau = traj.points[tau_index]
    if np.linalg.norm(amap(c_tau) - c_tau) > fixed_point_tol:
        raise FixedPointMismatch(
            f"map moves C(tau) by {np.linalg.norm(amap(c_tau) - c_tau):.3e}"
        )
    new = traj.points.copy()
    new[tau_index:] = amap(traj.points[tau_index:])
    return traj.with_points(new)


def compose(f2, f1):
    """The affine map P -> f2(f1(P))."""
    if f2.dim != f1.dim:
        raise ValueError("cannot compose maps of different dimensions")
    return AffineMap(f2.matrix @ f1.matrix, f2.matrix @ f1.translation + f2.translation)


def apply_piecewise(traj, deformations):
    """Apply several deformations using composed maps on each interval.

    ``deformations`` is a list of (tau_index, AffineMap) sorted by tau.
    Instead of deforming the trajectory once per map, the k-th interval
    [tau_k, tau_k+1) receives the single composition f_k o ... o f_1.
    The result equals sequential application of the individual maps.
    """
    deformations = sorted(deformations, key=lambda tf: tf[0])
    new = traj.points.copy()
    running = None
    for i, (tau, f) in enumerate(deformations):
        running = f if running is None else compose(f, running)
        stop = deformations[i + 1][0] if i + 1 < len(deformations) else traj.n_samples
        new[tau:stop] = running(traj.points[tau:stop])
    return traj.with_points(new)


@dataclass
class MapAdmissibilityReport:
    """Residuals of the algebraic admissibility conditions for a map at tau."""

    passed: bool
    velocity_residual: float
    acceleration_residual: float | None
    velocity_tol: float
    acceleration_tol: float | None


def admissibility_of_map(traj, amap, tau_index, model):
    """Check the velocity-fixing condition, and for class II models also
    that M a(tau) - a(tau) is collinear with v(tau)."""
    fr = frame_at(traj, tau_index)
    v, a = fr.v, fr.a
    vres = float(np.linalg.norm(amap.matrix @ v - v))
    vtol = 1e-9 * max(1.0, fr.speed)
    # the fixed point must also coincide with C(tau)
    c_tau = traj.points[tau_index]
    vres = max(vres, float(np.linalg.norm(amap(c_tau) - c_tau)))
    ares = None
    atol = None
    if getattr(model, "admissibility_class", "class2") == "class2":
        r = amap.matrix @ a - a
        ares = float(abs(r[0] * v[1] - r[1] * v[0]) / fr.speed)
        atol = 1e-9 * max(1.0, float(np.linalg.norm(a)))
    passed = vres <= vtol and (ares is None or ares <= atol)
    return MapAdmissibilityReport(
        passed=passed,
        velocity_residual=vres,
        acceleration_residual=ares,
        velocity_tol=vtol,
        acceleration_tol=atol,
    )
