import math

import numpy as np
import pytest

import trajdeform as td
from trajdeform.errors import NonUniformGrid, TrajectoryTooShort, ZeroVelocitySample
from trajdeform.fixtures import circle, corner, curvature_step, line, scurve


def _traj_from_fn(fn, t0, t1, dt):
    t = np.arange(t0 / dt, t1 / dt + 0.5).astype(int) * dt
    return td.Trajectory(dt, np.column_stack(fn(t)))


def test_trajectory_invariants():
    with pytest.raises(TrajectoryTooShort):
        td.Trajectory(0.1, np.zeros((5, 2)))
    with pytest.raises(ValueError):
        td.Trajectory(-0.1, np.zeros((10, 2)))
    with pytest.raises(ValueError):
        td.Trajectory(0.1, np.zeros((10, 4)))


def test_differentiate_exact_on_linear():
    dt = 0.125  # exactly representable so the stencil algebra is bitwise exact
    t = np.arange(20) * dt
    tr = td.Trajectory(dt, np.column_stack([t, np.zeros_like(t)]))
    d1 = td.differentiate(tr, 1)
    assert np.array_equal(d1[:, 0], np.ones(20))
    # and on a generic grid, exact to rounding
    tr = td.Trajectory(0.1, np.column_stack([np.arange(20) * 0.1, np.zeros(20)]))
    np.testing.assert_allclose(td.differentiate(tr, 1)[:, 0], 1.0, rtol=0, atol=1e-13)


def test_differentiate_exact_on_quadratic():
    dt = 0.125
    t = np.arange(20) * dt
    tr = td.Trajectory(dt, np.column_stack([t**2, t]))
    d2 = td.differentiate(tr, 2)
    np.testing.assert_allclose(d2[:, 0], 2.0, rtol=0, atol=1e-12)
    np.testing.assert_allclose(d2[:, 1], 0.0, rtol=0, atol=1e-12)


def test_differentiate_sine_accuracy():
    dt = 1e-3
    t = np.arange(0, 1.0 + dt / 2, dt)
    tr = td.Trajectory(dt, np.column_stack([np.sin(t), t]))
    d1 = td.differentiate(tr, 1)
    assert np.max(np.abs(d1[:, 0] - np.cos(t))) < 1e-6


def test_differentiate_bad_order():
    with pytest.raises(ValueError):
        td.differentiate(circle(), 3)


def test_frame_circle_quarter():
    # C(t) = (sin t, 1 - cos t): at t = pi/2 the velocity is (0, 1)
    tr = circle(duration=math.pi)
    k = tr.n_samples // 2
    fr = td.frame_at(tr, k)
    np.testing.assert_allclose(fr.u_par, [0, 1], atol=1e-6)
    np.testing.assert_allclose(fr.u_perp, [-1, 0], atol=1e-6)


def test_frame_straight_line():
    tr = line(duration=1.0)
    fr = td.frame_at(tr, 50)
    np.testing.assert_allclose(fr.u_par, [1, 0], atol=1e-12)
    np.testing.assert_allclose(fr.u_perp, [0, 1], atol=1e-12)
    np.testing.assert_allclose(fr.a, [0, 0], atol=1e-9)


def test_frame_helix_analytic():
    tr = td.generate_builtin("helix", {"duration": 2.0})
    fr = td.frame_at(tr, 0)
    np.testing.assert_allclose(fr.u_par, np.array([0, 1, 1]) / math.sqrt(2), atol=1e-6)
    np.testing.assert_allclose(fr.w1, [-1, 0, 0], atol=1e-6)
    np.testing.assert_allclose(fr.w2, np.array([0, -1, 1]) / math.sqrt(2), atol=1e-6)


def test_frame_orthonormality():
    for tr in (scurve(duration=2.0, dt=2e-3), td.generate_builtin("helix", {"duration": 2.0, "dt": 2e-3})):
        for k in (0, 7, tr.n_samples // 2, tr.n_samples - 1):
            Q = td.frame_at(tr, k).basis()
            np.testing.assert_allclose(Q.T @ Q, np.eye(tr.dim), atol=1e-12)
            if tr.dim == 3:
                assert np.linalg.det(Q) > 0  # right-handed


def test_frame_3d_fallback_when_a_parallel_v():
    # straight 3D line: acceleration vanishes, w1 falls back to the z-axis rule
    dt = 1e-3
    t = np.arange(1001) * dt
    tr = td.Trajectory(dt, np.column_stack([t, t, np.zeros_like(t)]))
    fr = td.frame_at(tr, 500)
    np.testing.assert_allclose(fr.w1, [0, 0, 1], atol=1e-9)
    # tangent along z: fallback switches to the x-axis rule
    tr2 = td.Trajectory(dt, np.column_stack([np.zeros_like(t), np.zeros_like(t), t]))
    fr2 = td.frame_at(tr2, 500)
    assert abs(fr2.w1 @ fr2.u_par) < 1e-12


def test_frame_zero_velocity():
    dt = 1e-3
    pts = np.zeros((100, 2))
    tr = td.Trajectory(dt, pts + 1e-12 * np.random.default_rng(0).normal(size=(100, 2)))
    with pytest.raises(ZeroVelocitySample):
        td.frame_at(tr, 50)


def test_heading_straight_line():
    assert np.max(np.abs(td.heading(line()))) < 1e-12


def test_heading_circle_unwrapped():
    # classic parameterization (cos t, sin t): heading is t + pi/2
    dt = 1e-3
    t = np.arange(0, 2 * math.pi, dt)
    tr = td.Trajectory(dt, np.column_stack([np.cos(t), np.sin(t)]))
    th = td.heading(tr)
    np.testing.assert_allclose(th, t + math.pi / 2, atol=1e-5)
    assert np.max(np.abs(np.diff(th))) < math.pi


def test_heading_negative_x_branch():
    tr = line(heading0=math.pi, duration=1.0)
    th = td.heading(tr)
    np.testing.assert_allclose(th, math.pi, atol=1e-12)


def test_regularity_smooth():
    rep = td.check_regularity(scurve())
    assert rep.is_D2 and rep.heading_D2
    assert rep.discontinuity_indices == []


def test_regularity_corner():
    tr = corner()
    rep = td.check_regularity(tr)
    assert not rep.is_D2
    assert rep.discontinuity_indices == [tr.n_samples // 2]


def test_regularity_curvature_step():
    tr = curvature_step(straight_time=1.0, duration=2.5)
    rep = td.check_regularity(tr)
    assert rep.is_D2
    assert rep.heading_D2 is False
    kb = int(round(1.0 / tr.dt))
    assert any(abs(i - kb) <= 1 for i in rep.heading_discontinuity_indices)


def test_regularity_3d_heading_is_none():
    rep = td.check_regularity(td.generate_builtin("helix", {}))
    assert rep.is_D2 and rep.heading_D2 is None


def test_inflection_circle_empty():
    assert td.inflection_indices(circle()) == []


def test_inflection_cubic():
    t = (np.arange(2001) - 1000) * 1e-3
    tr = td.Trajectory(1e-3, np.column_stack([t, t**3]))
    assert td.inflection_indices(tr) == [1000]


def test_inflection_straight_line_all_interior():
    tr = line()
    flagged = set(td.inflection_indices(tr))
    assert set(range(1, tr.n_samples - 1)) <= flagged


def test_csv_roundtrip(tmp_path):
    tr = scurve(duration=1.0, dt=5e-3)
    path = tmp_path / "traj.csv"
    td.save_csv(tr, path)
    back = td.load_csv(path)
    assert abs(back.dt - tr.dt) < 1e-12 * tr.dt
    np.testing.assert_allclose(back.points, tr.points, atol=1e-11)
    header = path.read_text().splitlines()[0]
    assert header == "t,x,y"


def test_csv_3d_and_rejects_nonuniform(tmp_path):
    tr = td.generate_builtin("helix", {"duration": 0.5, "dt": 5e-3})
    path = tmp_path / "h.csv"
    td.save_csv(tr, path)
    assert td.load_csv(path).dim == 3

    rows = path.read_text().splitlines()
    parts = rows[5].split(",")
    parts[0] = f"{float(parts[0]) + 1e-4:.12g}"
    rows[5] = ",".join(parts)
    bad = tmp_path / "bad.csv"
    bad.write_text("\n".join(rows) + "\n")
    with pytest.raises(NonUniformGrid):
        td.load_csv(bad)
