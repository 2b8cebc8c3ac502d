import math

import numpy as np
import pytest

import trajdeform as td
from trajdeform.errors import AdmissibilityError, EulerSingularity, ZeroVelocitySample
from trajdeform.fixtures import circle, corner, curvature_step, line, scurve
from trajdeform.kinematics import CommandProfile, RecoveryOptions
from trajdeform.trajectory import _series_jumps, diff_series

DT = 1e-3

ALL_2D_MODELS = [
    td.type_3_0(),
    td.type_2_0(),
    td.type_2_1(),
    td.type_1_1(0.7),
    td.type_1_2(0.4),
    td.unicycle(),
    td.kinematic_car(0.8),
    td.car_with_trailers(0.8, (0.3, 0.25)),
]


def _const_cmds(n, dt, **kv):
    return CommandProfile(dt, {k: np.full(n, float(v)) for k, v in kv.items()})


def test_integrate_unicycle_straight():
    cmds = _const_cmds(1001, DT, v=1.0, omega=0.0)
    out = td.integrate(td.unicycle(), np.zeros(3), cmds)
    np.testing.assert_allclose(out.values[-1], [1.0, 0.0, 0.0], atol=1e-10)


def test_integrate_unicycle_circle():
    T = 2.0
    cmds = _const_cmds(2001, DT, v=1.0, omega=1.0)
    out = td.integrate(td.unicycle(), np.zeros(3), cmds)
    np.testing.assert_allclose(out.values[-1, :2], [math.sin(T), 1 - math.cos(T)], atol=1e-8)


def test_integrate_car_straight():
    cmds = _const_cmds(1001, DT, v=1.0, zeta=0.0)
    out = td.integrate(td.kinematic_car(1.0), np.zeros(4), cmds)
    assert np.max(np.abs(out["theta"])) < 1e-12
    np.testing.assert_allclose(out.values[-1, :2], [1.0, 0.0], atol=1e-10)


def test_integrate_zero_speed_rejected():
    n = 1001
    v = np.linspace(1.0, -0.2, n)
    cmds = CommandProfile(DT, {"v": v, "omega": np.zeros(n)})
    with pytest.raises(ZeroVelocitySample):
        td.integrate(td.unicycle(), np.zeros(3), cmds)


def test_recover_straight_line_unicycle():
    cmds, states = td.recover_commands(td.unicycle(), line(duration=1.0))
    np.testing.assert_allclose(cmds.series["v"], 1.0, atol=1e-9)
    np.testing.assert_allclose(cmds.series["omega"], 0.0, atol=1e-9)


def test_recover_circle_type20():
    # CCW unit circle: eta1 = 1, eta2 = 1 (heading is t + const)
    tr = circle(duration=2.5)
    cmds, states = td.recover_commands(td.type_2_0(), tr)
    np.testing.assert_allclose(cmds.series["eta1"], 1.0, atol=1e-6)
    np.testing.assert_allclose(cmds.series["eta2"], 1.0, atol=1e-4)


def test_recover_circle_kinematic_car():
    # unit circle with L = 1: tan(beta) = L/R = 1, so beta = pi/4 and zeta = 0
    tr = circle(duration=2.5)
    cmds, states = td.recover_commands(td.kinematic_car(1.0), tr)
    np.testing.assert_allclose(states["beta"][5:-5], math.pi / 4, atol=1e-6)
    np.testing.assert_allclose(cmds.series["zeta"][5:-5], 0.0, atol=1e-3)
    np.testing.assert_allclose(cmds.series["v"], 1.0, atol=1e-6)


def test_recover_circle_type11_value():
    tr = circle(duration=2.5)
    cmds, states = td.recover_commands(td.type_1_1(1.0), tr)
    np.testing.assert_allclose(cmds.series["eta1"][5:-5], math.sqrt(2.0), atol=1e-5)


@pytest.mark.parametrize("model", ALL_2D_MODELS, ids=lambda m: m.kind)
def test_roundtrip_2d(model):
    tr = scurve(duration=1.6, turn_rate=1.2)
    cmds, states = td.recover_commands(model, tr)
    out = td.integrate(model, states.values[0], cmds)
    err = np.max(np.abs(out.values[:, :2] - tr.points))
    assert err < 1e-4, f"{model.kind}: roundtrip error {err:.2e}"


def test_roundtrip_underwater():
    tr = td.generate_builtin("helix", {"duration": 1.6})
    cmds, states = td.recover_commands(td.underwater_3d(), tr)
    out = td.integrate(td.underwater_3d(), states.values[0], cmds)
    err = np.max(np.abs(out.values[:, :3] - tr.points))
    assert err < 1e-4


def test_underwater_forward_equations_pointwise():
    tr = td.generate_builtin("helix", {"duration": 1.6})
    cmds, states = td.recover_commands(td.underwater_3d(), tr)
    d1 = td.differentiate(tr, 1)
    v, th, psi = cmds.series["v"], states["theta"], states["psi"]
    assert np.max(np.abs(d1[:, 0] - v * np.cos(psi) * np.cos(th))) < 1e-9
    assert np.max(np.abs(d1[:, 1] - v * np.sin(psi) * np.cos(th))) < 1e-9
    assert np.max(np.abs(d1[:, 2] + v * np.sin(th))) < 1e-9


def test_underwater_roll_profile_preserved():
    tr = td.generate_builtin("helix", {"duration": 1.6})
    phi = 0.3 * np.sin(np.linspace(0, 2, tr.n_samples))
    cmds, states = td.recover_commands(
        td.underwater_3d(), tr, RecoveryOptions(phi_profile=phi)
    )
    np.testing.assert_array_equal(states["phi"], phi)
    out = td.integrate(td.underwater_3d(), states.values[0], cmds)
    assert np.max(np.abs(out["phi"] - phi)) < 1e-5


def test_underwater_euler_singularity():
    dt = 1e-3
    t = np.arange(1001) * dt
    tr = td.Trajectory(dt, np.column_stack([np.full_like(t, 1e-9), np.zeros_like(t), -t]))
    with pytest.raises(EulerSingularity):
        td.recover_commands(td.underwater_3d(), tr)


def test_recovered_commands_regularity():
    from trajdeform.kinematics import D1_COMMAND_FIELDS

    tr = scurve(duration=1.6, turn_rate=1.2)
    for model in ALL_2D_MODELS:
        cmds, _ = td.recover_commands(model, tr)
        for name, series in cmds.series.items():
            assert np.all(np.isfinite(series)), f"{model.kind}:{name}"
        for name in D1_COMMAND_FIELDS[model.kind]:
            jump, local = _series_jumps(cmds.series[name], tr.dt)
            scale = max(1.0, float(np.nanmax(local)))
            assert np.max(jump) < 50 * tr.dt * scale, f"{model.kind}:{name}"


def test_admissibility_dispatch():
    smooth = circle(duration=2.0)
    step = curvature_step()
    broken = corner()
    for model in ALL_2D_MODELS:
        assert td.is_admissible(model, smooth), model.kind
        assert not td.is_admissible(model, broken), model.kind
        expect = model.admissibility_class == "class1"
        assert td.is_admissible(model, step) == expect, model.kind
    assert td.is_admissible(td.underwater_3d(), td.generate_builtin("helix", {}))


def test_recover_rejects_inadmissible():
    with pytest.raises(AdmissibilityError):
        td.recover_commands(td.kinematic_car(1.0), curvature_step())


def test_trailer_alignment_on_straight_tail():
    # steer through an S then hold a straight tail longer than 5 max(L_i)/v
    dt = 1e-3
    t_turn, t_tail = 2.0, 2.0
    n1, n2 = int(t_turn / dt), int(t_tail / dt)
    n = n1 + n2 + 1
    t = np.arange(n) * dt
    omega = np.where(t < t_turn, 0.9 * np.sin(2 * math.pi * t / t_turn), 0.0)
    cmds = CommandProfile(dt, {"v": np.ones(n), "omega": omega})
    tr = td.integrate(td.unicycle(), np.zeros(3), cmds).trajectory(2)

    model = td.car_with_trailers(0.4, (0.3, 0.2))
    _, states = td.recover_commands(model, tr)
    dev = np.maximum(
        np.abs(states["theta1"] - states["theta0"]),
        np.abs(states["theta2"] - states["theta0"]),
    )
    tail = dev[n1:]
    assert np.all(np.diff(tail) <= 1e-9)
    assert tail[-1] < 0.1 * max(tail[0], 1e-12) + 1e-9


def test_correspondence_examples():
    uni = td.correspondence_map(td.unicycle())
    assert uni.canonical_kind == "type_2_1"
    c = uni.to_canonical({"theta": math.pi / 2, "v": 1.2, "omega": 0.3})
    assert abs(c["beta"]) < 1e-15 and c["eta1"] == 1.2 and c["zeta1"] == 0.3

    car = td.correspondence_map(td.kinematic_car(2.0))
    c2 = car.to_canonical({"theta": 0.4, "beta": 0.0, "v": 2.0, "zeta": 0.1})
    assert abs(c2["beta"] - math.pi / 2) < 1e-15
    assert abs(c2["eta1"] - 1.0) < 1e-15  # v/(L cos 0) = 2/2

    rng = np.random.default_rng(7)
    for _ in range(25):
        d = {
            "theta": rng.uniform(-3, 3),
            "beta": rng.uniform(-1.2, 1.2),
            "v": rng.uniform(0.1, 3),
            "zeta": rng.uniform(-1, 1),
        }
        back = car.from_canonical(car.to_canonical(d))
        for k in d:
            assert abs(back[k] - d[k]) < 1e-12
        du = {"theta": rng.uniform(-3, 3), "v": rng.uniform(0.1, 3), "omega": rng.uniform(-1, 1)}
        backu = uni.from_canonical(uni.to_canonical(du))
        for k in du:
            assert abs(backu[k] - du[k]) < 1e-12


def test_roundtrip_through_correspondence():
    # canonical (1,1) commands mapped to car commands reproduce the same motion
    tr = scurve(duration=1.6, turn_rate=1.0)
    L = 0.8
    cmds_r, states_r = td.recover_commands(td.type_1_1(L), tr)
    corr = td.correspondence_map(td.kinematic_car(L))
    n = cmds_r.length
    v = np.empty(n)
    zeta = np.empty(n)
    for k in range(n):
        d = corr.from_canonical(
            {
                "theta": states_r["theta"][k],
                "beta": states_r["beta"][k],
                "eta1": cmds_r.series["eta1"][k],
                "zeta1": cmds_r.series["zeta1"][k],
            }
        )
        v[k] = d["v"]
        zeta[k] = d["zeta"]
    cmds_car, states_car = td.recover_commands(td.kinematic_car(L), tr)
    np.testing.assert_allclose(v, cmds_car.series["v"], atol=1e-9)
    np.testing.assert_allclose(zeta, cmds_car.series["zeta"], atol=1e-9)
