import math

import numpy as np
import pytest

from ptreach import (
    AnnulusWarning,
    ConfigError,
    IntegrationError,
    Region,
    SimConfig,
    SystemModel,
    TimeWarp,
    derive_constants,
    lie_a0,
    lie_b0,
    locate_event,
    measure_times,
    rk4_step,
    simulate,
)


# ---------------------------------------------------------------- rk4_step


def test_rk4_exponential_decay():
    x = rk4_step(lambda t, x: -x, 0.0, np.array([1.0]), 0.1)
    assert x[0] == pytest.approx(math.exp(-0.1), abs=1e-7)


def test_rk4_constant_and_linear():
    x = rk4_step(lambda t, x: np.zeros(2), 0.0, np.array([3.0, -1.0]), 0.7)
    assert np.array_equal(x, [3.0, -1.0])
    x = rk4_step(lambda t, x: np.ones(1), 0.0, np.array([0.0]), 0.5)
    assert x[0] == pytest.approx(0.5, abs=1e-15)  # exact for low-degree polynomials


def test_rk4_nonfinite_raises():
    with pytest.raises(IntegrationError):
        rk4_step(lambda t, x: x * np.inf, 0.0, np.array([1.0]), 0.1)


# ------------------------------------------------------------ locate_event


def _identity_flow(t0, dt):
    # state is just elapsed time; lets predicates be written on tau directly
    return lambda tau: np.array([tau])


def test_locate_event_linear_midstep():
    t_e, x_e = locate_event(_identity_flow(0.0, 1.0), lambda s: s[0] - 0.5, 0.0, 1.0, 1e-8)
    assert t_e == pytest.approx(0.5, abs=1e-8)
    assert x_e[0] == pytest.approx(0.5, abs=1e-8)


def test_locate_event_double_crossing():
    # negative only on (0.3, 0.7): endpoints share a sign; substep scan finds it
    pred = lambda s: (s[0] - 0.3) * (s[0] - 0.7)  # noqa: E731
    t_e, _ = locate_event(_identity_flow(0.0, 1.0), pred, 0.0, 1.0, 1e-8)
    assert t_e == pytest.approx(0.3, abs=1e-8)


def test_locate_event_no_crossing_is_an_error():
    with pytest.raises(ValueError):
        locate_event(_identity_flow(0.0, 1.0), lambda s: 1.0 + s[0], 0.0, 1.0, 1e-8)


def test_terminal_entry_localization_is_step_insensitive(example):
    bundle, cfg, _ = example
    runs = []
    for dt in (1e-4, 1e-5):
        sim = SimConfig(x0=(1.0, 1.5), t_end=1.0, dt=dt)
        runs.append(simulate(sim, cfg, bundle.model, bundle.clf, bundle.target))
    assert runs[0].t_m == pytest.approx(runs[1].t_m, abs=1e-6)


# --------------------------------------------------------------- simulate


def test_terminal_start_converges_within_horizon(run_dm):
    assert run_dm.converged
    assert run_dm.v[-1] <= 1e-12
    assert run_dm.t[-1] <= 5.0
    assert run_dm.t0 == 0.0 and run_dm.t_m == 0.0


def test_outside_start_converges(run_out):
    assert run_out.converged
    assert run_out.v[-1] <= 1e-12
    assert run_out.t[-1] == pytest.approx(5.6, abs=5e-3)
    assert run_out.t0 == 0.0
    assert 0.0 < run_out.t_m < 1.0


def test_boundary_start_is_single_row(example):
    bundle, cfg, _ = example
    traj = simulate(SimConfig(x0=(1.0, 0.0), t_end=5.0), cfg, bundle.model, bundle.clf, bundle.target)
    assert traj.converged and len(traj.t) == 1
    assert traj.u[0] == 0.0
    assert traj.reach_time == 0.0


def test_rows_are_strictly_increasing_and_saturated(run_far, example):
    _, cfg, _ = example
    assert np.all(np.diff(run_far.t) > 0)
    assert np.all(np.abs(run_far.u) <= cfg.u_max + 1e-9)
    assert np.all(np.diff(run_far.region) >= 0)  # monotone region progression


def test_far_start_passes_through_all_regions(run_far):
    assert set(run_far.region.tolist()) == {0, 1, 2}
    assert run_far.left_annulus  # starts at set distance 5.25 > 3
    assert run_far.converged


def test_annulus_warning_emitted(example):
    bundle, cfg, _ = example
    with pytest.warns(AnnulusWarning):
        simulate(SimConfig(x0=(2.5, 0.0), t_end=0.01), cfg, bundle.model, bundle.clf, bundle.target)


def test_inside_annulus_run_has_no_flag(run_out):
    assert not run_out.left_annulus


def test_measure_times_terminal_start(run_dm):
    times = measure_times(run_dm)
    assert times.t0 == 0.0 and times.t_m == 0.0 and times.t1 == 0.0
    assert times.reach_time is not None and times.reach_time <= 5.0


def test_measure_times_staged_run(run_far):
    times = measure_times(run_far)
    assert 0.0 < times.t0 < times.t_m
    assert times.t1 == pytest.approx(times.t_m - times.t0, abs=1e-15)
    assert times.reach_time == pytest.approx(run_far.t[-1], abs=1e-12)


def test_measure_times_absent_events(example):
    bundle, cfg, _ = example
    traj = simulate(SimConfig(x0=(2.5, 0.0), t_end=0.01), cfg, bundle.model, bundle.clf, bundle.target)
    times = measure_times(traj)
    assert times.t0 is None and times.t_m is None and times.t1 is None
    assert times.reach_time is None


def test_outside_start_matches_classify_prediction(run_out, example):
    # x0 with |ubar(1, x0)| < u_max and V above the threshold: t0 = 0, t_m > 0
    assert run_out.region[0] == int(Region.IN_D0)
    assert run_out.t0 == 0.0 and run_out.t_m > 0.0


def test_step_halving_changes_reach_time_marginally(example, run_out):
    bundle, cfg, _ = example
    sim = SimConfig(x0=(1.0, 1.5), t_end=20.0, dt=5e-5)
    halved = simulate(sim, cfg, bundle.model, bundle.clf, bundle.target)
    assert halved.reach_time == pytest.approx(run_out.reach_time, abs=1e-5)


def test_stretched_slope_matches_decay_identity(run_out, example):
    # dV/ds reconstructed from logged rows equals -mu*sqrt(a0^2+b0^4)
    bundle, cfg, _ = example
    warp = TimeWarp(cfg.T)
    idx = np.flatnonzero(run_out.region == int(Region.IN_DM))
    checked = 0
    for i, j in zip(idx[:-1], idx[1:]):
        s_i = warp.theta_inverse(run_out.t[i] - run_out.t_m)
        s_j = warp.theta_inverse(run_out.t[j] - run_out.t_m)
        ds = s_j - s_i
        if ds > 1e-3 or run_out.v[j] < 1e-8:
            continue
        slope = (run_out.v[j] - run_out.v[i]) / ds
        w_i = math.hypot(
            lie_a0(bundle.clf, bundle.model, run_out.x[i]),
            lie_b0(bundle.clf, bundle.model, run_out.x[i]) ** 2,
        )
        w_j = math.hypot(
            lie_a0(bundle.clf, bundle.model, run_out.x[j]),
            lie_b0(bundle.clf, bundle.model, run_out.x[j]) ** 2,
        )
        expected = -cfg.mu * 0.5 * (w_i + w_j)
        assert slope == pytest.approx(expected, rel=1e-3)
        checked += 1
    assert checked > 1000


def test_decay_envelope_inside_terminal_region(run_dm, example):
    _, cfg, dc = example
    warp = TimeWarp(cfg.T)
    v0 = run_dm.v[0]
    rate = cfg.mu * dc.c / cfg.bounds.c2
    for i in range(len(run_dm.t)):
        s = warp.theta_inverse(run_dm.t[i] - run_dm.t_m)
        assert run_dm.v[i] <= v0 * math.exp(-rate * s) * (1.0 + 1e-6)


def test_control_envelope_inside_terminal_region(run_dm, example):
    _, cfg, dc = example
    warp = TimeWarp(cfg.T)
    v0 = run_dm.v[0]
    amp = dc.k * math.sqrt(v0 / cfg.bounds.c1)
    for i in range(len(run_dm.t)):
        s = warp.theta_inverse(run_dm.t[i] - run_dm.t_m)
        bound = amp * math.exp((1.0 / cfg.T - dc.m2) * s)
        assert abs(run_dm.u[i]) <= bound * (1.0 + 1e-3)


def test_saturated_negative_drift(example):
    # reversed drift makes a0 < 0 outside the unsaturated region, the case
    # where the saturated branch guarantees dV/dt <= -delta*mu*d
    bundle, cfg, dc = example
    rev = SystemModel(
        dim=2,
        drift=lambda x: -bundle.model.drift(x),
        input_map=bundle.model.input_map,
    )
    traj = simulate(SimConfig(x0=(4.0, 0.0), t_end=0.05), cfg, rev, bundle.clf, bundle.target)
    checked = 0
    for i in range(len(traj.t)):
        if traj.region[i] != int(Region.OUTSIDE_D0):
            continue
        a0 = lie_a0(bundle.clf, rev, traj.x[i])
        if a0 >= 0:
            continue
        b0 = lie_b0(bundle.clf, rev, traj.x[i])
        vdot = a0 + b0 * traj.u[i]
        assert vdot <= -dc.delta * cfg.mu * traj.set_distance[i] + 1e-6
        checked += 1
    assert checked >= 10


def test_integration_fault_carries_partial_trajectory(example):
    bundle, cfg, _ = example
    exploding = SystemModel(dim=2, drift=lambda x: x * x * x * 1e6, input_map=bundle.model.input_map)
    with np.errstate(over="ignore", invalid="ignore"), pytest.raises(IntegrationError) as exc_info:
        simulate(SimConfig(x0=(2.5, 0.0), t_end=10.0), cfg, exploding, bundle.clf, bundle.target)
    partial = exc_info.value.trajectory
    assert partial is not None and partial.stop_reason == "fault"
    assert len(partial.t) >= 1


def test_horizon_stop_before_convergence(example):
    bundle, cfg, _ = example
    traj = simulate(SimConfig(x0=(1.0, 1.5), t_end=0.3), cfg, bundle.model, bundle.clf, bundle.target)
    assert traj.stop_reason == "horizon"
    assert not traj.converged
    assert traj.t[-1] == pytest.approx(0.3, abs=1e-12)


def test_sim_config_validation():
    with pytest.raises(ConfigError):
        SimConfig(x0=(1.0, 0.0), t_end=1.0, dt=-1e-4)
    with pytest.raises(ConfigError):
        SimConfig(x0=(1.0, 0.0), t_end=1.0, event_tol=1.0)
    with pytest.raises(ConfigError):
        SimConfig(x0=(1.0, 0.0), t_end=0.0)
