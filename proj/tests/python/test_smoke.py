import json
import math

import pytest

import repint


def equal():
    return repint.SystemParams(1.0, 1.0, 1.0, 1.0, 2.7)


def test_one_step_moves_heat():
    s0 = repint.ThermalState.from_temperatures(1.0, 9.0)
    s1 = repint.step(equal(), s0)
    assert s0.t1 < s1.t1 < s1.t2 < s0.t2
    assert repint.total_occupation(equal(), s1) == pytest.approx(repint.total_occupation(equal(), s0), rel=1e-12)


def test_iterate_reaches_prediction():
    s0 = repint.ThermalState.from_temperatures(1.0, 9.0)
    traj = repint.iterate(equal(), s0)
    assert traj.converged
    eq = repint.predict_fixed_point(equal(), s0)
    assert abs(traj.final_state.t1 - eq.t1) < 1e-6
    arr = traj.as_array()
    assert arr.shape == (len(traj), 10)
    assert arr[-1, 9] == 1.0
    report = repint.check_equilibrium(traj)
    assert report["condition_met"]
    assert report["mean_initial"] == 5.0


def test_unequal_frequencies():
    p = repint.SystemParams(10.0, 4.0, 5.0, 1.0, 1.5)
    traj = repint.iterate(p, repint.ThermalState.from_temperatures(8.0, 2.0))
    t = traj.final_state
    assert abs(t.t1 - 6.569) < 1e-3
    assert abs(t.t2 - 2.628) < 1e-3


def test_oracle_matches_closed_form():
    p = repint.SystemParams(2.0, 1.0, 1.0, 0.5, 1.0)
    s0 = repint.ThermalState.from_temperatures(1.0, 3.0)
    closed = repint.step(p, s0)
    oracle = repint.oracle_step(p, s0)
    assert oracle.nmax == repint.required_nmax(p, s0)
    assert oracle.state.theta1 == pytest.approx(closed.theta1, rel=1e-6)
    assert oracle.state.theta2 == pytest.approx(closed.theta2, rel=1e-6)


def test_euler_is_real_and_in_range():
    e = repint.compute_euler(equal(), repint.ThermalState.from_temperatures(1.0, 9.0))
    assert e.cos_beta_half >= 1.0
    assert e.realness_residue < 1e-10
    assert math.isfinite(e.delta)


def test_errors():
    with pytest.raises(ValueError):
        repint.SystemParams(1.0, 1.0, 1.0, 1.0, 0.0)
    with pytest.raises(repint.TruncationError):
        repint.oracle_step(equal(), repint.ThermalState.from_temperatures(1.0, 9.0), nmax=20)
    with pytest.raises(ValueError):
        repint.simulate_csv(json.dumps({"tau": -1}))


def test_simulate_csv():
    text, code = repint.simulate_csv(json.dumps({"t1": 1, "t2": 9, "tau": 2.7}))
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "step,n_tau,T1,T2,theta1,theta2,w1_theta1,w2_theta2,nbar_total,converged"
    assert lines[-1].endswith(",1")
