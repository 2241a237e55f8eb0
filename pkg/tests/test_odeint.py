"""Adaptive Runge-Kutta driver: accuracy, snapshots, termination, hooks."""

import numpy as np
import pytest

from hydroblow.odeint import integrate_rk54


def test_exponential_decay_accuracy():
    res = integrate_rk54(lambda t, y: -y, 0.0, np.array([1.0]), 1.0)
    assert res.reason == "completed"
    assert abs(res.y[0] - np.exp(-1.0)) < 1e-8


def test_polynomial_integrated_exactly():
    # degree <= 4 lies inside the order-5 solution's exactness set
    res = integrate_rk54(lambda t, y: np.array([3.0 * t * t]), 0.0, np.array([0.0]), 1.0)
    assert res.y[0] == pytest.approx(1.0, abs=1e-13)
    res = integrate_rk54(lambda t, y: np.array([5.0 * t**4]), 0.0, np.array([0.0]), 1.0)
    assert res.y[0] == pytest.approx(1.0, abs=1e-12)


def test_time_dependent_right_hand_side():
    res = integrate_rk54(lambda t, y: np.array([np.cos(t)]), 0.0, np.array([0.0]), 2.0)
    assert abs(res.y[0] - np.sin(2.0)) < 1e-8


def test_tolerance_controls_error():
    errs = []
    for rel in (1e-6, 1e-9):
        res = integrate_rk54(
            lambda t, y: np.cos(t) * y, 0.0, np.array([1.0]), 2.0, rel_tol=rel, abs_tol=1e-14
        )
        errs.append(abs(res.y[0] - np.exp(np.sin(2.0))))
    assert errs[1] < errs[0]
    assert errs[1] < 1e-8


def test_snapshots_hit_exact_times():
    times = [0.25, 0.5, 0.75]
    res = integrate_rk54(lambda t, y: -y, 0.0, np.array([1.0]), 1.0, snapshot_times=times)
    assert [t for t, _ in res.snapshots] == times
    for t, y in res.snapshots:
        assert abs(y[0] - np.exp(-t)) < 1e-8


def test_snapshot_at_start_and_end():
    res = integrate_rk54(
        lambda t, y: -y, 0.0, np.array([1.0]), 1.0, snapshot_times=[0.0, 1.0]
    )
    assert [t for t, _ in res.snapshots] == [0.0, 1.0]
    assert res.snapshots[0][1][0] == 1.0


def test_observer_runs_at_start_and_each_accepted_step():
    calls = []
    res = integrate_rk54(
        lambda t, y: -y, 0.0, np.array([1.0]), 1.0, observer=lambda t, y: calls.append(t)
    )
    assert len(calls) == res.n_accepted + 1
    assert calls[0] == 0.0
    assert calls[-1] == pytest.approx(1.0)


def test_terminate_reason_propagates():
    res = integrate_rk54(
        lambda t, y: np.ones(1),
        0.0,
        np.zeros(1),
        1.0,
        terminate=lambda t, y: "crossed" if y[0] > 0.5 else None,
    )
    assert res.reason == "crossed"
    assert 0.5 < res.t < 1.0


def test_max_steps_reason():
    res = integrate_rk54(lambda t, y: -y, 0.0, np.array([1.0]), 1.0, max_steps=3)
    assert res.reason == "max_steps"
    assert res.n_accepted + res.n_rejected == 3


def test_step_underflow_near_singularity():
    # y' = y^2 from y(0) = 1 leaves every tolerance behind at t -> 1
    res = integrate_rk54(lambda t, y: y * y, 0.0, np.array([1.0]), 2.0)
    assert res.reason == "step_underflow"
    assert res.t == pytest.approx(1.0, abs=1e-3)


def test_post_accept_transform_applies():
    res = integrate_rk54(
        lambda t, y: np.array([1.0, 1.0]),
        0.0,
        np.zeros(2),
        1.0,
        post_accept=lambda t, y, h: np.array([y[0], 0.0]),
        post_invalidates_fsal=True,
    )
    assert res.y[0] == pytest.approx(1.0, abs=1e-10)
    assert res.y[1] == 0.0


def test_rejects_nonpositive_span():
    with pytest.raises(ValueError):
        integrate_rk54(lambda t, y: -y, 1.0, np.array([1.0]), 1.0)
