import math

import numpy as np
import pytest

from agentft.sensors import (
    FaultEntry,
    FaultSchedule,
    SensorReading,
    predict_failure,
    ramp_offset,
    sample_temperature,
)

N = 100_000


def draw(node, times, schedule, seed):
    rng = np.random.default_rng(seed)
    return np.array([sample_temperature(node, t, schedule, rng).temperature for t in times])


def test_unscheduled_readings_stay_near_baseline():
    temps = draw((0, 0), range(N), FaultSchedule(), 7)
    # a Gaussian puts 6.3e-5 of its mass beyond 4 sigma; allow an order of magnitude
    beyond = np.mean(np.abs(temps - 40.0) > 4 * 1.5)
    assert beyond < 1e-3
    assert abs(temps.mean() - 40.0) < 4 * 1.5 / math.sqrt(N)
    assert abs(temps.std() - 1.5) < 0.02


def test_readings_before_ramp_match_unscheduled():
    sched = FaultSchedule((FaultEntry(1, 500.0, 0.5, coord=(0, 0)),))
    before = draw((0, 0), np.linspace(0, 499, N), sched, 1)
    plain = draw((0, 0), np.linspace(0, 499, N), FaultSchedule(), 2)
    assert abs(before.mean() - plain.mean()) < 4 * 1.5 * math.sqrt(2 / N)
    assert abs(before.std() - plain.std()) < 0.03


def test_ramp_offset_is_linear_and_local():
    sched = FaultSchedule((FaultEntry(1, 100.0, 0.5, coord=(1, 1)),))
    assert ramp_offset((1, 1), 99.0, sched) == 0
    assert ramp_offset((1, 1), 160.0, sched) == pytest.approx(30.0)
    assert ramp_offset((0, 0), 160.0, sched) == 0


def test_ramped_node_eventually_predicted():
    sched = FaultSchedule((FaultEntry(1, 100.0, 0.5, coord=(0, 0)),))
    rng = np.random.default_rng(3)
    first = next(
        t for t in range(0, 2000, 10)
        if predict_failure(sample_temperature((0, 0), t, sched, rng))
    )
    # crossing is deterministic at t=160 without noise
    assert 100 < first < 200


def test_threshold_is_strict():
    at = lambda temp: SensorReading((0, 0), temp, 0.0)
    assert predict_failure(at(70.0001))
    assert not predict_failure(at(70.0))
    assert not predict_failure(at(69.9))
    assert predict_failure(at(50.0), threshold=49.0)


def test_schedule_round_trips_through_dict():
    sched = FaultSchedule(
        (FaultEntry(13, 250.0, 0.25),), prefailed=((0, 1),), hard_failures=(((2, 2), 400.0),)
    )
    assert FaultSchedule.from_dict(sched.to_dict()) == sched
