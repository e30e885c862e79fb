import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from cies.evfleet import (EvFleetSpec, EvSession, arrival_period, arrival_soc, charging_duration,
                          disorderly_profile, read_sessions_csv, return_time_pdf, sample_mileage,
                          sample_return_time, sample_sessions, simulate_fleet, write_sessions_csv)

SPEC = EvFleetSpec()


def test_return_time_density_at_mean():
    d = return_time_pdf(17.6, 17.6, 3.4, normalized=False)
    assert d == pytest.approx(1 / (math.sqrt(2 * math.pi) * 3.4), rel=1e-12)
    assert d == pytest.approx(0.1173, abs=1e-4)


def test_return_time_density_normalised():
    raw, _ = integrate.quad(lambda t: return_time_pdf(t, 17.6, 3.4, normalized=False), 0, 24,
                            points=[5.6], limit=200)
    assert raw == pytest.approx(0.9996, abs=1e-4)
    full, _ = integrate.quad(lambda t: return_time_pdf(t, 17.6, 3.4), 0, 24, points=[5.6], limit=200)
    assert full == pytest.approx(1.0, abs=1e-9)


def test_return_time_samples():
    x = sample_return_time(np.random.default_rng(3), SPEC, 200_000)
    assert np.all((x > 0) & (x <= 24))
    # histogram against the wrapped density
    hist, edges = np.histogram(x, bins=24, range=(0, 24))
    mass = [integrate.quad(lambda t: return_time_pdf(t, 17.6, 3.4), a, b)[0]
            for a, b in zip(edges[:-1], edges[1:])]
    np.testing.assert_allclose(hist / x.size, mass, atol=3e-3)


def test_mileage_moments():
    x = sample_mileage(np.random.default_rng(11), SPEC, 1_000_000)
    assert np.median(x) == pytest.approx(math.exp(3.2), rel=0.01)
    assert np.median(x) == pytest.approx(24.53, rel=0.01)
    assert np.mean(x) == pytest.approx(math.exp(3.2 + 0.88 ** 2 / 2), rel=0.02)
    assert np.mean(x) == pytest.approx(36.13, rel=0.02)


def test_arrival_soc_examples():
    full = EvFleetSpec(s_expected=1.0)
    assert arrival_soc(40, full) == (pytest.approx(0.80), False)
    assert arrival_soc(0, SPEC) == (SPEC.s_expected, False)
    soc, clamped = arrival_soc(300, full)
    assert soc == pytest.approx(3 / 30) and clamped
    with pytest.raises(ValueError):
        arrival_soc(-1, SPEC)


def test_charging_duration_examples():
    assert charging_duration(0.7, SPEC) == pytest.approx(6 / 13.5)
    assert charging_duration(0.7, SPEC) == pytest.approx(0.444, abs=1e-3)
    assert charging_duration(SPEC.s_expected, SPEC) == 0.0
    assert charging_duration(0.0, EvFleetSpec(s_expected=1.0)) == pytest.approx(2.222, abs=1e-3)
    with pytest.raises(ValueError):
        charging_duration(0.95, SPEC)


def test_single_ev_profile():
    s = EvSession(0, 20, 0.0, 27.0, 2.0)
    load = disorderly_profile([s], SPEC, 24, 1.0)
    expected = np.zeros(24)
    expected[19:21] = 15.0
    np.testing.assert_array_equal(load, expected)


def test_partial_hour_and_wraparound():
    load = disorderly_profile([EvSession(0, 24, 0.1, 24.0, 1.5)], SPEC)
    assert load[23] == 15.0 and load[0] == pytest.approx(7.5)
    assert load.sum() == pytest.approx(15 * 1.5)


def test_fleet_is_deterministic():
    a, sa = simulate_fleet(SPEC, 42)
    b, sb = simulate_fleet(SPEC, 42)
    assert np.array_equal(a, b) and sa == sb
    c, _ = simulate_fleet(SPEC, 43)
    assert not np.array_equal(a, c)


def test_fleet_energy_conservation():
    for seed in range(20):
        load, sessions = simulate_fleet(SPEC, seed)
        stored = sum(s.required_energy for s in sessions)
        assert load.sum() * SPEC.eta_ch == pytest.approx(stored, abs=1e-9)


@pytest.mark.slow
def test_evening_peak_over_many_seeds():
    total = np.zeros(24)
    for seed in range(10_000):
        total += simulate_fleet(SPEC, seed)[0]
    peak_period = int(np.argmax(total)) + 1
    # period k covers hour k-1 to k, so 17:00-21:00 means periods 18..21
    assert 18 <= peak_period <= 21


def test_arrival_period_mapping():
    assert arrival_period(0.5, 24, 1.0) == 1
    assert arrival_period(17.6, 24, 1.0) == 18
    assert arrival_period(24.0, 24, 1.0) == 1
    assert arrival_period(13.0, 2, 12.0) == 2


def test_sessions_truncation_flag():
    sessions = sample_sessions(SPEC, 5)
    for s in sessions:
        left = 24 - s.arrival_period + 1
        assert s.truncated == (s.charging_duration > left + 1e-9)
        assert s.scheduled_energy(SPEC, 24, 1.0) <= s.required_energy + 1e-12
        assert s.scheduled_energy(SPEC, 24, 1.0) <= left * SPEC.energy_per_period_full + 1e-9


def test_sessions_csv_roundtrip(tmp_path):
    sessions = sample_sessions(SPEC, 9)
    path = tmp_path / "sessions.csv"
    write_sessions_csv(path, sessions)
    back = read_sessions_csv(path, SPEC)
    for a, b in zip(sessions, back):
        assert (a.ev_id, a.arrival_period, a.clamped, a.truncated) == (b.ev_id, b.arrival_period, b.clamped, b.truncated)
        assert a.required_energy == pytest.approx(b.required_energy, rel=1e-11)


def test_horizon_must_cover_day():
    with pytest.raises(ValueError):
        sample_sessions(SPEC, 1, n_periods=12, dt=1.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 2000, allow_nan=False))
def test_soc_within_limits(x):
    soc, _ = arrival_soc(x, SPEC)
    assert SPEC.soc_floor - 1e-12 <= soc <= SPEC.s_expected
