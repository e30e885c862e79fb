import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from cies.uncertainty import (MixedPowerDistribution, ParameterError, ProbSeq, PvPowerModel,
                              WindPowerModel, convolve, discretize, expectation, pv_density,
                              pv_distribution, wt_distribution)

WIND = WindPowerModel(scale=10.0, shape=1.8, v_in=3.0, v_r=15.0, p_rated=600.0)
PV = PvPowerModel(3.0, 5.0, 360.0)


def test_weibull_point_masses():
    d = wt_distribution(WIND)
    assert d.mass_at_zero == pytest.approx(1 - math.exp(-(0.3 ** 1.8)), abs=1e-12)
    assert d.mass_at_zero == pytest.approx(0.1082, abs=1e-4)
    assert d.mass_at_max == pytest.approx(math.exp(-(1.5 ** 1.8)), abs=1e-12)
    # exp(-1.5^1.8) = 0.12559; the quoted 0.1258 is a rounded figure
    assert d.mass_at_max == pytest.approx(0.1258, abs=5e-4)


def test_weibull_masses_match_sampled_speeds():
    rng = np.random.default_rng(7)
    v = 10.0 * rng.weibull(1.8, 400_000)
    d = wt_distribution(WIND)
    assert np.mean(v < 3.0) == pytest.approx(d.mass_at_zero, abs=3e-3)
    assert np.mean(v >= 15.0) == pytest.approx(d.mass_at_max, abs=3e-3)


@pytest.mark.parametrize("scale,shape", [(10, 1.8), (6, 2.5), (14, 1.2)])
def test_wind_total_probability(scale, shape):
    d = wt_distribution(WindPowerModel(scale, shape, 3.0, 15.0, 600.0))
    assert d.total_mass() == pytest.approx(1.0, abs=1e-6)


def test_wind_masses_move_with_cut_speeds():
    za = [wt_distribution(WindPowerModel(10, 1.8, v, 15, 600)).mass_at_zero for v in (2, 3, 4, 5)]
    ma = [wt_distribution(WindPowerModel(10, 1.8, 3, v, 600)).mass_at_max for v in (12, 14, 16, 18)]
    assert np.all(np.diff(za) > 0)
    assert np.all(np.diff(ma) < 0)


@pytest.mark.parametrize("kw", [dict(scale=0), dict(shape=-1), dict(v_in=15), dict(p_rated=0)])
def test_wind_parameter_errors(kw):
    args = dict(scale=10.0, shape=1.8, v_in=3.0, v_r=15.0, p_rated=600.0)
    args.update(kw)
    with pytest.raises(ParameterError):
        WindPowerModel(**args)


def test_pv_uniform_density():
    m = PvPowerModel(1.0, 1.0, 360.0)
    for p in (1.0, 100.0, 359.0):
        assert pv_density(p, m) == pytest.approx(1 / 360)


def test_pv_mode():
    grid = np.linspace(1, 359, 3581)
    dens = [pv_density(p, PV) for p in grid]
    assert grid[int(np.argmax(dens))] / 360 == pytest.approx(1 / 3, abs=1e-3)


def test_pv_normalisation_and_domain():
    val, _ = integrate.quad(lambda p: pv_density(p, PV), 0, 360, points=[1e-9, 359.999])
    assert val == pytest.approx(1.0, abs=1e-6)
    for p in (0.0, 360.0, -1.0):
        with pytest.raises(ParameterError):
            pv_density(p, PV)


def test_discretize_point_mass_at_zero():
    d = MixedPowerDistribution(1.0, 0.0, lambda p: 0.0, 100.0)
    s = discretize(d, 10.0)
    assert s.probs[0] == 1.0 and s.probs[1:].sum() == 0.0


def test_discretize_uniform_bins():
    d = MixedPowerDistribution(0.0, 0.0, lambda p: 0.01, 100.0)
    s = discretize(d, 50.0)
    np.testing.assert_allclose(s.probs, [0.25, 0.5, 0.25], atol=1e-9)


def test_pv_sequence_length():
    assert len(discretize(pv_distribution(PV), 5.0)) == 73


@pytest.mark.parametrize("q", [0.0, -1.0, 360.0, 400.0])
def test_discretize_step_errors(q):
    with pytest.raises(ParameterError):
        discretize(pv_distribution(PV), q)


def test_discretised_pv_expectation():
    s = discretize(pv_distribution(PV), 5.0)
    cont, _ = integrate.quad(lambda p: p * pv_density(p, PV), 0, 360, points=[1e-9])
    assert abs(expectation(s) - cont) <= 5.0
    assert cont == pytest.approx(360 * 3 / 8, rel=1e-6)


@pytest.mark.parametrize("q", [1.0, 5.0, 10.0])
def test_discretise_preserves_expectation_within_half_step(q):
    for d in (wt_distribution(WIND), pv_distribution(PV)):
        s = discretize(d, q)
        assert abs(s.probs.sum() - 1) < 1e-9
        assert abs(expectation(s) - d.mean()) <= q / 2


def test_cdf_and_quadrature_bins_agree():
    d = wt_distribution(WIND)
    quad_only = MixedPowerDistribution(d.mass_at_zero, d.mass_at_max, d.density, d.p_max)
    np.testing.assert_allclose(discretize(d, 5.0).probs, discretize(quad_only, 5.0).probs, atol=1e-9)


def test_convolution_examples():
    b = ProbSeq(10.0, [0.1, 0.6, 0.3])
    assert np.array_equal(convolve(ProbSeq.point_mass(10.0), b).probs, b.probs)
    c = convolve(ProbSeq(10.0, [0.5, 0.5]), ProbSeq(10.0, [0.5, 0.5]))
    np.testing.assert_allclose(c.probs, [0.25, 0.5, 0.25])
    with pytest.raises(ParameterError):
        convolve(ProbSeq(10.0, [1.0]), ProbSeq(5.0, [1.0]))


def test_expectation_examples():
    assert expectation(ProbSeq(1.0, [1.0])) == 0.0
    assert expectation(ProbSeq(10.0, [0.2, 0.3, 0.5])) == pytest.approx(13.0)


@pytest.mark.parametrize("probs", [[0.5, 0.4], [1.2, -0.2], []])
def test_probseq_rejects_bad_probabilities(probs):
    with pytest.raises(ParameterError):
        ProbSeq(1.0, probs)


def test_probseq_sampling_follows_probabilities():
    s = ProbSeq(5.0, [0.2, 0.3, 0.5])
    x = s.sample(np.random.default_rng(1), 200_000)
    for u, p in enumerate(s.probs):
        assert np.mean(x == 5.0 * u) == pytest.approx(p, abs=5e-3)


def _seq(draw_probs):
    p = np.asarray(draw_probs, dtype=float) + 1e-3
    return p / p.sum()


probs_st = st.lists(st.floats(0, 1), min_size=1, max_size=30).map(_seq)


@settings(max_examples=200, deadline=None)
@given(probs_st, probs_st, probs_st)
def test_convolution_algebra(pa, pb, pc):
    a, b, c = (ProbSeq(5.0, p) for p in (pa, pb, pc))
    ab = convolve(a, b)
    assert abs(ab.probs.sum() - 1) < 1e-9 and np.all(ab.probs >= 0)
    np.testing.assert_allclose(ab.probs, convolve(b, a).probs, atol=1e-12)
    np.testing.assert_allclose(convolve(ab, c).probs, convolve(a, convolve(b, c)).probs, atol=1e-12)
    assert expectation(ab) == pytest.approx(expectation(a) + expectation(b), abs=1e-9)
