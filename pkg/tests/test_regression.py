import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kappaln.distribution import KappaParams, cdf, global_mode, logpdf, median, quantile
from kappaln.fixtures import LDHO_MODEL
from kappaln.kappa import exp_kappa, ln_kappa
from kappaln.process import LDHO, ExpAniso, LatentGaussianModel, SampleSet, WhiteNoise, kernel_eval, make_rng, simulate
from kappaln.regression import (
    PredictiveMarginal,
    cross_validate,
    forecast,
    interpolate_grid,
    posterior,
    predict_median,
    predict_mode,
    prediction_interval,
)

SPATIAL = LatentGaussianModel.build(KappaParams(2.0, 0.8, 0.7), ExpAniso(1.0, 3.0, 4.0, 0.5))


def _dense_mode(mu, s2, kappa):
    p = KappaParams(mu, math.sqrt(s2), kappa)
    x = np.geomspace(quantile(1e-9, p), quantile(1 - 1e-9, p), 2_000_001)
    return x[np.argmax(logpdf(x, p))]


def test_exact_interpolation():
    t = np.arange(30.0)
    x = simulate(LDHO_MODEL, t, 1)[0]
    pm = posterior(LDHO_MODEL, SampleSet(t, x), t[[3, 17]])
    assert np.allclose(pm.mu_star, ln_kappa(x[[3, 17]], 3.0), rtol=1e-8, atol=1e-10)
    assert np.all(pm.sigma_star2 <= 1e-8)


def test_prior_reversion():
    t = np.arange(30.0)
    x = simulate(LDHO_MODEL, t, 2)[0]
    pm = posterior(LDHO_MODEL, SampleSet(t, x), [1e6])
    assert pm.mu_star[0] == pytest.approx(1.0, abs=1e-12)
    assert pm.sigma_star2[0] == pytest.approx(1.0, abs=1e-12)


def test_single_point_conditioning():
    m = LatentGaussianModel.build(KappaParams(0.5, 1.3, 0.8), LDHO(1.0, 12.0, 0.2), noise_var=0.3)
    x0, t0, ts = 2.4, 0.0, 5.0
    c = kernel_eval(m.kernel, ts - t0)
    s2 = 1.69
    y0 = ln_kappa(x0, 0.8)
    pm = posterior(m, SampleSet([t0], [x0]), [ts])
    assert pm.mu_star[0] == pytest.approx(0.5 + c / (s2 + 0.3) * (y0 - 0.5), rel=1e-13)
    assert pm.sigma_star2[0] == pytest.approx(s2 - c * c / (s2 + 0.3), rel=1e-13)


@pytest.mark.parametrize("seed", range(8))
def test_posterior_contraction(seed):
    rng = make_rng(seed)
    pts = rng.uniform(0, 15, (25, 2))
    x = simulate(SPATIAL, pts, seed)[0]
    targets = rng.uniform(0, 15, (10, 2))
    before = posterior(SPATIAL, SampleSet(pts[:-1], x[:-1]), targets).sigma_star2
    after = posterior(SPATIAL, SampleSet(pts, x), targets).sigma_star2
    assert np.all(after <= before + 1e-10)
    assert np.all(after <= 0.64 * (1 + 1e-8))


def test_median_examples():
    assert predict_median(PredictiveMarginal(0.0, 0.4, 2.2))[0] == 1.0
    assert predict_median(PredictiveMarginal(1.3, 0.4, 0.0))[0] == pytest.approx(math.exp(1.3))
    pm = PredictiveMarginal([0.3, 1.9], [0.2, 0.7], 1.4)
    for i, med in enumerate(predict_median(pm)):
        p = KappaParams(pm.mu_star[i], pm.sigma_star[i], 1.4)
        assert cdf(med, p) == pytest.approx(0.5, abs=1e-15)


@given(st.floats(-3, 3), st.floats(0.05, 2), st.floats(0, 3), st.lists(st.floats(0.001, 0.999), min_size=1, max_size=8))
def test_quantile_invariance(mu, s, kappa, probs):
    probs = np.sort(probs)
    p = KappaParams(mu, s, kappa)
    from kappaln.special import erf_inv

    q = exp_kappa(mu + s * math.sqrt(2) * np.asarray(erf_inv(2 * probs - 1)), kappa)
    ok = np.isfinite(q) & (q > 0)
    assert np.all(np.abs(cdf(q[ok], p) - probs[ok]) <= 1e-9)


def test_mode_examples():
    assert predict_mode(PredictiveMarginal(0.4, 0.3, 0.0))[0] == pytest.approx(math.exp(0.1))
    pm = PredictiveMarginal(1.0, 0.25, 0.5)
    assert predict_mode(pm)[0] <= predict_median(pm)[0]
    assert predict_mode(pm)[0] == pytest.approx(_dense_mode(1.0, 0.25, 0.5), rel=1e-5)


def test_mode_bimodal_takes_taller_peak():
    pm = PredictiveMarginal([1.0], [1.0], 3.0)
    m = predict_mode(pm)[0]
    assert m == pytest.approx(global_mode(KappaParams(1, 1, 3)), rel=1e-12)
    assert m == pytest.approx(_dense_mode(1.0, 1.0, 3.0), rel=1e-5)


def test_mode_batched_matches_scalar():
    rng = make_rng(5)
    pm = PredictiveMarginal(rng.uniform(-1, 3, 40), rng.uniform(0.05, 2, 40), 2.0)
    batch = predict_mode(pm)
    for i in range(40):
        assert batch[i] == pytest.approx(global_mode(KappaParams(pm.mu_star[i], pm.sigma_star[i], 2.0)), rel=1e-12)


def test_mode_degenerate_variance():
    pm = PredictiveMarginal([0.7], [0.0], 1.5)
    assert predict_mode(pm)[0] == pytest.approx(exp_kappa(0.7, 1.5))


@pytest.mark.parametrize("mu", [20.0, 35.0, 80.0])
@pytest.mark.parametrize("s", [0.5, 2.0])
def test_mode_median_agree_near_gaussian(mu, s):
    pm = PredictiveMarginal([mu], [s * s], 1.0)
    med, mode = predict_median(pm)[0], predict_mode(pm)[0]
    assert abs(mode - med) / med <= 1e-3


def test_interval_examples():
    from kappaln.special import erf_inv

    assert math.sqrt(2) * erf_inv(0.95) == pytest.approx(1.959963985, abs=1e-9)
    pm = PredictiveMarginal([0.2, 1.4], [0.3, 1.1], 0.9)
    lo, hi = prediction_interval(pm, 0.05)
    med = predict_median(pm)
    assert np.all(lo < med) and np.all(med < hi)
    for i in range(2):
        p = KappaParams(pm.mu_star[i], pm.sigma_star[i], 0.9)
        assert cdf(lo[i], p) == pytest.approx(0.025, abs=1e-12)
        assert cdf(hi[i], p) == pytest.approx(0.975, abs=1e-12)
    with pytest.raises(ValueError):
        prediction_interval(pm, 1.0)


def test_forecast_horizon_one_strategies_agree():
    t = np.arange(60.0)
    x = simulate(LDHO_MODEL, t, 3)[0]
    train = SampleSet(t[:59], x[:59])
    a = forecast(LDHO_MODEL, train, t[59:])
    b = forecast(LDHO_MODEL, train, t[59:], "one_step_recursive", truths=x[59:])
    assert np.array_equal(a.median, b.median) and np.array_equal(a.mode, b.mode)


def test_one_step_uses_revealed_truths():
    t = np.arange(80.0)
    x = simulate(LDHO_MODEL, t, 4)[0]
    train = SampleSet(t[:60], x[:60])
    rec = forecast(LDHO_MODEL, train, t[60:], "one_step_recursive", truths=x[60:])
    for i in (0, 5, 19):
        pm = posterior(LDHO_MODEL, SampleSet(t[: 60 + i], x[: 60 + i]), t[60 + i : 61 + i])
        assert rec.median[i] == pytest.approx(predict_median(pm)[0], rel=1e-12)
    multi = forecast(LDHO_MODEL, train, t[60:])
    assert np.mean(np.abs(rec.median - x[60:])) <= np.mean(np.abs(multi.median - x[60:]))


def test_forecast_validation():
    train = SampleSet(np.arange(5.0), np.ones(5))
    with pytest.raises(ValueError):
        forecast(LDHO_MODEL, train, np.array([]))
    with pytest.raises(ValueError):
        forecast(LDHO_MODEL, train, [6.0], "one_step_recursive")
    with pytest.raises(ValueError):
        forecast(LDHO_MODEL, train, [6.0], "two_step")


def test_white_noise_forecast_is_marginal():
    p = KappaParams(0.6, 0.9, 1.2)
    m = LatentGaussianModel.build(p, WhiteNoise(1.0))
    t = np.arange(40.0)
    x = simulate(m, t, 5)[0]
    f = forecast(m, SampleSet(t[:30], x[:30]), t[30:])
    assert np.allclose(f.median, median(p), rtol=1e-14)
    assert np.allclose(f.lo, quantile(0.025, p), rtol=1e-12)
    assert np.allclose(f.hi, quantile(0.975, p), rtol=1e-12)
    assert np.allclose(f.mode, global_mode(p), rtol=1e-12)


def test_interpolate_reproduces_training_nodes():
    g = np.arange(8.0)
    X, Y = np.meshgrid(g, g, indexing="ij")
    coords = np.column_stack([X.ravel(), Y.ravel()])
    x = simulate(SPATIAL, coords, 6)[0]
    idx = np.arange(0, 64, 3)
    pred = interpolate_grid(SPATIAL, SampleSet(coords[idx], x[idx]), coords)
    assert pred.median.size == 64
    assert np.allclose(pred.median[idx], x[idx], rtol=1e-8)


def test_cv_examples():
    truth = np.array([1.0, 2.0, 4.0, 3.0])
    r = cross_validate(truth, truth)
    assert r.as_tuple() == pytest.approx((0, 0, 0, 0, 0, 1))
    c = 0.3
    s = cross_validate(truth + c, truth)
    assert (s.me, s.mae, s.rmse) == pytest.approx((c, c, c))
    assert s.pearson_r == pytest.approx(1.0)
    noisy = truth * np.array([1.1, 0.8, 1.3, 0.95])
    a, b = cross_validate(noisy, truth), cross_validate(noisy + c, truth)
    assert b.pearson_r == pytest.approx(a.pearson_r, rel=1e-12)


def test_cv_formulas():
    pred = np.array([1.2, 1.7, 3.9, 3.5, 0.4])
    true = np.array([1.0, 2.0, 4.0, 3.0, 0.5])
    e = pred - true
    r = cross_validate(pred, true)
    assert r.me == pytest.approx(e.mean())
    assert r.mae == pytest.approx(np.abs(e).mean())
    assert r.mare == pytest.approx(np.mean(np.abs(e) / true))
    assert r.rmse == pytest.approx(math.sqrt(np.mean(e**2)))
    assert r.rrmse == pytest.approx(r.rmse / true.mean())
    assert r.pearson_r == pytest.approx(np.corrcoef(pred, true)[0, 1])


@given(st.lists(st.floats(0.1, 10), min_size=3, max_size=30), st.integers(0, 2**32 - 1))
def test_cv_invariants(truth, seed):
    truth = np.array(truth)
    pred = truth * make_rng(seed).uniform(0.5, 1.5, truth.size)
    r = cross_validate(pred, truth)
    assert r.mae >= abs(r.me) - 1e-12
    assert r.rmse >= r.mae - 1e-12
    assert math.isnan(r.pearson_r) or abs(r.pearson_r) <= 1 + 1e-12


def test_cv_validation():
    with pytest.raises(ValueError):
        cross_validate([1.0], [1.0])
    with pytest.raises(ValueError):
        cross_validate([1.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(ZeroDivisionError):
        cross_validate([1.0, 2.0], [0.0, 2.0])
