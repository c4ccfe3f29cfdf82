import math

import numpy as np
import pytest
from scipy import integrate, stats

from mcquantile import (
    InvalidInputError,
    LinchpinState,
    ScalarTrace,
    StudentT,
    bm_sigma2,
    default_batch_layout,
    gamma_sample,
    linchpin_step,
    metropolis_rw_step,
    run_linchpin_chain,
    t_cdf,
    t_pdf,
    t_quantile,
)

GRID = np.array([-8.0, -2.5, -1.0, -0.1, 0.0, 0.3, 1.7, 4.0, 12.0])


def test_t_pdf_cdf_against_scipy():
    for v in (3, 4, 6, 30, 2.5):
        np.testing.assert_allclose(t_pdf(v, GRID), stats.t.pdf(GRID, v), rtol=1e-12)
        np.testing.assert_allclose(t_cdf(v, GRID), stats.t.cdf(GRID, v), rtol=1e-12)


def test_t_cdf_against_quadrature():
    for v in (3, 4, 30):
        for x in (-2.0, 0.0, 1.3):
            want, err = integrate.quad(lambda u: t_pdf(v, u), -np.inf, x)
            assert t_cdf(v, x) == pytest.approx(want, abs=max(1e-10, 10 * err))


def test_t_cdf_symmetry_and_pdf_integrates_to_one():
    for v in (3, 4, 30):
        np.testing.assert_allclose(t_cdf(v, -GRID), 1.0 - t_cdf(v, GRID), atol=1e-15)
        total, _ = integrate.quad(lambda u: t_pdf(v, u), -np.inf, np.inf)
        assert total == pytest.approx(1.0, abs=1e-9)


def test_t_quantile_inverts_cdf():
    for v in (3, 4, 30):
        for p in (0.01, 0.25, 0.5, 0.75, 0.9, 0.999):
            x = t_quantile(v, p)
            assert t_cdf(v, x) == pytest.approx(p, abs=1e-12)
            assert x == pytest.approx(stats.t.ppf(p, v), abs=1e-9)
    assert t_quantile(4, 0.5) == 0.0
    assert t_quantile(4, 0.95) == pytest.approx(2.13185, abs=1e-5)
    with pytest.raises(InvalidInputError):
        t_quantile(4, 0.0)
    with pytest.raises(InvalidInputError):
        t_pdf(0, 1.0)


def test_student_t_wrapper():
    d = StudentT(df=4)
    assert d.cdf(d.quantile(0.3)) == pytest.approx(0.3, abs=1e-12)
    assert d.pdf(0.0) == pytest.approx(stats.t.pdf(0, 4), rel=1e-12)
    with pytest.raises(InvalidInputError):
        StudentT(df=-1)


def test_metropolis_step_matches_accept_rule():
    # replay the generator stream to verify the proposal and the accept rule
    v, sigma = 6.0, 3.5
    for seed in range(50):
        rng = np.random.default_rng(seed)
        x = float(np.random.default_rng(seed + 1000).standard_t(v))
        nxt, accepted, proposal = metropolis_rw_step(x, v, sigma, rng)
        replay = np.random.default_rng(seed)
        y = x + sigma * replay.standard_normal()
        assert proposal == y
        ratio = ((v + x * x) / (v + y * y)) ** ((v + 1) / 2)
        if ratio >= 1.0:
            want_accept = True
        else:
            want_accept = replay.random() < ratio
        assert accepted == want_accept
        assert nxt == (y if accepted else x)
    with pytest.raises(InvalidInputError):
        metropolis_rw_step(0.0, 6.0, 0.0, np.random.default_rng(0))


def test_metropolis_chain_marginal_matches_target():
    # long t(30) chain: ECDF at the deciles within 3 MC standard errors
    v, sigma = 30.0, 2.5
    rng = np.random.default_rng(100)
    n = 200_000
    xs = np.empty(n)
    x = 0.0
    for i in range(n):
        x, _, _ = metropolis_rw_step(x, v, sigma, rng)
        xs[i] = x
    trace = ScalarTrace(xs)
    layout = default_batch_layout(n)
    for p in (0.1, 0.3, 0.5, 0.7, 0.9):
        xi = t_quantile(v, p)
        fhat = float(np.mean(xs <= xi))
        mcse = math.sqrt(bm_sigma2(trace, xi, layout) / n)
        assert abs(fhat - p) < 3 * mcse + 1e-4


def test_gamma_sample_distribution():
    rng = np.random.default_rng(2)
    rate = 3.7
    draws = np.array([gamma_sample(rate, rng) for _ in range(20_000)])
    stat, pvalue = stats.kstest(draws, stats.gamma(a=2.5, scale=1.0 / rate).cdf)
    assert pvalue > 1e-3
    with pytest.raises(InvalidInputError):
        gamma_sample(0.0, rng)


def test_linchpin_state_and_step():
    with pytest.raises(InvalidInputError):
        LinchpinState(x=0.0, y=0.0)
    rng = np.random.default_rng(4)
    state = LinchpinState(x=0.0, y=1.0)
    moved = 0
    for _ in range(500):
        new = linchpin_step(state, rng)
        assert new.y > 0
        moved += new.x != state.x
        state = new
    # independence proposal t(3) against t(4) accepts most of the time
    assert moved / 500 > 0.7


def test_linchpin_chain_marginal_matches_t4():
    rng = np.random.default_rng(11)
    n = 200_000
    xs = run_linchpin_chain(n, rng)
    trace = ScalarTrace(xs)
    layout = default_batch_layout(n)
    for p in (0.1, 0.25, 0.5, 0.75, 0.9):
        xi = t_quantile(4, p)
        fhat = float(np.mean(xs <= xi))
        mcse = math.sqrt(bm_sigma2(trace, xi, layout) / n)
        assert abs(fhat - p) < 3 * mcse + 1e-4


def test_linchpin_chain_reproducible_and_inits():
    a = run_linchpin_chain(1000, np.random.default_rng(9))
    b = run_linchpin_chain(1000, np.random.default_rng(9))
    np.testing.assert_array_equal(a, b)
    assert a[0] in (0.0, a[0])  # starts from x=0 or first accepted proposal
    c = run_linchpin_chain(1000, np.random.default_rng(9), init="stationary")
    assert not np.array_equal(a, c)
    with pytest.raises(InvalidInputError):
        run_linchpin_chain(0, np.random.default_rng(0))
    with pytest.raises(InvalidInputError):
        run_linchpin_chain(10, np.random.default_rng(0), init="warm")


def test_linchpin_weight_consistency():
    # the acceptance weight is the t(4)/t(3) density ratio
    from mcquantile.samplers import _log_weight

    for x in GRID:
        want = t_pdf(4, x) / t_pdf(3, x)
        assert math.exp(float(_log_weight(x))) == pytest.approx(float(want), rel=1e-12)
