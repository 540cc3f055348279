import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize, stats

from relprior import distributions as dist
from relprior.data import Dataset, Observation
from relprior.distributions import LSParams, ReparamPoint
from relprior.errors import DataError
from relprior.likelihood import (compile_data, loglik, loglik_arrays, ml_fit, profile_ci,
                                 relative_likelihood_grid)


@pytest.fixture(scope="module")
def censored():
    rng = np.random.default_rng(42)
    t = np.exp(2.0 + 0.6 * dist.std_quantile(rng.random(25), "sev"))
    tc = float(np.quantile(t, 0.6))
    obs = [Observation.exact(v) for v in np.sort(t[t <= tc])]
    obs.append(Observation.right(tc, int(np.sum(t > tc))))
    return Dataset(tuple(obs))


def test_single_exact_closed_form():
    mu, s = 1.3, 0.4
    d = Dataset((Observation.exact(math.exp(mu)),))
    expect = -math.log(s) - mu - 0.5 * math.log(2 * math.pi)
    assert loglik(d, LSParams(mu, s), "normal") == pytest.approx(expect, rel=1e-14)


def test_single_right_closed_form():
    d = Dataset((Observation.right(5.0),))
    zc = (math.log(5.0) - 1.0) / 0.5
    assert loglik(d, LSParams(1.0, 0.5), "sev") == pytest.approx(math.log(math.exp(-math.exp(zc))))


def _naive(obs, mu, s, fam):
    tot = 0.0
    for o in obs:
        if o.kind.value == "exact":
            z = (math.log(o.t) - mu) / s
            tot += o.count * (math.log(float(dist.std_pdf(z, fam))) - math.log(s) - math.log(o.t))
        elif o.kind.value == "right":
            tot += o.count * math.log(1 - float(dist.std_cdf((math.log(o.t) - mu) / s, fam)))
        elif o.kind.value == "left":
            tot += o.count * math.log(float(dist.std_cdf((math.log(o.t_upper) - mu) / s, fam)))
        else:
            a = float(dist.std_cdf((math.log(o.t_lower) - mu) / s, fam))
            b = float(dist.std_cdf((math.log(o.t_upper) - mu) / s, fam))
            tot += o.count * math.log(b - a)
    return tot


@pytest.mark.parametrize("fam", list(dist.Family))
def test_mixed_dataset_naive_oracle(fam):
    obs = (Observation.exact(2.0), Observation.exact(3.5, 2), Observation.right(4.0, 3),
           Observation.left(1.0), Observation.interval(1.5, 2.5, 2))
    d = Dataset(obs)
    for mu, s in [(1.0, 0.5), (0.5, 1.2), (1.6, 0.3)]:
        assert loglik(d, LSParams(mu, s), fam) == pytest.approx(_naive(obs, mu, s, fam), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(mu=st.floats(0.5, 3.5), s=st.floats(0.1, 2.0), p_r=st.floats(0.01, 0.99),
       fam=st.sampled_from(list(dist.Family)))
def test_reparam_invariance(censored, mu, s, p_r, fam):
    p = LSParams(mu, s)
    r = dist.ls_to_reparam(p, p_r, fam)
    assert loglik(censored, r, fam) == pytest.approx(loglik(censored, p, fam), rel=1e-12, abs=1e-10)


def test_adding_censored_lowers_loglik(censored):
    p = LSParams(2.0, 0.6)
    more = Dataset(censored.observations + (Observation.right(3.0),))
    assert loglik(more, p, "sev") < loglik(censored, p, "sev")


def test_lognormal_closed_form_mle():
    lt = np.log([12.0, 3.1, 7.7, 25.0, 9.9, 4.4, 15.2, 6.0, 8.8, 30.5])
    fit = ml_fit(Dataset.from_arrays(np.exp(lt)), "normal")
    assert fit.converged
    assert fit.params_hat.mu == pytest.approx(lt.mean(), abs=1e-8)
    assert fit.params_hat.sigma == pytest.approx(lt.std(ddof=0), rel=1e-8)


def test_exponential_mle_oracle():
    fails = np.array([1.0, 2.5, 4.0, 7.0])
    d = Dataset(tuple(Observation.exact(v) for v in fails) + (Observation.right(8.0, 6),))
    ttt = fails.sum() + 6 * 8.0
    r = optimize.minimize_scalar(lambda m: -loglik(d, LSParams(m, 1.0), "sev"),
                                 bounds=(0, 6), method="bounded", options={"xatol": 1e-12})
    assert math.exp(r.x) == pytest.approx(ttt / 4, rel=1e-7)


def test_fit_dominates_candidates(censored):
    fit = ml_fit(censored, "sev")
    rng = np.random.default_rng(0)
    mu = fit.params_hat.mu + rng.normal(0, 0.3, 500)
    s = fit.params_hat.sigma * np.exp(rng.normal(0, 0.3, 500))
    vals = loglik_arrays(compile_data(censored), mu, s, "sev")
    assert np.all(vals <= fit.loglik_max + 1e-12)
    assert fit.grad_norm < 1e-6
    cov = fit.approx_cov
    np.testing.assert_allclose(cov, cov.T)
    assert np.all(np.linalg.eigvalsh(cov) > 0)


def test_numeric_gradient_self_check(censored):
    # derivative of loglik along mu against the cdf-based score of the same data
    cd = compile_data(censored)
    rng = np.random.default_rng(3)
    for _ in range(5):
        mu, s = rng.uniform(1.5, 2.5), rng.uniform(0.3, 1.0)
        h = 1e-5
        g = (loglik_arrays(cd, mu + h, s, "sev") - loglik_arrays(cd, mu - h, s, "sev")) / (2 * h)
        g2 = (loglik_arrays(cd, mu + 2 * h, s, "sev") - loglik_arrays(cd, mu - 2 * h, s, "sev")) / (4 * h)
        assert g == pytest.approx(g2, rel=1e-5, abs=1e-7)
        # analytic score in mu: exact terms -dlogphi/sigma, censored terms h(z)/sigma
        score = 0.0
        for o in censored:
            z = (math.log(o.t) - mu) / s
            if o.kind.value == "exact":
                score += -o.count * (1 - math.exp(z)) / s
            else:
                score += o.count * math.exp(z) / s
        assert g == pytest.approx(score, rel=1e-6)


def test_no_failures_rejected():
    with pytest.raises(DataError):
        ml_fit(Dataset((Observation.right(5.0, 10),)), "sev")


def test_relative_grid(censored):
    fit = ml_fit(censored, "sev")
    p_r = 0.2
    rp = fit.reparam(p_r)
    tp = np.array([rp.t_pr * 0.8, rp.t_pr, rp.t_pr * 1.3])
    sg = np.array([fit.params_hat.sigma, fit.params_hat.sigma * 1.5])
    R = relative_likelihood_grid(censored, "sev", tp, sg, p_r, fit)
    assert R.shape == (2, 3)
    assert R[0, 1] == pytest.approx(1.0, abs=1e-12)
    direct = math.exp(loglik(censored, ReparamPoint(tp[2], sg[1], p_r), "sev") - fit.loglik_max)
    assert R[1, 2] == pytest.approx(direct, rel=1e-12)
    assert np.all(R <= 1 + 1e-12)


def test_relative_grid_decays_along_rays():
    # a large complete normal sample has a near-quadratic log likelihood
    rng = np.random.default_rng(9)
    d = Dataset.from_arrays(np.exp(rng.normal(1.0, 0.5, 400)))
    fit = ml_fit(d, "normal")
    c = np.array([math.log(fit.reparam(0.5).t_pr), math.log(fit.params_hat.sigma)])
    for ang in np.linspace(0, 2 * np.pi, 8, endpoint=False):
        steps = np.linspace(0, 0.2, 12)
        pts = c + np.outer(steps, [math.cos(ang), math.sin(ang)])
        R = [relative_likelihood_grid(d, "normal", [math.exp(a)], [math.exp(b)], 0.5, fit)[0, 0]
             for a, b in pts]
        assert np.all(np.diff(R) < 0)


def test_ml_invariance_across_p_r(censored):
    fit = ml_fit(censored, "sev")
    q = [dist.quantile(0.1, dist.reparam_to_ls(fit.reparam(p), "sev"), "sev")
         for p in (0.01, 0.2, 0.6)]
    np.testing.assert_allclose(q, q[0], rtol=1e-13)


def test_level_zero_degenerates(censored):
    ci = profile_ci(censored, "sev", ("quantile", 0.1), level=0.0)
    assert ci.lower == ci.upper == ci.estimate


def _grid_scan_profile(d, fam, target, level, fit):
    """Endpoints from a dense (psi, log sigma) deviance scan."""
    cd = compile_data(d)
    m, s = fit.params_hat.mu, fit.params_hat.sigma
    kind, v = target
    if kind == "quantile":
        zp = float(dist.std_quantile(v, fam))
        psi_hat = m + zp * s
        mu_of = lambda psi, sg: psi - zp * sg  # noqa: E731
    else:
        lt = math.log(v)
        psi_hat = (lt - m) / s
        mu_of = lambda psi, sg: lt - psi * sg  # noqa: E731
    crit = stats.chi2.ppf(level, 1)
    psis = psi_hat + np.linspace(-3, 3, 3001)
    taus = math.log(s) + np.linspace(-2.5, 2.5, 2001)
    P, T = np.meshgrid(psis, taus, indexing="ij")
    dev = 2 * (fit.loglik_max - loglik_arrays(cd, mu_of(P, np.exp(T)), np.exp(T), fam))
    prof = dev.min(axis=1) - crit
    inside = prof <= 0
    idx = np.flatnonzero(inside)
    i0, i1 = idx[0], idx[-1]
    assert i0 > 0 and i1 < len(psis) - 1, "scan box too small"

    def cross(a, b):
        return psis[a] + (psis[b] - psis[a]) * prof[a] / (prof[a] - prof[b])

    return cross(i0 - 1, i0), cross(i1, i1 + 1)


@pytest.mark.parametrize("target", [("quantile", 0.1), ("quantile", 0.5), ("F_at_t", 5.0)])
def test_profile_ci_grid_oracle(censored, target):
    fit = ml_fit(censored, "sev")
    ci = profile_ci(censored, "sev", target, 0.95, fit)
    lo, hi = _grid_scan_profile(censored, "sev", target, 0.95, fit)
    if target[0] == "quantile":
        assert math.log(ci.lower) == pytest.approx(lo, abs=1e-3)
        assert math.log(ci.upper) == pytest.approx(hi, abs=1e-3)
    else:
        assert ci.lower == pytest.approx(float(dist.std_cdf(lo, "sev")), abs=1e-3)
        assert ci.upper == pytest.approx(float(dist.std_cdf(hi, "sev")), abs=1e-3)
    assert ci.lower < ci.estimate < ci.upper


def test_profile_ci_narrows_with_level(censored):
    a = profile_ci(censored, "sev", ("quantile", 0.1), 0.8)
    b = profile_ci(censored, "sev", ("quantile", 0.1), 0.95)
    assert b.lower < a.lower < a.upper < b.upper


def test_profile_rejects_bad_target(censored):
    with pytest.raises(ValueError):
        profile_ci(censored, "sev", ("hazard", 1.0))
    with pytest.raises(ValueError):
        profile_ci(censored, "sev", ("quantile", 1.5))
