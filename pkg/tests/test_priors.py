import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from relprior import distributions as dist
from relprior import priors as pr
from relprior.distributions import ReparamPoint
from relprior.fim import TypeOne, TypeTwo, fim_for_sample, get_fim_table, scaled_fim
from relprior.priors import (CJComponent, Flat, InformativeMarginalSpec, NoninfPriorSpec,
                             ProductPrior)

T_C = 135.0
Z995 = stats.norm.ppf(0.995)

# ---------------------------------------------------------------------------
# Table of noninformative priors, typed in row by row.
# Each entry: (kind, parameterization, order, type2 log density, type1 log density)
# with arguments (f11, f12, f22, t, s, zeta, zp).


def _lq(f11, f12, f22, z):
    return np.log(f11 * z * z - 2 * f12 * z + f22)


def _ld(f11, f12, f22):
    return 0.5 * np.log(f11 * f22 - f12 * f12)


ROWS = [
    ("jeffreys", "mu_sigma", None, lambda a, b, c, t, s, e, z: -2 * np.log(s),
     lambda a, b, c, t, s, e, z: -2 * np.log(s) + _ld(a, b, c)),
    ("jeffreys", "logtpr_sigma", None, lambda a, b, c, t, s, e, z: -2 * np.log(s),
     lambda a, b, c, t, s, e, z: -2 * np.log(s) + _ld(a, b, c)),
    ("jeffreys", "tpr_sigma", None, lambda a, b, c, t, s, e, z: -np.log(t) - 2 * np.log(s),
     lambda a, b, c, t, s, e, z: -np.log(t) - 2 * np.log(s) + _ld(a, b, c)),
    ("jeffreys", "logtpr_logsigma", None, lambda a, b, c, t, s, e, z: -np.log(s),
     lambda a, b, c, t, s, e, z: -np.log(s) + _ld(a, b, c)),
    ("jeffreys", "zeta_sigma", None, lambda a, b, c, t, s, e, z: -np.log(s),
     lambda a, b, c, t, s, e, z: -np.log(s) + _ld(a, b, c)),
    ("jeffreys", "zeta_logsigma", None, lambda a, b, c, t, s, e, z: 0 * s,
     lambda a, b, c, t, s, e, z: _ld(a, b, c)),
    ("ij", "mu_sigma", None, lambda a, b, c, t, s, e, z: -np.log(s),
     lambda a, b, c, t, s, e, z: -np.log(s) + 0.5 * np.log(a * c)),
    ("ij", "logtpr_sigma", None, lambda a, b, c, t, s, e, z: -np.log(s),
     lambda a, b, c, t, s, e, z: -np.log(s) + 0.5 * (np.log(a) + _lq(a, b, c, z))),
    ("ij", "tpr_sigma", None, lambda a, b, c, t, s, e, z: -np.log(t * s),
     lambda a, b, c, t, s, e, z: -np.log(t * s) + 0.5 * (np.log(a) + _lq(a, b, c, z))),
    ("ij", "logtpr_logsigma", None, lambda a, b, c, t, s, e, z: 0 * s,
     lambda a, b, c, t, s, e, z: 0.5 * (np.log(a) + _lq(a, b, c, z))),
    ("ij", "zeta_sigma", None, lambda a, b, c, t, s, e, z: -np.log(s),
     lambda a, b, c, t, s, e, z: -np.log(s) + 0.5 * (np.log(a) + _lq(a, b, c, e))),
    ("ij", "zeta_logsigma", None, lambda a, b, c, t, s, e, z: 0 * s,
     lambda a, b, c, t, s, e, z: 0.5 * (np.log(a) + _lq(a, b, c, e))),
    ("reference", "logtpr_sigma", None, lambda a, b, c, t, s, e, z: -2 * np.log(s), None),
    ("reference", "logtpr_sigma", "location", lambda a, b, c, t, s, e, z: -np.log(s), None),
    ("reference", "logtpr_sigma", "scale", lambda a, b, c, t, s, e, z: -np.log(s), None),
    ("reference", "tpr_sigma", None, lambda a, b, c, t, s, e, z: -np.log(t) - 2 * np.log(s), None),
    ("reference", "tpr_sigma", "location", lambda a, b, c, t, s, e, z: -np.log(t * s), None),
    ("reference", "tpr_sigma", "scale", lambda a, b, c, t, s, e, z: -np.log(t * s), None),
    ("reference", "logtpr_logsigma", None, lambda a, b, c, t, s, e, z: -np.log(s), None),
    ("reference", "logtpr_logsigma", "location", lambda a, b, c, t, s, e, z: 0 * s, None),
    ("reference", "logtpr_logsigma", "scale", lambda a, b, c, t, s, e, z: 0 * s, None),
    ("reference", "zeta_sigma", None, lambda a, b, c, t, s, e, z: -np.log(s), None),
    ("reference", "zeta_sigma", "location",
     lambda a, b, c, t, s, e, z: -np.log(s) - 0.5 * _lq(a, b, c, e), None),
    ("reference", "zeta_sigma", "scale", lambda a, b, c, t, s, e, z: -np.log(s), None),
    ("reference", "zeta_logsigma", None, lambda a, b, c, t, s, e, z: 0 * s, None),
    ("reference", "zeta_logsigma", "location", lambda a, b, c, t, s, e, z: -0.5 * _lq(a, b, c, e),
     None),
    ("reference", "zeta_logsigma", "scale", lambda a, b, c, t, s, e, z: 0 * s, None),
    ("reference", "mu_sigma", None, lambda a, b, c, t, s, e, z: -2 * np.log(s), None),
]


def _points(param, rng, n=6, t_e=100.0):
    """Random points in the given parameterization plus (t_pr, sigma, zeta)."""
    s = np.exp(rng.uniform(-1.5, 0.8, n))
    t = np.exp(rng.uniform(3.5, 6.0, n))
    zeta = rng.uniform(-3, 2, n)
    th2 = np.log(s) if param.endswith("logsigma") else s
    th1 = {"mu_sigma": np.log(t), "logtpr_sigma": np.log(t), "tpr_sigma": t,
           "logtpr_logsigma": np.log(t), "zeta_sigma": zeta, "zeta_logsigma": zeta}[param]
    return th1, th2, t, s, zeta


def _mu(param, th1, s, zp, t_e):
    if param == "mu_sigma":
        return th1
    if param.startswith("zeta"):
        return math.log(t_e) - th1 * s
    return (th1 if param != "tpr_sigma" else np.log(th1)) - zp * s


@pytest.mark.parametrize("row", ROWS, ids=[f"{r[0]}-{r[1]}-{r[2]}" for r in ROWS])
@pytest.mark.parametrize("family", ["sev", "normal"])
def test_catalog_type2(row, family):
    kind, param, order, f2, _ = row
    p_r, t_e = 0.1, 100.0
    spec = NoninfPriorSpec(kind, param, TypeTwo(), p_r=p_r, t_e=t_e, order=order)
    rng = np.random.default_rng(1)
    th1, th2, t, s, zeta = _points(param, rng)
    f = scaled_fim(math.inf, family)
    zp = float(dist.std_quantile(p_r, family))
    got = pr.noninf_log_density(spec, (th1, th2), family)
    tt = th1 if param == "tpr_sigma" else t
    want = f2(f.f11, f.f12, f.f22, tt, s, th1 if param.startswith("zeta") else zeta, zp)
    diff = got - want
    assert np.ptp(diff) < 1e-10


@pytest.mark.parametrize("row", [r for r in ROWS if r[4] is not None],
                         ids=[f"{r[0]}-{r[1]}" for r in ROWS if r[4] is not None])
def test_catalog_type1(row):
    kind, param, order, _, f1 = row
    family, p_r, t_e = "sev", 0.1, 100.0
    spec = NoninfPriorSpec(kind, param, TypeOne(T_C), p_r=p_r, t_e=t_e, order=order)
    rng = np.random.default_rng(2)
    th1, th2, t, s, zeta = _points(param, rng, n=5)
    zp = float(dist.std_quantile(p_r, family))
    mu = _mu(param, th1, s, zp, t_e)
    zc = (math.log(T_C) - mu) / s
    fs = [scaled_fim(float(z), family) for z in zc]
    a, b, c = (np.array([getattr(f, k) for f in fs]) for k in ("f11", "f12", "f22"))
    got = pr.noninf_log_density(spec, (th1, th2), family, "quadrature")
    tt = th1 if param == "tpr_sigma" else t
    want = f1(a, b, c, tt, s, th1 if param.startswith("zeta") else zeta, zp)
    np.testing.assert_allclose(got, want, atol=1e-10, rtol=0)


def _jacobian(param, th1, th2, zp, t_e, h=1e-5):
    def to_ms(a, b):
        s = math.exp(b) if param.endswith("logsigma") else b
        return np.array([_mu(param, a, s, zp, t_e), s])

    h1, h2 = h * max(1.0, abs(th1)), h * max(1.0, abs(th2))
    return np.column_stack([(to_ms(th1 + h1, th2) - to_ms(th1 - h1, th2)) / (2 * h1),
                            (to_ms(th1, th2 + h2) - to_ms(th1, th2 - h2)) / (2 * h2)])


@pytest.mark.parametrize("param", [p.value for p in pr.Parameterization])
def test_jeffreys_equals_transformed_information(param):
    # sqrt det of J' I J with I from the sample FIM and J by finite differences
    family, p_r, t_e = "normal", 0.2, 80.0
    spec = NoninfPriorSpec("jeffreys", param, TypeOne(T_C), p_r=p_r, t_e=t_e)
    zp = float(dist.std_quantile(p_r, family))
    rng = np.random.default_rng(4)
    th1, th2, *_ = _points(param, rng, n=4, t_e=t_e)
    vals = []
    for a, b in zip(th1, th2):
        J = _jacobian(param, a, b, zp, t_e)
        s = math.exp(b) if param.endswith("logsigma") else b
        mu = _mu(param, a, s, zp, t_e)
        I = fim_for_sample(1, dist.LSParams(float(mu), s), TypeOne(T_C), family)
        oracle = 0.5 * math.log(np.linalg.det(J.T @ I @ J))
        vals.append(float(pr.noninf_log_density(spec, (a, b), family, "quadrature")) - oracle)
    assert np.ptp(vals) < 1e-7


def test_reference_type1_rejected():
    with pytest.raises(ValueError, match="Type-1"):
        NoninfPriorSpec("reference", "logtpr_sigma", TypeOne(T_C))


def test_zeta_needs_t_e():
    with pytest.raises(ValueError):
        NoninfPriorSpec("ij", "zeta_sigma", TypeTwo())


def test_ij_complete_limit_example():
    # z_c -> inf: IJ(log t_pr, log sigma) = 0.5 log(f11 Q(z)) with the complete-data sev values
    spec = NoninfPriorSpec("ij", "logtpr_logsigma", TypeOne(1e12), p_r=0.3)
    z = float(dist.std_quantile(0.3, "sev"))
    f11, f12, f22 = 1.0, 0.4227843351, 1.8236806
    want = 0.5 * math.log(f11 * (f11 * z * z - 2 * f12 * z + f22))
    got = float(pr.noninf_log_density(spec, (math.log(5.0), math.log(0.5)), "sev", "quadrature"))
    assert got == pytest.approx(want, abs=1e-7)


def test_type2_equivalences():
    rng = np.random.default_rng(8)
    t, s = np.exp(rng.uniform(1, 5, 10)), np.exp(rng.uniform(-1, 1, 10))
    ref = NoninfPriorSpec("reference", "tpr_sigma", TypeTwo(), p_r=0.1, order="location")
    ij = NoninfPriorSpec("ij", "tpr_sigma", TypeTwo(), p_r=0.1)
    a = pr.noninf_log_density(ref, (t, s), "sev")
    b = pr.noninf_log_density(ij, (t, s), "sev")
    np.testing.assert_allclose(a, b, atol=1e-14)
    np.testing.assert_allclose(a, -np.log(t * s), atol=1e-14)
    for param in ("mu_sigma", "tpr_sigma", "zeta_logsigma"):
        kw = dict(p_r=0.1, t_e=50.0)
        j = pr.noninf_log_density(NoninfPriorSpec("jeffreys", param, TypeTwo(), **kw), (t, s), "lev")
        r = pr.noninf_log_density(NoninfPriorSpec("reference", param, TypeTwo(), **kw), (t, s), "lev")
        assert np.ptp(j - r) < 1e-12


@pytest.mark.parametrize("kind", ["jeffreys", "ij"])
def test_log_transform_invariance(kind):
    # density in (log t, log s) equals the image of the (t, s) density
    spec = NoninfPriorSpec(kind, "tpr_sigma", TypeOne(T_C), p_r=0.1)
    logs = pr.replace_param(spec, "logtpr_logsigma")
    rng = np.random.default_rng(6)
    t, s = np.exp(rng.uniform(4, 6, 8)), np.exp(rng.uniform(-2, 0.5, 8))
    a = pr.noninf_log_density(spec, (t, s), "normal", "quadrature") + np.log(t) + np.log(s)
    b = pr.noninf_log_density(logs, (np.log(t), np.log(s)), "normal", "quadrature")
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_reciprocal_invariance():
    # IJ in (t_pr, beta = 1/sigma) built directly from J' I J against the image of IJ(t_pr, sigma)
    family, p_r = "sev", 0.1
    zp = float(dist.std_quantile(p_r, family))
    spec = NoninfPriorSpec("ij", "tpr_sigma", TypeOne(T_C), p_r=p_r)
    rng = np.random.default_rng(12)
    for _ in range(5):
        t, beta = math.exp(rng.uniform(4.3, 5.5)), math.exp(rng.uniform(-0.5, 2))
        s = 1 / beta
        mu = math.log(t) - zp * s
        I = fim_for_sample(1, dist.LSParams(mu, s), TypeOne(T_C), family)
        # d(mu, sigma)/d(t, beta)
        J = np.array([[1 / t, zp / beta**2], [0.0, -1 / beta**2]])
        Ith = J.T @ I @ J
        # CJ for t given beta carries a factor beta that depends on beta only: drop it
        direct = 0.5 * math.log(Ith[0, 0]) - math.log(beta) + 0.5 * math.log(Ith[1, 1])
        image = float(pr.noninf_log_density(spec, (t, s), family, "quadrature")) - 2 * math.log(beta)
        assert direct == pytest.approx(image, abs=1e-10)


def test_range99_lognormal():
    spec = InformativeMarginalSpec("beta", "lognormal", (1.5, 5))
    m = pr.range99_to_shape_params(spec)
    assert m.loc == pytest.approx(1.0074515, abs=1e-6)
    # quantile matching with the exact normal 0.995 point
    assert m.scale == pytest.approx(math.log(5 / 1.5) / (2 * Z995), rel=1e-12)
    assert m.scale == pytest.approx(0.2337059, abs=1e-6)
    q = stats.lognorm(s=m.scale, scale=math.exp(m.loc)).ppf([0.005, 0.995])
    np.testing.assert_allclose(q, [1.5, 5], rtol=1e-10)
    sym = pr.range99_to_shape_params(InformativeMarginalSpec("t_pr", "lognormal", (math.exp(-2), math.exp(2))))
    assert sym.loc == pytest.approx(0.0, abs=1e-15)


def test_range99_log_lst_quantiles():
    spec = InformativeMarginalSpec("t_pr", "log_lst", (100, 5000), df=5)
    m = pr.range99_to_shape_params(spec)
    q = np.exp(m.loc + m.scale * stats.t.ppf([0.005, 0.995], 5))
    np.testing.assert_allclose(q, [100, 5000], rtol=1e-10)


def test_range99_truncated_exact():
    spec = InformativeMarginalSpec("sigma", "truncated_normal", (0.05, 3.0), exact_truncated=True)
    m = pr.range99_to_shape_params(spec)
    dist_t = stats.truncnorm(-m.loc / m.scale, np.inf, loc=m.loc, scale=m.scale)
    np.testing.assert_allclose(dist_t.ppf([0.005, 0.995]), [0.05, 3.0], rtol=1e-8)
    parent = pr.range99_to_shape_params(InformativeMarginalSpec("sigma", "truncated_normal", (0.05, 3.0)))
    np.testing.assert_allclose(stats.norm(parent.loc, parent.scale).ppf([0.005, 0.995]), [0.05, 3.0])


def test_marginal_spec_validation():
    with pytest.raises(ValueError):
        InformativeMarginalSpec("beta", "log_lst", (1, 2))
    with pytest.raises(ValueError):
        InformativeMarginalSpec("beta", "lognormal", (3, 2))
    with pytest.raises(ValueError):
        ProductPrior(InformativeMarginalSpec("beta", "lognormal", (1, 2)), Flat())


S7_KINDS = ["ltnorm", "lrtnorm", "ltlst", "lrtlst"]


@pytest.mark.parametrize("kind", S7_KINDS)
def test_s7_densities_integrate(kind):
    rng = np.random.default_rng(31)
    for _ in range(5):
        loc, scale = rng.uniform(-2, 4), rng.uniform(0.2, 3)
        df = rng.uniform(2, 30)
        f = lambda w: pr.log_transformed_density(kind, w, loc, scale, df)  # noqa: E731
        val = integrate.quad(f, -np.inf, np.inf, limit=400, epsabs=1e-11, epsrel=1e-11)[0]
        assert val == pytest.approx(1.0, abs=1e-6)


def test_lrt_is_reflection():
    w = np.linspace(-6, 4, 301)
    np.testing.assert_allclose(pr.log_transformed_density("lrtnorm", w, 1.2, 0.7),
                               pr.log_transformed_density("ltnorm", -w, 1.2, 0.7), rtol=1e-12, atol=0)
    np.testing.assert_allclose(pr.log_transformed_density("lrtlst", w, 1.2, 0.7, 4),
                               pr.log_transformed_density("ltlst", -w, 1.2, 0.7, 4), rtol=1e-12, atol=0)


def test_ltlst_large_df_is_ltnorm():
    s = np.linspace(-3, 3, 61)
    a = pr.log_transformed_density("ltlst", s, 5.0, 10.0, 1e4)
    b = pr.log_transformed_density("ltnorm", s, 5.0, 10.0)
    np.testing.assert_allclose(a, b, rtol=1e-3)


def test_weak_limits_flat():
    wide = pr.MarginalParams(0.0, 1e6, None, True, False)
    spec = InformativeMarginalSpec("t_pr", "lognormal", (1, 2))
    s = np.linspace(-100, 100, 2001)
    v = np.exp(pr.marginal_log_density(spec, s, wide))
    assert v.max() / v.min() < 1.001
    # t * lognormal density(t) is the log-scale density
    t = np.geomspace(0.01, 100, 500)
    v = np.exp(pr.marginal_log_density(spec, np.log(t), wide))
    assert v.max() / v.min() < 1.001
    # truncated normal with a huge scale is flat on (0, 100]
    x = np.geomspace(0.01, 100, 500)
    d = pr.log_transformed_density("ltnorm", np.log(x), 0.0, 1e6) / x
    assert d.max() / d.min() < 1.001


def test_pr_fail_examples():
    r = ReparamPoint(180.0, 0.02, 0.10)
    assert pr.prob_fail_before(T_C, r, "normal") == pytest.approx(1.298e-55, rel=5e-3)
    assert pr.prob_fail_before(T_C, ReparamPoint(135.0, 0.02, 0.10), "normal") == pytest.approx(0.1, abs=1e-15)
    assert pr.prob_fail_before(T_C, ReparamPoint(120.0, 0.02, 0.10), "normal") == pytest.approx(0.999997, abs=1e-6)
    # one unit: at-least-one equals the single-unit probability
    assert pr.pr_at_least_one_failure(1, T_C, r, "normal") == pytest.approx(1.298e-55, rel=5e-3)
    assert pr.pr_at_least_one_failure(10, T_C, ReparamPoint(135.0, 0.3, 0.1), "normal") == pytest.approx(1 - 0.9**10)


def _surface(fim_source=None):
    spec = NoninfPriorSpec("ij", "logtpr_logsigma", TypeOne(T_C), p_r=0.1)
    tp = np.geomspace(10, 1000, 200)
    sg = np.geomspace(0.01, 50, 200)
    return tp, sg, pr.ij_relative_surface(spec, tp, sg, "normal", fim_source)


def test_ij_surface_features():
    tp, sg, R = _surface()
    i002 = np.argmin(abs(sg - 0.02))
    assert R[i002, np.argmin(abs(tp - T_C / 2))] == pytest.approx(1.0, abs=0.05)
    assert R[i002, np.argmin(abs(tp - 1.2 * T_C))] < 1e-6
    assert abs(R[-1].mean() - 0.1) / 0.1 < 0.2
    # nonincreasing in t_pr at every sigma
    assert np.all(np.diff(R, axis=1) <= 1e-12)


def test_ij_surface_plateau():
    tp, sg, R = _surface()
    cells = R[np.ix_(sg < 0.1, tp < T_C / 2)]
    assert cells.min() > 0.9


def test_joint_cj_product_is_ij():
    rng = np.random.default_rng(3)
    y, tau = rng.uniform(4, 6, 20), rng.uniform(-3, 1, 20)
    prod = ProductPrior(CJComponent(T_C), CJComponent(T_C))
    ij = NoninfPriorSpec("ij", "logtpr_logsigma", TypeOne(T_C), p_r=0.1)
    a = pr.joint_log_prior(prod, y, tau, "sev", 0.1)
    b = pr.joint_log_prior(ij, y, tau, "sev", 0.1)
    c = pr.ij_log_density(y, tau, T_C, float(dist.std_quantile(0.1, "sev")), get_fim_table("sev"))
    np.testing.assert_allclose(a, b, atol=1e-12)
    np.testing.assert_allclose(a, c, atol=1e-12)


def test_joint_flat_constant():
    v = pr.joint_log_prior(ProductPrior(Flat(), Flat()), np.linspace(0, 5, 7), np.linspace(-2, 2, 7),
                           "normal", 0.3)
    assert np.ptp(v) == 0
    w = pr.joint_log_prior(NoninfPriorSpec("ij"), np.linspace(0, 5, 7), 0.3, "normal", 0.3)
    assert np.ptp(w) == 0


def test_joint_componentwise():
    beta = InformativeMarginalSpec("beta", "lognormal", (1.5, 3))
    prior = ProductPrior(CJComponent(T_C), beta)
    y, tau = 5.1, -0.6
    got = float(pr.joint_log_prior(prior, y, tau, "sev", 0.1, "quadrature"))
    m = pr.range99_to_shape_params(beta)
    # log sigma = -log beta; density of tau is the normal density of log beta at -tau
    scale_part = stats.norm(m.loc, m.scale).logpdf(-tau)
    s = math.exp(tau)
    mu = y - float(dist.std_quantile(0.1, "sev")) * s
    loc_part = 0.5 * math.log(scaled_fim((math.log(T_C) - mu) / s, "sev").f11)
    assert got == pytest.approx(scale_part + loc_part, abs=1e-12)


def test_joint_jacobians():
    y, tau = np.array([4.0, 5.0]), np.array([-0.5, 0.2])
    s = np.exp(tau)
    j = NoninfPriorSpec("jeffreys", "mu_sigma")
    # 1/sigma^2 in (mu, sigma) times d(mu, sigma)/d(y, tau) = sigma: -tau
    v = pr.joint_log_prior(j, y, tau, "normal", 0.1)
    assert np.ptp(v + tau) < 1e-12
    t = NoninfPriorSpec("ij", "tpr_sigma")
    assert np.ptp(pr.joint_log_prior(t, y, tau, "normal", 0.1)) < 1e-12
    with pytest.raises(ValueError):
        pr.joint_log_prior(NoninfPriorSpec("ij", "zeta_sigma", t_e=5.0), y, tau, "normal", 0.1)
    del s


def test_joint_p_r_shift():
    # a spec with its own p_r evaluated at a different sampling p_r
    spec = NoninfPriorSpec("ij", "logtpr_logsigma", TypeOne(T_C), p_r=0.1)
    y, tau = 5.0, -1.0
    zs, zt = (float(dist.std_quantile(p, "normal")) for p in (0.1, 0.4))
    direct = pr.noninf_log_density(spec, (y + (zs - zt) * math.exp(tau), tau), "normal")
    assert float(pr.joint_log_prior(spec, y, tau, "normal", 0.4)) == pytest.approx(float(direct))


def test_propriety_markers():
    assert not pr.is_proper(NoninfPriorSpec("ij"))
    beta = InformativeMarginalSpec("beta", "lognormal", (1.5, 3))
    tp = InformativeMarginalSpec("t_pr", "lognormal", (10, 300))
    assert not pr.is_proper(ProductPrior(Flat(), beta))
    assert pr.is_proper(ProductPrior(tp, beta))


@settings(max_examples=30, deadline=None)
@given(lo=st.floats(0.01, 10), ratio=st.floats(1.5, 100), shape=st.sampled_from(["lognormal", "truncated_normal"]))
def test_marginals_normalized(lo, ratio, shape):
    spec = InformativeMarginalSpec("sigma", shape, (lo, lo * ratio))
    val = integrate.quad(lambda s: math.exp(float(pr.marginal_log_density(spec, s))), -np.inf, np.inf,
                         limit=200)[0]
    assert val == pytest.approx(1.0, abs=1e-6)
