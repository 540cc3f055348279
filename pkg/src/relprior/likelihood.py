"""Censored-data log-likelihood, ML fitting and likelihood-based intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from . import distributions as dist
from .data import Dataset, Kind, nonparametric_estimate
from .distributions import Family, LSParams, ReparamPoint, as_family
from .errors import DataError, NumericalError

__all__ = [
    "CompiledData",
    "compile_data",
    "loglik",
    "loglik_arrays",
    "FitResult",
    "ml_fit",
    "relative_likelihood_grid",
    "ProfileInterval",
    "profile_ci",
    "profile_loglik",
]

ITER_CAP = 500
FTOL = 1e-10


@dataclass(frozen=True)
class CompiledData:
    """Log-times and counts grouped by censoring kind, ready for vector math."""

    log_exact: np.ndarray
    w_exact: np.ndarray
    log_right: np.ndarray
    w_right: np.ndarray
    log_left: np.ndarray
    w_left: np.ndarray
    log_lo: np.ndarray
    log_hi: np.ndarray
    w_int: np.ndarray
    n_units: int = 0
    n_failures: int = 0

    @property
    def sum_log_exact(self) -> float:
        return float(np.dot(self.w_exact, self.log_exact))


def compile_data(d: Dataset) -> CompiledData:
    def pick(kind, attr):
        sel = [o for o in d.observations if o.kind is kind]
        vals = np.log(np.array([getattr(o, attr) for o in sel], dtype=float))
        w = np.array([o.count for o in sel], dtype=float)
        return vals, w

    le, we = pick(Kind.EXACT, "t")
    lr, wr = pick(Kind.RIGHT, "t")
    ll, wl = pick(Kind.LEFT, "t_upper")
    lo, wi = pick(Kind.INTERVAL, "t_lower")
    hi, _ = pick(Kind.INTERVAL, "t_upper")
    return CompiledData(le, we, lr, wr, ll, wl, lo, hi, wi, d.n_units, d.n_failures)


def _log_diff_cdf(zl, zu, family):
    """log(Phi(zu) - Phi(zl)) for zl < zu, using whichever tail is smaller."""
    lsl, lsu = dist.std_logsf(zl, family), dist.std_logsf(zu, family)
    lcl, lcu = dist.std_logcdf(zl, family), dist.std_logcdf(zu, family)
    upper = lsl + dist._log1mexp(np.minimum(lsu - lsl, 0.0))
    lower = lcu + dist._log1mexp(np.minimum(lcl - lcu, 0.0))
    return np.where(zl > 0, upper, lower)


def loglik_arrays(cd: CompiledData, mu, sigma, family) -> np.ndarray:
    """Log-likelihood at arrays of (mu, sigma); broadcasts over leading shape.

    The exact-failure term includes the Jacobian -log t, so values are true
    log densities of the observed times.
    """
    family = as_family(family)
    mu = np.asarray(mu, dtype=float)[..., None]
    sigma = np.asarray(sigma, dtype=float)[..., None]
    total = np.zeros(np.broadcast_shapes(mu.shape, sigma.shape)[:-1])
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if cd.w_exact.size:
            z = (cd.log_exact - mu) / sigma
            total = total + np.sum(cd.w_exact * (dist.std_logpdf(z, family) - np.log(sigma)), axis=-1)
            total = total - cd.sum_log_exact
        if cd.w_right.size:
            z = (cd.log_right - mu) / sigma
            total = total + np.sum(cd.w_right * dist.std_logsf(z, family), axis=-1)
        if cd.w_left.size:
            z = (cd.log_left - mu) / sigma
            total = total + np.sum(cd.w_left * dist.std_logcdf(z, family), axis=-1)
        if cd.w_int.size:
            zl = (cd.log_lo - mu) / sigma
            zu = (cd.log_hi - mu) / sigma
            total = total + np.sum(cd.w_int * _log_diff_cdf(zl, zu, family), axis=-1)
    return np.where(np.isnan(total), -np.inf, total)


def loglik(d: Dataset | CompiledData, p: LSParams | ReparamPoint, family) -> float:
    """Log-likelihood of the dataset; ``-inf`` for impossible configurations."""
    if isinstance(p, ReparamPoint):
        p = dist.reparam_to_ls(p, family)
    cd = d if isinstance(d, CompiledData) else compile_data(d)
    return float(loglik_arrays(cd, p.mu, p.sigma, family))


# ---------------------------------------------------------------------------
# Maximum likelihood


@dataclass
class FitResult:
    params_hat: LSParams
    loglik_max: float
    converged: bool
    iterations: int
    approx_cov: np.ndarray
    family: Family = Family.NORMAL
    grad_norm: float = float("nan")
    messages: list[str] = field(default_factory=list)

    def reparam(self, p_r: float) -> ReparamPoint:
        return dist.ls_to_reparam(self.params_hat, p_r, self.family)

    def cov_sampling(self, p_r: float) -> np.ndarray:
        """Covariance of (log t_pr, log sigma) by the delta method."""
        s = self.params_hat.sigma
        z = float(dist.std_quantile(p_r, self.family))
        jac = np.array([[1.0, z], [0.0, 1.0 / s]])
        return jac @ self.approx_cov @ jac.T

    def to_dict(self, p_r: float | None = None) -> dict:
        p = self.params_hat
        out = {
            "family": self.family.value,
            "mu": p.mu,
            "sigma": p.sigma,
            "loglik": self.loglik_max,
            "converged": self.converged,
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "cov_mu_sigma": self.approx_cov.tolist(),
        }
        if self.family is Family.SEV:
            w = dist.ls_to_weibull(p)
            out["eta"], out["beta"] = w.eta, w.beta
        if p_r is not None:
            r = self.reparam(p_r)
            out["p_r"], out["t_pr"] = p_r, r.t_pr
        return out


def _num_grad(f, x, h):
    """Five-point central differences."""
    g = np.empty_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h[i]
        g[i] = (f(x - 2 * e) - 8 * f(x - e) + 8 * f(x + e) - f(x + 2 * e)) / (12 * h[i])
    return g


def _num_hessian(f, x, h):
    k = len(x)
    H = np.empty((k, k))
    f0 = f(x)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h[i]
        H[i, i] = (f(x + ei) - 2 * f0 + f(x - ei)) / h[i] ** 2
        for j in range(i + 1, k):
            ej = np.zeros(k)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4 * h[i] * h[j])
    return H


def _start_values(d: Dataset, family) -> LSParams:
    """Probability-plot regression, with crude fallbacks."""
    all_t = np.log([o.time for o in d.observations])
    spread = float(np.std(all_t)) or 1.0
    try:
        pts = nonparametric_estimate(d).plot_points
    except DataError:
        pts = []
    pts = [(t, p) for t, p in pts if 0 < p < 1]
    if len(pts) >= 2:
        x = dist.std_quantile(np.array([p for _, p in pts]), family)
        y = np.log([t for t, _ in pts])
        if np.ptp(x) > 0:
            slope, intercept = np.polyfit(x, y, 1)
            if slope > 0 and np.isfinite(intercept):
                return LSParams(float(intercept), float(slope))
    if pts:
        t, p = pts[-1]
        return LSParams(math.log(t) - float(dist.std_quantile(p, family)) * spread, spread)
    return LSParams(float(np.median(all_t)), spread)


def ml_fit(d: Dataset, family, start: LSParams | None = None) -> FitResult:
    """Maximize the log-likelihood over (mu, log sigma).

    Nelder-Mead from a probability-plot start, then BFGS on central
    differences, then a few Newton steps on a numerical Hessian if the
    gradient is still above 1e-6.
    """
    family = as_family(family)
    if d.n_failures == 0:
        raise DataError("no failures: likelihood is maximized at infinity (all units censored)")
    cd = compile_data(d)
    start = start or _start_values(d, family)

    def nll(x):
        v = loglik_arrays(cd, x[0], math.exp(x[1]) if x[1] < 700 else math.inf, family)
        v = float(v)
        return -v if math.isfinite(v) else 1e300

    x0 = np.array([start.mu, math.log(start.sigma)])
    res = optimize.minimize(nll, x0, method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": FTOL, "maxiter": ITER_CAP,
                                     "maxfev": 4 * ITER_CAP})
    iters = int(res.nit)
    x = res.x
    res2 = optimize.minimize(nll, x, method="BFGS", jac="3-point",
                             options={"gtol": 1e-9, "maxiter": ITER_CAP})
    iters += int(res2.nit)
    if res2.fun <= res.fun:
        x = res2.x
    h = np.array([1e-3, 1e-3])
    grad = _num_grad(nll, x, h)
    for _ in range(20):
        if np.linalg.norm(grad) < 1e-8:
            break
        H = _num_hessian(nll, x, np.array([1e-4, 1e-4]))
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        # tiny steps are below the objective's rounding resolution: trust the
        # quadratic model there instead of a line search
        while np.linalg.norm(step) > 1e-5 and lam > 1e-4 and nll(x - lam * step) > nll(x):
            lam /= 2
        if lam <= 1e-4:
            break
        x = x - lam * step
        iters += 1
        grad = _num_grad(nll, x, h)
    if not np.all(np.isfinite(x)) or nll(x) >= 1e300:
        raise NumericalError("likelihood maximization failed to find a finite optimum")
    gnorm = float(np.linalg.norm(grad))
    mu, sigma = float(x[0]), math.exp(x[1])
    messages = []
    converged = gnorm < 1e-6 and iters <= 3 * ITER_CAP
    if not converged:
        messages.append(f"gradient norm {gnorm:.3g} at termination")

    # observed information in (mu, tau), mapped to (mu, sigma)
    Ht = _num_hessian(nll, x, np.array([1e-4, 1e-4]))
    try:
        cov_t = np.linalg.inv(Ht)
    except np.linalg.LinAlgError:
        cov_t = np.full((2, 2), np.nan)
    jac = np.diag([1.0, sigma])
    cov = jac @ cov_t @ jac.T
    cov = 0.5 * (cov + cov.T)
    if not np.all(np.linalg.eigvalsh(cov) > 0):
        messages.append("observed information is not positive definite")
    return FitResult(LSParams(mu, sigma), -nll(x), converged, iters, cov, family, gnorm, messages)


# ---------------------------------------------------------------------------
# Relative likelihood and profile intervals


def _check_axis(v, name):
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"{name} grid must be a nonempty 1-D array")
    if np.any(~np.isfinite(v)) or np.any(v <= 0):
        raise ValueError(f"{name} grid must be positive and finite")
    if v.size > 1 and np.any(np.diff(v) <= 0):
        raise ValueError(f"{name} grid must be strictly increasing")
    return v


def relative_likelihood_grid(d: Dataset, family, t_pr, sigma, p_r: float,
                             fit: FitResult | None = None) -> np.ndarray:
    """R(t_pr, sigma) = exp(loglik - loglik_max) on a rectangular grid.

    Returns an array of shape ``(len(sigma), len(t_pr))``.
    """
    family = as_family(family)
    t_pr = _check_axis(t_pr, "t_pr")
    sigma = _check_axis(sigma, "sigma")
    if not 0 < p_r < 1:
        raise ValueError("p_r must lie strictly between 0 and 1")
    fit = fit or ml_fit(d, family)
    z = float(dist.std_quantile(p_r, family))
    S, T = np.meshgrid(sigma, t_pr, indexing="ij")
    ll = loglik_arrays(compile_data(d), np.log(T) - z * S, S, family)
    top = max(fit.loglik_max, float(np.max(ll)))
    return np.exp(ll - top)


@dataclass(frozen=True)
class ProfileInterval:
    target: str
    value: float
    estimate: float
    lower: float
    upper: float
    level: float
    lower_open: bool = False
    upper_open: bool = False

    def to_dict(self):
        return dict(self.__dict__)


def _target_map(target, family):
    """(mu(psi, sigma), psi_hat(mu, sigma), to_natural, limits) for a target tag."""
    kind, value = target
    if kind == "quantile":
        if not 0 < value < 1:
            raise ValueError("quantile probability must lie in (0, 1)")
        zp = float(dist.std_quantile(value, family))
        return (lambda psi, s: psi - zp * s, lambda m, s: m + zp * s, math.exp, None)
    if kind == "F_at_t":
        if not value > 0:
            raise ValueError("evaluation time must be positive")
        lt = math.log(value)
        lims = tuple(float(dist.std_quantile(q, family)) for q in (1e-12, 1 - 1e-12))
        return (lambda psi, s: lt - psi * s, lambda m, s: (lt - m) / s,
                lambda psi: float(dist.std_cdf(psi, family)), lims)
    raise ValueError(f"unknown target {kind!r}; use 'quantile' or 'F_at_t'")


def profile_loglik(cd: CompiledData, family, mu_of, psi, tau_hat, width=12.0, n_scan=49):
    """max over log sigma of loglik with mu tied to psi by ``mu_of``."""
    taus = tau_hat + np.linspace(-width, width, n_scan)
    s = np.exp(taus)
    vals = loglik_arrays(cd, mu_of(psi, s), s, family)
    k = int(np.argmax(vals))
    if not np.isfinite(vals[k]):
        return -np.inf, tau_hat
    lo, hi = taus[max(k - 1, 0)], taus[min(k + 1, n_scan - 1)]

    def f(tau):
        v = loglik_arrays(cd, mu_of(psi, math.exp(tau)), math.exp(tau), family)
        return -float(v) if np.isfinite(v) else 1e300

    r = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    if -r.fun >= vals[k]:
        return -float(r.fun), float(r.x)
    return float(vals[k]), float(taus[k])


def profile_ci(d: Dataset, family, target, level: float = 0.95,
               fit: FitResult | None = None) -> ProfileInterval:
    """Likelihood-ratio interval for a quantile or a failure probability.

    ``target`` is ``("quantile", p)`` or ``("F_at_t", t)``.  The search runs
    in log t_p for quantiles and in Phi^{-1}(F) for probabilities; both are
    monotone maps so the endpoints are those of the natural scale.
    """
    family = as_family(family)
    if not 0 <= level < 1:
        raise ValueError("level must lie in [0, 1)")
    fit = fit or ml_fit(d, family)
    cd = compile_data(d)
    mu_of, psi_of, natural, lims = _target_map(target, family)
    m, s = fit.params_hat.mu, fit.params_hat.sigma
    psi_hat = psi_of(m, s)
    tau_hat = math.log(s)
    llmax = fit.loglik_max
    crit = float(stats.chi2.ppf(level, 1)) if level > 0 else 0.0
    est = natural(psi_hat)
    if crit <= 1e-14:
        return ProfileInterval(target[0], target[1], est, est, est, level)

    # rough standard error for step sizes
    if target[0] == "quantile":
        z = (psi_hat - m) / s
        g = np.array([1.0, z])
    else:
        g = np.array([-1.0 / s, -psi_hat / s])
    var = float(g @ fit.approx_cov @ g) if np.all(np.isfinite(fit.approx_cov)) else np.nan
    se = math.sqrt(var) if var > 0 else 0.1 * max(1.0, abs(psi_hat))
    if lims is None:
        reach = 60.0 * max(se, s, 1.0)
        lims = (psi_hat - reach, psi_hat + reach)

    def excess(psi):
        prof, _ = profile_loglik(cd, family, mu_of, psi, tau_hat)
        return 2.0 * (llmax - prof) - crit

    ends, open_flags = [], []
    for sign, bound in ((-1, lims[0]), (1, lims[1])):
        step = 0.5 * se
        inside = psi_hat
        found = False
        for _ in range(80):
            cand = psi_hat + sign * step
            if (cand - bound) * sign >= 0:
                cand = bound
            if excess(cand) > 0:
                found = True
                break
            inside = cand
            if cand == bound:
                break
            step *= 1.6
        if not found:
            ends.append(bound)
            open_flags.append(True)
            continue
        a, b = sorted((inside, cand))
        root = optimize.brentq(excess, a, b, xtol=1e-10, rtol=1e-10, maxiter=200)
        ends.append(root)
        open_flags.append(False)
    lo, hi = natural(ends[0]), natural(ends[1])
    return ProfileInterval(target[0], target[1], est, min(lo, hi), max(lo, hi), level,
                           open_flags[0], open_flags[1])
