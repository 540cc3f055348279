"""Posterior sampling in (log t_pr, log sigma) and its summaries.

The sampler is a Gaussian random-walk Metropolis kernel whose scale and
covariance adapt during warmup and are frozen afterwards.  All chains step
in lockstep as arrays, but each chain draws its random numbers from its own
counter-based stream, so a chain's output does not depend on how many other
chains run beside it.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import distributions as dist
from .data import Dataset, max_nonparametric_p
from .distributions import Family, as_family
from .errors import DataError, GuardError, NumericalError
from .likelihood import FitResult, _start_values, compile_data, loglik_arrays, ml_fit
from .priors import CJComponent, NoninfPriorSpec, ProductPrior, is_proper, joint_log_prior

__all__ = [
    "SamplerConfig",
    "DrawSet",
    "chain_streams",
    "adaptive_metropolis",
    "sample_posterior",
    "gelman_rubin",
    "init_from_ml",
    "equal_tail_ci",
    "quantile_mcse",
    "posterior_functionals",
    "smith_gelfand",
    "sample_prior_bounded",
    "default_p_r",
]

log = logging.getLogger(__name__)

BLOCK = 512  # iterations of random numbers generated per chain at a time
Z995 = 2.5758293035489004


@dataclass(frozen=True)
class SamplerConfig:
    chains: int = 4
    draws_per_chain: int = 2500
    warmup: int = 2000
    thin: int = 1
    seed: int = 0
    target_accept: float = 0.35
    bounding_rect: tuple | None = None  # ((y_lo, y_hi), (tau_lo, tau_hi))
    rhat_threshold: float = 1.05

    def __post_init__(self):
        for name in ("chains", "draws_per_chain", "thin"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.warmup < 0:
            raise ValueError("warmup must be nonnegative")
        if not 0 < self.target_accept < 1:
            raise ValueError("target_accept must lie in (0, 1)")
        if self.bounding_rect is not None:
            (a, b), (c, d) = self.bounding_rect
            if not (a < b and c < d) or not all(map(math.isfinite, (a, b, c, d))):
                raise ValueError("bounding_rect must be finite with lo < hi")


@dataclass
class DrawSet:
    """Draws of (log t_pr, log sigma) with shape (chains, draws, 2)."""

    draws: np.ndarray
    p_r: float
    family: Family
    t_c: float | None = None
    acceptance: np.ndarray | None = None
    rhat: dict = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)

    @property
    def n_chains(self) -> int:
        return self.draws.shape[0]

    @property
    def log_tpr(self) -> np.ndarray:
        return self.draws[..., 0].ravel()

    @property
    def log_sigma(self) -> np.ndarray:
        return self.draws[..., 1].ravel()

    @property
    def sigma(self) -> np.ndarray:
        return np.exp(self.log_sigma)

    @property
    def mu(self) -> np.ndarray:
        z = float(dist.std_quantile(self.p_r, self.family))
        return self.log_tpr - z * self.sigma

    def to_csv(self) -> str:
        lines = ["chain,iter,log_tpr,log_sigma"]
        for c in range(self.draws.shape[0]):
            for i, (a, b) in enumerate(self.draws[c]):
                lines.append(f"{c},{i},{a!r},{b!r}")
        return "\n".join(lines) + "\n"


def chain_streams(seed: int, n: int, offset: Sequence[int] = ()) -> list[np.random.Generator]:
    """One Philox stream per chain, keyed by (seed, *offset, chain id)."""
    return [np.random.Generator(np.random.Philox(
        np.random.SeedSequence(int(seed), spawn_key=tuple(offset) + (k,)))) for k in range(n)]


def default_p_r(d: Dataset) -> float:
    """Half the largest nonparametric estimate of the fraction failing.

    General interval-censored data have no estimator here; the fraction of
    units known to have failed stands in.
    """
    try:
        return 0.5 * max_nonparametric_p(d)
    except DataError:
        p = 0.5 * d.n_failures / d.n_units
        log.info("default_p_r", extra={"kv": {"p_r": p, "note": "known failed fraction used"}})
        return p


# ---------------------------------------------------------------------------
# Sampler core


def adaptive_metropolis(log_target: Callable, init: np.ndarray, streams, n_warmup: int,
                        n_draws: int, thin: int = 1, target_accept: float = 0.35,
                        init_cov: np.ndarray | None = None):
    """Run K random-walk Metropolis chains in lockstep.

    Parameters
    ----------
    log_target : callable
        Maps arrays ``(y, tau)`` of shape (K,) to log densities (K,).
    init : (K, 2) array
        Starting points; the target must be finite there.
    streams : list of Generator
        One per chain.
    init_cov : (K, 2, 2) or (2, 2) array, optional
        Starting proposal covariance.

    Returns
    -------
    draws : (K, n_draws, 2) array
    accept : (K,) acceptance rate over the retained iterations
    """
    x = np.array(init, dtype=float)
    K = x.shape[0]
    if len(streams) != K:
        raise ValueError("need one random stream per chain")
    lp = np.asarray(log_target(x[:, 0], x[:, 1]), dtype=float)
    if not np.all(np.isfinite(lp)):
        raise NumericalError("log target is not finite at some starting points")

    cov = np.broadcast_to(np.eye(2) * 0.01 if init_cov is None else init_cov, (K, 2, 2)).copy()
    chol = _safe_chol(cov)
    log_lam = np.full(K, math.log(2.38 / math.sqrt(2)))
    # covariance refits at these warmup iterations, then step size only
    refits = {int(n_warmup * f) for f in (0.15, 0.3, 0.5, 0.75)} - {0}
    win_start, rm_t = 0, 0
    window = []

    total = n_warmup + n_draws * thin
    out = np.empty((K, n_draws, 2))
    acc_count = np.zeros(K)
    eps = u = None
    for it in range(total):
        j = it % BLOCK
        if j == 0:
            m = min(BLOCK, total - it)
            eps = np.stack([s.standard_normal((m, 2)) for s in streams], axis=1)
            u = np.stack([s.random(m) for s in streams], axis=1)
        step = np.einsum("kij,kj->ki", chol, eps[j]) * np.exp(log_lam)[:, None]
        prop = x + step
        lpp = np.asarray(log_target(prop[:, 0], prop[:, 1]), dtype=float)
        with np.errstate(invalid="ignore", over="ignore"):
            log_ratio = np.where(np.isnan(lpp), -np.inf, lpp - lp)
        accept = np.log(u[j]) < log_ratio
        x = np.where(accept[:, None], prop, x)
        lp = np.where(accept, lpp, lp)

        if it < n_warmup:
            rm_t += 1
            a = np.minimum(1.0, np.exp(np.minimum(log_ratio, 0.0)))
            log_lam += (a - target_accept) / rm_t ** 0.6
            window.append(x.copy())
            if it + 1 in refits:
                w = np.array(window[win_start:])  # (n, K, 2)
                n = w.shape[0]
                if n >= 20:
                    c = np.einsum("nki,nkj->kij", w - w.mean(0), w - w.mean(0)) / (n - 1)
                    shrink = n / (n + 5.0)
                    cov = shrink * c + (1 - shrink) * 1e-3 * np.eye(2)
                    chol = _safe_chol(cov)
                    log_lam[:] = math.log(2.38 / math.sqrt(2))
                    rm_t = 0
                win_start = len(window)
        else:
            k = it - n_warmup
            acc_count += accept
            if k % thin == thin - 1:
                out[:, k // thin] = x
    return out, acc_count / max(1, n_draws * thin)


def _safe_chol(cov):
    cov = np.array(cov, dtype=float)
    out = np.empty_like(cov)
    for k in range(cov.shape[0]):
        c = 0.5 * (cov[k] + cov[k].T)
        jitter = 0.0
        for _ in range(10):
            try:
                out[k] = np.linalg.cholesky(c + jitter * np.eye(2))
                break
            except np.linalg.LinAlgError:
                jitter = max(1e-10, jitter * 10 or 1e-10 * np.trace(np.abs(c)) + 1e-12)
        else:
            out[k] = np.eye(2) * 0.1
    return out


# ---------------------------------------------------------------------------
# Initialization


def wald_box(fit: FitResult, p_r: float, level_z: float = Z995):
    """Centre and half-widths of the Wald box in (log t_pr, log sigma)."""
    centre = np.array([math.log(fit.reparam(p_r).t_pr), math.log(fit.params_hat.sigma)])
    cov = fit.cov_sampling(p_r)
    var = np.diag(cov)
    half = level_z * np.sqrt(np.where(np.isfinite(var) & (var > 0), var, 0.0))
    return centre, half


def init_from_ml(fit: FitResult, cfg: SamplerConfig, p_r: float, streams=None,
                 data: Dataset | None = None) -> np.ndarray:
    """Starting points drawn uniformly in the 99% Wald box; one row per chain.

    A fit that did not converge falls back to probability-plot estimates
    jittered by 10% of sigma (in both coordinates).
    """
    streams = streams or chain_streams(cfg.seed, cfg.chains)
    if fit.converged:
        centre, half = wald_box(fit, p_r)
    else:
        if data is None:
            raise DataError("fit did not converge and no data given for a fallback start")
        start = _start_values(data, fit.family)
        z = float(dist.std_quantile(p_r, fit.family))
        centre = np.array([start.mu + z * start.sigma, math.log(start.sigma)])
        half = np.array([0.1 * start.sigma, 0.1])
    u = np.array([s.uniform(-1.0, 1.0, 2) for s in streams])
    return centre + u * half


# ---------------------------------------------------------------------------
# Posterior sampling


def _in_rect(y, tau, rect):
    if rect is None:
        return True
    (a, b), (c, d) = rect
    return (y >= a) & (y <= b) & (tau >= c) & (tau <= d)


def _guard(prior, n_failures: int, only_left: bool = False):
    if not is_proper(prior):
        if only_left and n_failures:
            # no proof either way; the likelihood stays bounded away from zero as sigma grows
            warnings.warn("every failure is left-censored: with an improper prior the posterior "
                          "may itself be improper", RuntimeWarning, stacklevel=3)
        if n_failures < 3:
            raise GuardError(
                f"an improper prior needs at least three failures for a usable posterior; "
                f"the data have {n_failures}")
        if n_failures == 3:
            warnings.warn("only three failures with an improper prior: expect heavy posterior tails",
                          RuntimeWarning, stacklevel=3)


def sample_posterior(d: Dataset, family, prior, cfg: SamplerConfig = SamplerConfig(),
                     p_r: float | None = None, fit: FitResult | None = None,
                     fim_source=None, t_c: float | None = None) -> DrawSet:
    """Sample the posterior of (log t_pr, log sigma).

    ``p_r`` defaults to half the largest nonparametric cdf estimate.  R-hat
    values above ``cfg.rhat_threshold`` are recorded in ``flags``; the draws
    are returned regardless.
    """
    family = as_family(family)
    _guard(prior, d.n_failures,
           only_left=d.count("left") > 0 and d.count("left") == d.n_failures)
    p_r = default_p_r(d) if p_r is None else p_r
    if not 0 < p_r < 1:
        raise DataError(f"p_r={p_r} is not a usable probability")
    fit = fit or ml_fit(d, family)
    cd = compile_data(d)
    z = float(dist.std_quantile(p_r, family))
    rect = cfg.bounding_rect

    def log_target(y, tau):
        s = np.exp(tau)
        v = loglik_arrays(cd, y - z * s, s, family) + joint_log_prior(prior, y, tau, family, p_r,
                                                                        fim_source)
        return np.where(_in_rect(y, tau, rect), v, -np.inf)

    if fim_source != "quadrature" and _uses_type1_fim(prior):
        log.info("fim_interpolation", extra={"kv": {
            "note": "Type-1 prior uses tabled FIM elements; smooth only to interpolation "
                    "accuracy (< 1e-4) between nodes"}})
    streams = chain_streams(cfg.seed, cfg.chains)
    init = init_from_ml(fit, cfg, p_r, streams, d)
    init = _repair_init(init, log_target, fit, p_r, streams)
    cov0 = fit.cov_sampling(p_r) if fit.converged else None
    if cov0 is not None and not np.all(np.linalg.eigvalsh(cov0) > 0):
        cov0 = None
    draws, acc = adaptive_metropolis(log_target, init, streams, cfg.warmup, cfg.draws_per_chain,
                                     cfg.thin, cfg.target_accept, cov0)
    ds = DrawSet(draws, p_r, family, t_c, acc)
    _diagnose(ds, cfg)
    return ds


def _uses_type1_fim(prior) -> bool:
    if isinstance(prior, NoninfPriorSpec):
        return prior.type1
    if isinstance(prior, ProductPrior):
        return any(isinstance(f, CJComponent) and f.t_c is not None
                   for f in (prior.location, prior.scale))
    return False


def _repair_init(init, log_target, fit, p_r, streams, tries=50):
    """Replace starting points at which the target is not finite."""
    init = np.array(init, float)
    lp = log_target(init[:, 0], init[:, 1])
    bad = ~np.isfinite(lp)
    if not bad.any():
        return init
    centre, half = wald_box(fit, p_r) if fit.converged else (init.mean(0), np.full(2, 0.1))
    for _ in range(tries):
        for k in np.flatnonzero(bad):
            init[k] = centre + streams[k].uniform(-1, 1, 2) * half
        lp = log_target(init[:, 0], init[:, 1])
        bad = ~np.isfinite(lp)
        if not bad.any():
            return init
        half = half * 0.5
    raise NumericalError("could not find starting points with finite posterior density")


def _diagnose(ds: DrawSet, cfg: SamplerConfig):
    if ds.n_chains >= 2 and ds.draws.shape[1] >= 10:
        for k, name in enumerate(("log_tpr", "log_sigma")):
            ds.rhat[name] = gelman_rubin(ds, k)
        worst = max(ds.rhat.values())
        if not worst <= cfg.rhat_threshold:
            ds.flags.append(f"rhat={worst:.4f} exceeds {cfg.rhat_threshold}")
    if ds.acceptance is not None:
        lo, hi = float(np.min(ds.acceptance)), float(np.max(ds.acceptance))
        if lo < 0.15 or hi > 0.6:
            ds.flags.append(f"acceptance range [{lo:.3f}, {hi:.3f}] outside [0.15, 0.6]")


# ---------------------------------------------------------------------------
# Diagnostics and summaries


def gelman_rubin(draws, coordinate=0, split: bool = True) -> float:
    """Potential scale reduction factor for one coordinate.

    ``draws`` is a `DrawSet` (``coordinate`` 0 = log t_pr, 1 = log sigma)
    or an array of shape (chains, draws).  Uses
    ``sqrt(1 + var(chain means) / mean(within-chain variance))``, which is
    at least 1 and equals 1 exactly when all chain means agree.
    """
    x = draws.draws[..., coordinate] if isinstance(draws, DrawSet) else np.asarray(draws, float)
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 10:
        raise ValueError("need at least 2 chains with 10 draws each")
    if split:
        h = x.shape[1] // 2
        x = np.concatenate([x[:, :h], x[:, x.shape[1] - h:]], axis=0)
    w = float(np.mean(np.var(x, axis=1, ddof=1)))
    b = float(np.var(np.mean(x, axis=1), ddof=1))
    if w == 0.0:
        warnings.warn("zero within-chain variance: chains are degenerate", RuntimeWarning)
        return 1.0 if b == 0.0 else math.inf
    return math.sqrt(1.0 + b / w)


def equal_tail_ci(values, level: float = 0.95) -> tuple[float, float]:
    """Equal-tail interval from linearly interpolated sample quantiles."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("empty sample")
    if not 0 <= level <= 1:
        raise ValueError("level must lie in [0, 1]")
    lo, hi = np.quantile(v, [(1 - level) / 2, (1 + level) / 2])
    return float(lo), float(hi)


def quantile_mcse(chains, q: float, n_batches: int = 20) -> float:
    """Monte-Carlo standard error of a sample quantile by batch means.

    ``chains`` has shape (n_chains, n_draws); each chain is cut into
    ``n_batches`` contiguous batches and the spread of the batch quantiles
    gives the error of the pooled estimate.
    """
    x = np.atleast_2d(np.asarray(chains, float))
    m = x.shape[1] // n_batches
    if m < 5:
        raise ValueError("too few draws for batch means")
    batches = x[:, : m * n_batches].reshape(x.shape[0] * n_batches, m)
    bq = np.quantile(batches, q, axis=1)
    return float(np.std(bq, ddof=1) / math.sqrt(bq.size))


def _target_samples(ds: DrawSet, target):
    kind = target[0]
    sigma = ds.sigma
    z = float(dist.std_quantile(ds.p_r, ds.family))
    if kind == "F_at_t":
        t = float(target[1])
        if not t > 0:
            raise ValueError("target time must be positive")
        return dist.std_cdf((math.log(t) - ds.log_tpr) / sigma + z, ds.family)
    if kind == "quantile":
        zp = float(dist.std_quantile(float(target[1]), ds.family))
        return np.exp(ds.log_tpr + (zp - z) * sigma)
    if kind == "sigma":
        return sigma
    if kind == "beta":
        return 1.0 / sigma
    if kind == "mu":
        return ds.mu
    raise ValueError(f"unknown target {kind!r}")


def target_name(target) -> str:
    return target[0] if len(target) == 1 else f"{target[0]}({target[1]:g})"


def posterior_functionals(ds: DrawSet, targets, level: float = 0.95) -> dict:
    """Samples, median and equal-tail interval for each target.

    Targets are tuples: ``("F_at_t", t)``, ``("quantile", p)``, ``("beta",)``,
    ``("sigma",)`` or ``("mu",)``.
    """
    out = {}
    for tg in targets:
        tg = tuple(tg)
        s = _target_samples(ds, tg)
        lo, hi = equal_tail_ci(s, level)
        out[target_name(tg)] = {"samples": s, "median": float(np.median(s)),
                                "lower": lo, "upper": hi, "level": level}
    return out


# ---------------------------------------------------------------------------
# Bounded prior sampling and the rejection-sampling posterior


def _rect_of(rect):
    (a, b), (c, d) = rect
    a, b, c, d = (float(v) for v in (a, b, c, d))
    if not (a < b and c < d) or not all(map(math.isfinite, (a, b, c, d))):
        raise ValueError("rectangle must be finite with lo < hi")
    return a, b, c, d


def sample_prior_bounded(prior, rect, n: int, family, p_r: float, seed: int = 0,
                         fim_source=None, grid: int = 201) -> DrawSet:
    """Draws from the prior restricted to ``rect`` by uniform-envelope rejection.

    The envelope height is the density maximum over a ``grid`` x ``grid``
    lattice, inflated by 5%; a proposal above it triggers a warning.
    """
    family = as_family(family)
    a, b, c, d = _rect_of(rect)
    Y, T = np.meshgrid(np.linspace(a, b, grid), np.linspace(c, d, grid))
    top = float(np.max(joint_log_prior(prior, Y, T, family, p_r, fim_source))) + math.log(1.05)
    if not math.isfinite(top):
        raise NumericalError("prior density is not finite anywhere on the rectangle")
    rng = chain_streams(seed, 1, offset=(7,))[0]
    got, tried = [], 0
    while sum(len(g) for g in got) < n:
        m = max(1024, 2 * (n - sum(len(g) for g in got)))
        y = rng.uniform(a, b, m)
        t = rng.uniform(c, d, m)
        lp = joint_log_prior(prior, y, t, family, p_r, fim_source) - top
        if np.any(lp > 0):
            warnings.warn("prior exceeds the rejection envelope; draws are approximate",
                          RuntimeWarning)
        keep = np.log(rng.random(m)) < lp
        got.append(np.column_stack([y[keep], t[keep]]))
        tried += m
        if tried >= 10_000_000 and sum(len(g) for g in got) / tried < 1e-6:
            raise NumericalError(f"envelope acceptance below 1e-6 after {tried} proposals")
    draws = np.concatenate(got)[:n]
    return DrawSet(draws[None], p_r, family)


def smith_gelfand(d: Dataset | None, family, prior, n_target: int, rect, p_r: float,
                  seed: int = 0, fit: FitResult | None = None, fim_source=None,
                  t_c: float | None = None) -> DrawSet:
    """Exact posterior draws by accepting prior draws with probability R(theta).

    R is the relative likelihood exp(loglik - loglik_max); the prior is
    restricted to ``rect``.  With ``d=None`` the likelihood is taken as 1.
    """
    family = as_family(family)
    a, b, c, dd = _rect_of(rect)
    z = float(dist.std_quantile(p_r, family))
    if d is not None:
        fit = fit or ml_fit(d, family)
        cd = compile_data(d)
        llmax = fit.loglik_max
    rng = chain_streams(seed, 1, offset=(11,))[0]
    got, tried, n_got = [], 0, 0
    while n_got < n_target:
        m = int(min(2_000_000, max(20_000, 4 * (n_target - n_got) / max(n_got / max(tried, 1), 1e-3))))
        pri = sample_prior_bounded(prior, rect, m, family, p_r,
                                   seed=int(rng.integers(2 ** 63)), fim_source=fim_source)
        y, t = pri.draws[0, :, 0], pri.draws[0, :, 1]
        if d is None:
            keep = np.ones(m, bool)
        else:
            s = np.exp(t)
            ll = loglik_arrays(cd, y - z * s, s, family)
            if np.any(ll > llmax + 1e-8):
                llmax = float(np.max(ll))
            keep = np.log(rng.random(m)) < ll - llmax
        got.append(np.column_stack([y[keep], t[keep]]))
        n_got += int(keep.sum())
        tried += m
        if tried >= 1_000_000 and n_got / tried < 1e-6:
            raise NumericalError(
                f"rejection sampler acceptance {n_got}/{tried} below 1e-6; shrink the rectangle")
    draws = np.concatenate(got)[:n_target]
    return DrawSet(draws[None], p_r, family, t_c, np.array([n_got / tried]))
