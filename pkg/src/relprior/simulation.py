"""Coverage of Bayesian credible intervals under Type-1 censoring.

True parameters are mu=0, sigma=1.  Each replicate draws n units, censors
them at the ``p_fail`` quantile, redraws if fewer than three fail, and fits
the posterior with ``p_r = r/(2n)``.  Equal-tail intervals for four
quantiles are then scored against the known truth.

Replicates are independent.  Their chains are run together as one batched
sampler, but every chain has its own random stream keyed by (seed,
replicate, chain), so results do not depend on batch size.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

from . import distributions as dist
from .data import Dataset, Observation
from .distributions import Family, as_family
from .errors import RelpriorError
from .fim import get_fim_table
from .likelihood import ml_fit
from .posterior import adaptive_metropolis, chain_streams, gelman_rubin, wald_box
from .priors import ij_log_density

__all__ = [
    "QUANTILES",
    "CellSpec",
    "CellResult",
    "simulate_dataset",
    "run_cell",
    "score_intervals",
    "prob_fewer_than_3",
    "mc_standard_error",
    "run_sweep",
    "coverage_csv",
]

log = logging.getLogger(__name__)

QUANTILES = (0.01, 0.05, 0.10, 0.50)
CSV_COLUMNS = ("family", "prior", "E_r", "p_fail", "quantile", "alpha_L", "alpha_U",
               "coverage", "n_reps", "discarded")
REDUCED = dict(chains=2, draws=1500, warmup=1000)
PAPER_FIDELITY = dict(chains=4, draws=2500, warmup=2000)


@dataclass(frozen=True)
class CellSpec:
    """One cell of the coverage study.

    ``p_fail=1`` means complete (uncensored) samples.
    """

    family: str
    expected_failures: float
    p_fail: float
    prior: str = "flat"
    n_reps: int = 1000
    credible_level: float = 0.95
    seed: int = 0
    chains: int = REDUCED["chains"]
    draws: int = REDUCED["draws"]
    warmup: int = REDUCED["warmup"]
    batch_reps: int = 250

    def __post_init__(self):
        if self.family not in ("weibull", "lognormal"):
            raise ValueError("family must be 'weibull' or 'lognormal'")
        if self.prior not in ("flat", "ij"):
            raise ValueError("prior must be 'flat' or 'ij'")
        if not 0 < self.p_fail <= 1:
            raise ValueError("p_fail must lie in (0, 1]")
        if not self.expected_failures > 0:
            raise ValueError("expected_failures must be positive")
        if not 0 < self.credible_level <= 1:
            raise ValueError("credible_level must lie in (0, 1]")
        if self.n_reps < 1:
            raise ValueError("n_reps must be positive")

    @property
    def kernel(self) -> Family:
        return as_family(self.family)

    @property
    def n(self) -> int:
        return max(1, int(math.floor(self.expected_failures / self.p_fail + 0.5)))

    @property
    def complete(self) -> bool:
        return self.p_fail >= 1.0

    @property
    def t_c(self) -> float:
        if self.complete:
            return math.inf
        return math.exp(float(dist.std_quantile(self.p_fail, self.kernel)))


@dataclass
class CellResult:
    cell: CellSpec
    alpha_lower: dict
    alpha_upper: dict
    coverage: dict
    reps_completed: int
    reps_discarded_lt3: int
    reps_failed: int = 0
    rhat_flagged: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def rhat_fail_share(self) -> float:
        return self.rhat_flagged / max(1, self.reps_completed)

    @property
    def quality_ok(self) -> bool:
        return self.rhat_fail_share <= 0.02

    def rows(self):
        c = self.cell
        for q in QUANTILES:
            yield {
                "family": c.family, "prior": c.prior, "E_r": c.expected_failures,
                "p_fail": c.p_fail, "quantile": q, "alpha_L": self.alpha_lower[q],
                "alpha_U": self.alpha_upper[q], "coverage": self.coverage[q],
                "n_reps": self.reps_completed, "discarded": self.reps_discarded_lt3,
            }


def _rep_rng(seed, rep, attempt):
    return np.random.Generator(np.random.Philox(
        np.random.SeedSequence(int(seed), spawn_key=(0, int(rep), int(attempt)))))


def simulate_dataset(cell: CellSpec, rep_seed, attempt: int = 0) -> Dataset:
    """n lifetimes from the true model, censored at t_c.

    ``rep_seed`` is the replicate index (combined with ``cell.seed``) or a
    `numpy.random.Generator`.
    """
    rng = rep_seed if isinstance(rep_seed, np.random.Generator) else _rep_rng(cell.seed, rep_seed,
                                                                             attempt)
    fam = cell.kernel
    n = cell.n
    z = dist.std_quantile(rng.random(n), fam)
    t = np.exp(z)
    if cell.complete:
        return Dataset(tuple(Observation.exact(v) for v in np.sort(t)))
    tc = cell.t_c
    fails = np.sort(t[t <= tc])
    obs = [Observation.exact(v) for v in fails]
    if n - fails.size:
        obs.append(Observation.right(tc, n - fails.size))
    return Dataset(tuple(obs))


def _draw_replicate(cell, rep):
    """Dataset for replicate ``rep``, redrawn until it has >= 3 failures."""
    discarded = 0
    for attempt in range(10_000):
        d = simulate_dataset(cell, rep, attempt)
        if d.n_failures >= 3:
            return d, discarded
        discarded += 1
    raise RelpriorError("could not draw a replicate with three failures")


def score_intervals(lower, upper, truth):
    """Per-replicate miss indicators: lower end above truth, upper end below.

    A zero-width interval covers nothing; one sitting exactly on the truth is
    scored as a lower-side miss so the three rates still sum to one.
    """
    lower, upper = np.asarray(lower), np.asarray(upper)
    on_truth = (upper <= lower) & (lower == truth)
    return (lower > truth) | on_truth, upper < truth


def prob_fewer_than_3(cell: CellSpec) -> float:
    """P(r <= 2) for r ~ Binomial(n, p_fail)."""
    return float(stats.binom.cdf(2, cell.n, cell.p_fail))


def mc_standard_error(p_hat: float, n_reps: int) -> float:
    if n_reps < 1:
        raise ValueError("n_reps must be at least 1")
    return math.sqrt(p_hat * (1.0 - p_hat) / n_reps)


def _batched_target(fails, counts_exact, n_cens, log_tc, z_pr, fam, prior, table):
    """Log posterior for K chains, each attached to its own replicate's data."""
    mask = counts_exact
    sum_log = np.sum(np.where(mask > 0, fails, 0.0), axis=1)
    r = mask.sum(axis=1)
    has_cens = n_cens > 0

    def target(y, tau):
        s = np.exp(tau)
        mu = y - z_pr * s
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            zz = (fails - mu[:, None]) / s[:, None]
            ll = np.sum(mask * dist.std_logpdf(zz, fam), axis=1) - r * tau - sum_log
            if has_cens.any():
                zc = (log_tc - mu) / s
                ll = ll + np.where(has_cens, n_cens * dist.std_logsf(zc, fam), 0.0)
            if prior == "ij":
                ll = ll + ij_log_density(y, tau, math.exp(log_tc), z_pr, table)
        return np.where(np.isnan(ll), -np.inf, ll)

    return target


def run_cell(cell: CellSpec, interval_fn: Callable | None = None,
             progress: Callable | None = None) -> CellResult:
    """Estimate one-sided error rates and two-sided coverage for one cell.

    ``interval_fn(rep, p, log_tp_samples) -> (lo, hi)`` may replace the
    equal-tail credible interval (on the log-time scale) for scoring checks.
    """
    fam = cell.kernel
    truth = {q: float(dist.std_quantile(q, fam)) for q in QUANTILES}  # log t_q at mu=0, sigma=1
    table = get_fim_table(fam) if cell.prior == "ij" else None
    if cell.prior == "ij" and cell.complete:
        table = None  # complete-data IJ prior is flat in (log t_pr, log sigma)
    miss_lo = {q: 0 for q in QUANTILES}
    miss_hi = {q: 0 for q in QUANTILES}
    done = discarded = failed = flagged = 0
    notes = []
    C = cell.chains
    level = cell.credible_level

    for start in range(0, cell.n_reps, cell.batch_reps):
        reps = range(start, min(cell.n_reps, start + cell.batch_reps))
        batch = []
        for rep in reps:
            d, k = _draw_replicate(cell, rep)
            discarded += k
            try:
                fit = ml_fit(d, fam)
            except RelpriorError as exc:
                failed += 1
                notes.append(f"rep {rep}: {exc}")
                continue
            batch.append((rep, d, fit))
        if not batch:
            continue
        rmax = max(d.count("exact") for _, d, _ in batch)
        R = len(batch)
        fails = np.zeros((R, rmax))
        wts = np.zeros((R, rmax))
        n_cens = np.zeros(R)
        z_pr = np.zeros(R)
        inits, covs, streams = [], [], []
        for i, (rep, d, fit) in enumerate(batch):
            lt = np.log([o.t for o in d.observations if o.kind.value == "exact"])
            fails[i, : lt.size] = lt
            wts[i, : lt.size] = 1.0
            r = d.n_failures
            n_cens[i] = d.n_units - r
            p_r = r / (2.0 * d.n_units)
            z_pr[i] = float(dist.std_quantile(p_r, fam))
            st = chain_streams(cell.seed, C, offset=(1, rep))
            centre, half = wald_box(fit, p_r)
            inits.extend(centre + s.uniform(-1.0, 1.0, 2) * half for s in st)
            cv = fit.cov_sampling(p_r)
            if not np.all(np.linalg.eigvalsh(cv) > 0):
                cv = np.eye(2) * 0.01
            covs.extend([cv] * C)
            streams.extend(st)
        rep_of = np.repeat(np.arange(R), C)
        log_tc = math.log(cell.t_c) if not cell.complete else 0.0
        target = _batched_target(fails[rep_of], wts[rep_of], n_cens[rep_of], log_tc, z_pr[rep_of],
                                 fam, cell.prior if table is not None else "flat", table)
        draws, acc = adaptive_metropolis(target, np.array(inits), streams, cell.warmup, cell.draws,
                                         1, 0.35, np.array(covs))
        draws = draws.reshape(R, C, cell.draws, 2)
        for i, (rep, d, fit) in enumerate(batch):
            y, tau = draws[i, ..., 0], draws[i, ..., 1]
            if C >= 2:
                rh = max(gelman_rubin(y), gelman_rubin(tau))
                if not rh <= 1.05:
                    flagged += 1
            zr = z_pr[i]
            for q in QUANTILES:
                ltp = y + (truth[q] - zr) * np.exp(tau)
                if interval_fn is not None:
                    lo, hi = interval_fn(rep, q, ltp)
                else:
                    lo, hi = np.quantile(ltp.ravel(), [(1 - level) / 2, (1 + level) / 2])
                a, b = score_intervals(lo, hi, truth[q])
                miss_lo[q] += int(a)
                miss_hi[q] += int(b)
            done += 1
        if progress:
            progress(done)

    n = max(done, 1)
    aL = {q: miss_lo[q] / n for q in QUANTILES}
    aU = {q: miss_hi[q] / n for q in QUANTILES}
    cov = {q: 1.0 - aL[q] - aU[q] for q in QUANTILES}
    res = CellResult(cell, aL, aU, cov, done, discarded, failed, flagged, notes)
    if not res.quality_ok:
        res.notes.append(f"R-hat > 1.05 in {flagged}/{done} replicates (more than 2%)")
    return res


def run_sweep(cells, progress: Callable | None = None):
    """Run cells independently; a failing cell is reported, not fatal."""
    results, errors = [], []
    for cell in cells:
        try:
            results.append(run_cell(cell))
        except RelpriorError as exc:
            errors.append((cell, str(exc)))
            log.error("cell failed: %s", exc)
        if progress:
            progress(cell)
    return results, errors


def coverage_csv(results) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for res in results:
        for row in res.rows():
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()
