"""Noninformative and informative priors for (log-)location-scale models.

Coordinates
-----------
MCMC runs in the *sampling coordinates* ``(y, tau) = (log t_pr, log sigma)``
for a chosen ``p_r``.  Noninformative priors can be written in any of six
parameterizations; `joint_log_prior` maps them (with the Jacobian) into
sampling coordinates.  Informative marginals are placed on ``t_pr``,
``sigma`` or ``beta = 1/sigma`` and are likewise expressed as densities of
``y`` or ``tau``.

All log densities here are unnormalized unless stated otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np
from scipy import optimize, special, stats

from . import distributions as dist
from .distributions import Family, ReparamPoint, as_family
from .fim import FimTable, TypeOne, TypeTwo, get_fim_table, scaled_fim

__all__ = [
    "Parameterization",
    "PriorKind",
    "NoninfPriorSpec",
    "InformativeMarginalSpec",
    "MarginalParams",
    "Flat",
    "CJComponent",
    "ProductPrior",
    "JointPriorSpec",
    "range99_to_shape_params",
    "noninf_log_density",
    "ij_relative_surface",
    "prob_fail_before",
    "pr_at_least_one_failure",
    "log_transformed_density",
    "marginal_log_density",
    "joint_log_prior",
    "ij_log_density",
    "is_proper",
    "Z995",
]

Z995 = float(special.ndtri(0.995))


class Parameterization(str, Enum):
    MU_SIGMA = "mu_sigma"
    LOGTPR_SIGMA = "logtpr_sigma"
    TPR_SIGMA = "tpr_sigma"
    LOGTPR_LOGSIGMA = "logtpr_logsigma"
    ZETA_SIGMA = "zeta_sigma"
    ZETA_LOGSIGMA = "zeta_logsigma"


class PriorKind(str, Enum):
    FLAT = "flat"
    JEFFREYS = "jeffreys"
    CJ_LOCATION = "cj_location"
    CJ_SCALE = "cj_scale"
    IJ = "ij"
    REFERENCE = "reference"


_TPR_FORMS = {Parameterization.LOGTPR_SIGMA, Parameterization.TPR_SIGMA,
              Parameterization.LOGTPR_LOGSIGMA}
_ZETA_FORMS = {Parameterization.ZETA_SIGMA, Parameterization.ZETA_LOGSIGMA}
_LOGSIGMA_FORMS = {Parameterization.LOGTPR_LOGSIGMA, Parameterization.ZETA_LOGSIGMA}


@dataclass(frozen=True)
class NoninfPriorSpec:
    """An entry of the noninformative prior catalog.

    ``order`` only matters for reference priors: ``None`` (no importance
    ordering), ``"location"`` (the location-type parameter first) or
    ``"scale"``.
    """

    kind: PriorKind
    parameterization: Parameterization = Parameterization.LOGTPR_LOGSIGMA
    censoring: Union[TypeOne, TypeTwo] = field(default_factory=TypeTwo)
    p_r: float | None = None
    t_e: float | None = None
    order: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", PriorKind(self.kind))
        object.__setattr__(self, "parameterization", Parameterization(self.parameterization))
        if not isinstance(self.censoring, (TypeOne, TypeTwo)):
            raise TypeError("censoring must be TypeOne or TypeTwo")
        if self.kind is PriorKind.REFERENCE and isinstance(self.censoring, TypeOne):
            raise ValueError("reference priors have no closed form under time (Type-1) "
                             "censoring; use the IJ prior instead")
        if self.order not in (None, "location", "scale"):
            raise ValueError("order must be None, 'location' or 'scale'")
        if self.p_r is not None and not 0 < self.p_r < 1:
            raise ValueError("p_r must lie strictly between 0 and 1")
        if self.parameterization in _ZETA_FORMS and not (self.t_e and self.t_e > 0):
            raise ValueError("zeta parameterizations need a positive t_e")

    @property
    def type1(self) -> bool:
        return isinstance(self.censoring, TypeOne)

    @property
    def proper(self) -> bool:
        return False


@dataclass(frozen=True)
class InformativeMarginalSpec:
    """A proper marginal given by its 0.005 and 0.995 quantiles.

    ``shape`` is one of ``lognormal``, ``truncated_normal``, ``log_lst``,
    ``truncated_lst``.  For ``target="t_pr"`` the quantile index defaults to
    the sampling ``p_r``.
    """

    target: str
    shape: str
    range99: tuple[float, float]
    df: float | None = None
    p_r: float | None = None
    exact_truncated: bool = False

    def __post_init__(self):
        if self.target not in ("t_pr", "beta", "sigma"):
            raise ValueError(f"unknown marginal target {self.target!r}")
        if self.shape not in ("lognormal", "truncated_normal", "log_lst", "truncated_lst"):
            raise ValueError(f"unknown marginal shape {self.shape!r}")
        lo, hi = (float(v) for v in self.range99)
        if not (0 < lo < hi < math.inf):
            raise ValueError("range99 needs 0 < q005 < q995")
        object.__setattr__(self, "range99", (lo, hi))
        if self.shape.endswith("lst"):
            if self.df is None or not self.df > 0:
                raise ValueError("LST shapes need df > 0")

    @property
    def proper(self) -> bool:
        return True


@dataclass(frozen=True)
class Flat:
    """Flat in the sampling coordinate (log t_pr or log sigma)."""

    proper = False


@dataclass(frozen=True)
class CJComponent:
    """Conditional Jeffreys factor; ``t_c=None`` means complete / Type-2 data."""

    t_c: float | None = None
    p_r: float | None = None

    proper = False

    def __post_init__(self):
        if self.t_c is not None and not self.t_c > 0:
            raise ValueError("t_c must be positive")
        if self.p_r is not None and not 0 < self.p_r < 1:
            raise ValueError("p_r must lie strictly between 0 and 1")


@dataclass(frozen=True)
class ProductPrior:
    """Independent location and scale factors.

    ``location`` covers log t_pr (Flat, CJComponent or a ``t_pr`` marginal);
    ``scale`` covers log sigma (Flat, CJComponent or a ``beta``/``sigma``
    marginal).
    """

    location: object
    scale: object

    def __post_init__(self):
        loc, sc = self.location, self.scale
        if isinstance(loc, InformativeMarginalSpec) and loc.target != "t_pr":
            raise ValueError(f"location factor cannot be a prior on {loc.target}")
        if isinstance(sc, InformativeMarginalSpec) and sc.target == "t_pr":
            raise ValueError("scale factor cannot be a prior on t_pr")
        for f in (loc, sc):
            if not isinstance(f, (Flat, CJComponent, InformativeMarginalSpec)):
                raise TypeError(f"unsupported prior factor {f!r}")

    @property
    def proper(self) -> bool:
        return self.location.proper and self.scale.proper


JointPriorSpec = Union[NoninfPriorSpec, ProductPrior]


def is_proper(spec) -> bool:
    return bool(spec.proper)


# ---------------------------------------------------------------------------
# Informative marginals


@dataclass(frozen=True)
class MarginalParams:
    """Location/scale of the fitted marginal.

    ``on_log`` marginals are normal/t on the log of the target; truncated
    ones are normal/t on the natural scale, truncated at zero.
    """

    loc: float
    scale: float
    df: float | None
    on_log: bool
    truncated: bool


def _quantile_995(df):
    return Z995 if df is None else float(stats.t.ppf(0.995, df))


def _trunc_cdf(x, m, s, df):
    base = stats.norm if df is None else stats.t(df)
    lo = base.cdf(-m / s)
    return (base.cdf((x - m) / s) - lo) / (1.0 - lo)


def range99_to_shape_params(spec: InformativeMarginalSpec) -> MarginalParams:
    """Match the 0.005 and 0.995 quantiles of the marginal to ``range99``.

    Truncated shapes match the untruncated parent's quantiles unless
    ``spec.exact_truncated`` is set, in which case the truncated
    distribution's own quantiles are solved for.
    """
    lo, hi = spec.range99
    df = spec.df if spec.shape.endswith("lst") else None
    q = _quantile_995(df)
    if spec.shape in ("lognormal", "log_lst"):
        a, b = math.log(lo), math.log(hi)
        return MarginalParams(0.5 * (a + b), (b - a) / (2.0 * q), df, True, False)
    m, s = 0.5 * (lo + hi), (hi - lo) / (2.0 * q)
    if spec.exact_truncated:
        def eqs(v):
            mm, ls = v
            ss = math.exp(ls)
            return [_trunc_cdf(lo, mm, ss, df) - 0.005, _trunc_cdf(hi, mm, ss, df) - 0.995]

        sol, info, ier, msg = optimize.fsolve(eqs, [m, math.log(s)], full_output=True, xtol=1e-13)
        if ier != 1 or max(abs(e) for e in eqs(sol)) > 1e-9:
            raise ValueError(f"could not match truncated quantiles: {msg}")
        m, s = float(sol[0]), math.exp(sol[1])
    return MarginalParams(m, s, df, False, True)


def log_transformed_density(kind: str, x, loc: float, scale: float, df: float | None = None,
                            log: bool = False):
    """Densities of log X (``lt*``) or -log X (``lrt*``) for X truncated at 0.

    X is normal (``*norm``) or location-scale t (``*lst``) with the given
    ``loc``, ``scale`` (and ``df``), truncated to X > 0.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    if kind not in ("ltnorm", "lrtnorm", "ltlst", "lrtlst"):
        raise ValueError(f"unknown density kind {kind!r}")
    s = np.asarray(x, dtype=float)
    if kind.startswith("lrt"):
        s = -s
    with np.errstate(over="ignore", invalid="ignore"):
        u = (np.exp(s) - loc) / scale
        if kind.endswith("norm"):
            core = -0.5 * u * u - 0.5 * math.log(2 * math.pi) - special.log_ndtr(loc / scale)
        else:
            if df is None or not df > 0:
                raise ValueError("LST densities need df > 0")
            core = stats.t.logpdf(u, df) - stats.t.logcdf(loc / scale, df)
        val = core - math.log(scale) + s
    val = np.where(np.isnan(val), -np.inf, val)
    return val if log else np.exp(val)


def marginal_log_density(spec: InformativeMarginalSpec, s, params: MarginalParams | None = None):
    """Log density of the sampling coordinate covered by ``spec``.

    ``s`` is log t_pr for a ``t_pr`` target and log sigma otherwise.
    """
    pm = params or range99_to_shape_params(spec)
    s = np.asarray(s, dtype=float)
    v = -s if spec.target == "beta" else s  # log of the natural target
    if pm.on_log:
        u = (v - pm.loc) / pm.scale
        if pm.df is None:
            return -0.5 * u * u - 0.5 * math.log(2 * math.pi) - math.log(pm.scale)
        return stats.t.logpdf(u, pm.df) - math.log(pm.scale)
    kind = "ltnorm" if pm.df is None else "ltlst"
    return log_transformed_density(kind, v, pm.loc, pm.scale, pm.df, log=True)


# ---------------------------------------------------------------------------
# Scaled FIM values for prior evaluation


def _f_at(z_c, family, fim_source):
    """(f11, f12, f22) at z_c from a table (default) or direct quadrature."""
    if isinstance(fim_source, str) and fim_source == "quadrature":
        z = np.asarray(z_c, float)
        vals = np.array([scaled_fim(float(v), family).matrix()[[0, 0, 1], [0, 1, 1]]
                         for v in z.ravel()])
        return tuple(vals[:, k].reshape(z.shape) for k in range(3))
    table = fim_source if isinstance(fim_source, FimTable) else get_fim_table(family)
    if table.family is not as_family(family):
        raise ValueError("FIM table family does not match")
    f11, f12, f22, _ = table.lookup(z_c)
    return f11, f12, f22


def _type2_f(censoring: TypeTwo, family):
    s = scaled_fim(censoring.z_c(family), family)
    return s.f11, s.f12, s.f22


def _log_q(f11, f12, f22, z):
    with np.errstate(divide="ignore"):
        return np.log(np.maximum(f11 * z * z - 2.0 * f12 * z + f22, 0.0))


def _zp(spec, family):
    if spec.p_r is None:
        raise ValueError("this parameterization needs p_r")
    return float(dist.std_quantile(spec.p_r, family))


def noninf_log_density(spec: NoninfPriorSpec, point, family, fim_source=None):
    """Unnormalized log density at ``point`` in the spec's own parameterization.

    ``point`` is a pair ``(theta1, theta2)`` of scalars or arrays, e.g.
    ``(t_pr, sigma)`` for ``tpr_sigma``.  ``fim_source`` is a `FimTable`,
    ``"quadrature"`` for direct integration, or ``None`` for the shared table.
    """
    family = as_family(family)
    P = spec.parameterization
    th1 = np.asarray(point[0], dtype=float)
    th2 = np.asarray(point[1], dtype=float)
    sigma = np.exp(th2) if P in _LOGSIGMA_FORMS else th2
    log_sigma = th2 if P in _LOGSIGMA_FORMS else np.log(sigma)
    # location-type coordinate and the quadratic-form argument
    log_t = None
    if P is Parameterization.MU_SIGMA:
        mu, qarg = th1, 0.0
    elif P in _TPR_FORMS:
        zp = _zp(spec, family)
        log_t = np.log(th1) if P is Parameterization.TPR_SIGMA else th1
        mu, qarg = log_t - zp * sigma, zp
    else:
        mu, qarg = math.log(spec.t_e) - th1 * sigma, th1

    kind = spec.kind
    if kind is PriorKind.FLAT:
        return np.zeros(np.broadcast_shapes(th1.shape, th2.shape))

    if spec.type1:
        z_c = (math.log(spec.censoring.t_c) - mu) / sigma
        f11, f12, f22 = _f_at(z_c, family, fim_source)
    else:
        f11, f12, f22 = _type2_f(spec.censoring, family)

    # log |d(mu, sigma) / d theta| and the separate location/scale factors
    loc_factor = -log_t if P is Parameterization.TPR_SIGMA else 0.0
    scale_factor = 0.0 if P in _LOGSIGMA_FORMS else -log_sigma
    log_jac = {
        Parameterization.MU_SIGMA: 0.0,
        Parameterization.LOGTPR_SIGMA: 0.0,
        Parameterization.TPR_SIGMA: -log_t if log_t is not None else 0.0,
        Parameterization.LOGTPR_LOGSIGMA: log_sigma,
        Parameterization.ZETA_SIGMA: log_sigma,
        Parameterization.ZETA_LOGSIGMA: 2.0 * log_sigma,
    }[P]

    with np.errstate(divide="ignore", invalid="ignore"):
        if kind is PriorKind.JEFFREYS or (kind is PriorKind.REFERENCE and spec.order is None):
            val = 0.5 * np.log(np.maximum(f11 * f22 - f12 * f12, 0.0)) - 2.0 * log_sigma + log_jac
            if not spec.type1:
                val = val - 0.5 * math.log(f11 * f22 - f12 * f12)
        elif kind is PriorKind.REFERENCE:
            val = loc_factor + scale_factor
            if P in _ZETA_FORMS and spec.order == "location":
                val = val - 0.5 * _log_q(f11, f12, f22, qarg)
        else:
            # conditional Jeffreys factors; for Type-2 data the f-terms only
            # depend on the conditioning parameter and drop out
            loc_part = 0.5 * np.log(f11) if spec.type1 else 0.0
            scale_part = 0.5 * _log_q(f11, f12, f22, qarg) if spec.type1 else 0.0
            if kind is PriorKind.CJ_LOCATION:
                val = loc_part + loc_factor
            elif kind is PriorKind.CJ_SCALE:
                val = scale_part + scale_factor
            else:
                val = loc_part + scale_part + loc_factor + scale_factor
    val = np.broadcast_to(val, np.broadcast_shapes(th1.shape, th2.shape))
    return np.where(np.isnan(val), -np.inf, val)


def ij_log_density(y, tau, t_c: float, z_pr, table: FimTable):
    """Type-1 IJ log density in (log t_pr, log sigma), vectorized over ``z_pr``.

    This is the inner-loop form used by the samplers; ``z_pr`` is
    Phi^{-1}(p_r) and may vary per chain.
    """
    sigma = np.exp(tau)
    z_c = (math.log(t_c) - y) / sigma + z_pr
    f11, f12, f22, _ = table.lookup(z_c)
    with np.errstate(divide="ignore"):
        return 0.5 * (np.log(f11) + _log_q(f11, f12, f22, z_pr))


def ij_relative_surface(spec: NoninfPriorSpec, t_pr, sigma, family, fim_source=None):
    """IJ density of (log t_pr, log sigma) on a grid, scaled to a maximum of 1.

    Returns shape ``(len(sigma), len(t_pr))``.
    """
    if spec.kind is not PriorKind.IJ:
        raise ValueError("ij_relative_surface needs an IJ spec")
    if spec.p_r is None:
        raise ValueError("the IJ surface needs p_r")
    s = replace_param(spec, Parameterization.LOGTPR_LOGSIGMA)
    S, T = np.meshgrid(np.asarray(sigma, float), np.asarray(t_pr, float), indexing="ij")
    lv = noninf_log_density(s, (np.log(T), np.log(S)), family, fim_source)
    return np.exp(lv - np.max(lv))


def replace_param(spec: NoninfPriorSpec, parameterization) -> NoninfPriorSpec:
    return NoninfPriorSpec(spec.kind, parameterization, spec.censoring, spec.p_r, spec.t_e,
                           spec.order)


def prob_fail_before(t_c: float, r: ReparamPoint, family) -> float:
    """Pr(T < t_c) at the quantile parameterization ``r``."""
    z = (math.log(t_c) - math.log(r.t_pr)) / r.sigma + float(dist.std_quantile(r.p_r, family))
    return float(dist.std_cdf(z, family))


def pr_at_least_one_failure(n: int, t_c: float, r: ReparamPoint, family) -> float:
    """1 - (1 - Pr(T < t_c))^n, computed from the log survival probability."""
    z = (math.log(t_c) - math.log(r.t_pr)) / r.sigma + float(dist.std_quantile(r.p_r, family))
    return float(-np.expm1(n * dist.std_logsf(z, family)))


# ---------------------------------------------------------------------------
# Joint priors in sampling coordinates


def joint_log_prior(spec, y, tau, family, p_r: float, fim_source=None):
    """Log prior density of the sampling coordinates (log t_pr, log sigma).

    Noninformative specs are mapped from their own parameterization with
    the change-of-variables Jacobian.  Product priors add their factors,
    each expressed as a density of y or tau.
    """
    family = as_family(family)
    y = np.asarray(y, dtype=float)
    tau = np.asarray(tau, dtype=float)
    z = float(dist.std_quantile(p_r, family))
    sigma = np.exp(tau)
    if isinstance(spec, NoninfPriorSpec):
        P = spec.parameterization
        if P in _ZETA_FORMS:
            raise ValueError("zeta parameterizations are not available as sampling coordinates")
        z_spec = z if spec.p_r is None else float(dist.std_quantile(spec.p_r, family))
        y_spec = y + (z_spec - z) * sigma
        inner = spec if spec.p_r is not None else NoninfPriorSpec(
            spec.kind, P, spec.censoring, p_r, spec.t_e, spec.order)
        if P is Parameterization.MU_SIGMA:
            pt, jac = (y - z * sigma, sigma), tau
        elif P is Parameterization.LOGTPR_SIGMA:
            pt, jac = (y_spec, sigma), tau
        elif P is Parameterization.TPR_SIGMA:
            pt, jac = (np.exp(y_spec), sigma), y_spec + tau
        else:
            pt, jac = (y_spec, tau), 0.0
        return noninf_log_density(inner, pt, family, fim_source) + jac
    if not isinstance(spec, ProductPrior):
        raise TypeError(f"unsupported prior spec {spec!r}")
    return (_factor(spec.location, "location", y, tau, z, sigma, family, p_r, fim_source)
            + _factor(spec.scale, "scale", y, tau, z, sigma, family, p_r, fim_source))


def _factor(f, slot, y, tau, z, sigma, family, p_r, fim_source):
    shape = np.broadcast_shapes(y.shape, tau.shape)
    if isinstance(f, Flat):
        return np.zeros(shape)
    if isinstance(f, InformativeMarginalSpec):
        if slot == "location":
            yy = y if f.p_r is None else y + (float(dist.std_quantile(f.p_r, family)) - z) * sigma
            return np.broadcast_to(marginal_log_density(f, yy), shape)
        return np.broadcast_to(marginal_log_density(f, tau), shape)
    # conditional Jeffreys factor
    if f.t_c is None:
        return np.zeros(shape)
    mu = y - z * sigma
    z_c = (math.log(f.t_c) - mu) / sigma
    f11, f12, f22 = _f_at(z_c, family, fim_source)
    with np.errstate(divide="ignore"):
        if slot == "location":
            return np.broadcast_to(0.5 * np.log(f11), shape)
        zq = z if f.p_r is None else float(dist.std_quantile(f.p_r, family))
        return np.broadcast_to(0.5 * _log_q(f11, f12, f22, zq), shape)
