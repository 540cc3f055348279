"""Scaled Fisher information for censored log-location-scale samples.

For a sample of n units singly censored at standardized point z_c, the
expected information for (mu, sigma) is ``(n / sigma**2) * [[f11, f12],
[f12, f22]]`` where the scaled elements depend on z_c alone:

    f11 = Psi_0(z_c),  f12 = Psi_1(z_c),  f22 = Psi_2(z_c),
    Psi_i(a) = int_{-inf}^{a} [1 + x H(x)]^i H(x)^(2-i) phi(x) dx,
    H(x) = phi'(x)/phi(x) + phi(x)/(1 - Phi(x)).
"""

from __future__ import annotations

import functools
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from . import distributions as dist
from .distributions import Family, LSParams, as_family
from .errors import NumericalError

__all__ = [
    "ScaledFim",
    "TypeOne",
    "TypeTwo",
    "score_h",
    "psi",
    "scaled_fim",
    "fim_for_sample",
    "PointMass",
    "DiscreteCensoring",
    "random_censoring_fim",
    "FimTable",
    "build_fim_table",
    "interp_fim",
    "get_fim_table",
]

EPSABS = 1e-9
SPLIT_LIMIT = 2000
P_RANGE = (1e-8, 1.0 - 1e-8)


@dataclass(frozen=True)
class ScaledFim:
    f11: float
    f12: float
    f22: float
    z_c: float
    clamped: bool = False

    @property
    def det(self):
        return self.f11 * self.f22 - self.f12 ** 2

    def q(self, z):
        """Quadratic form f11 z^2 - 2 f12 z + f22."""
        return self.f11 * z * z - 2.0 * self.f12 * z + self.f22

    def matrix(self):
        return np.array([[self.f11, self.f12], [self.f12, self.f22]], dtype=float)


@dataclass(frozen=True)
class TypeTwo:
    """Failure censoring after ``r`` failures (``None`` means complete data)."""

    r: int | None = None
    n: int | None = None

    def z_c(self, family, n: int | None = None) -> float:
        n = self.n if n is None else n
        if self.r is None or (n is not None and self.r == n):
            return math.inf
        if n is None:
            raise ValueError("Type-2 censoring with r < n needs the sample size")
        if self.r > n:
            raise ValueError(f"r={self.r} exceeds n={n}")
        if self.r <= 0:
            return -math.inf
        return float(dist.std_quantile(self.r / n, family))


@dataclass(frozen=True)
class TypeOne:
    """Time censoring at ``t_c``."""

    t_c: float

    def __post_init__(self):
        if not self.t_c > 0:
            raise ValueError("censoring time must be positive")


def score_h(x, family):
    """H(x) = phi'/phi + phi/(1 - Phi), with the ratio taken on the log scale."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        return dist.std_dlogpdf(x, family) + np.exp(dist.std_logpdf(x, family) - dist.std_logsf(x, family))


def _integrands(family):
    def g(u):
        x = float(dist.std_quantile(u, family))
        h = float(score_h(x, family))
        b = 1.0 + x * h
        return np.array([h * h, b * h, b * b])

    return g


def _psi_all(a: float, family: Family) -> np.ndarray:
    """(Psi_0, Psi_1, Psi_2)(a) by adaptive quadrature in u = Phi(x)."""
    if a == -math.inf:
        return np.zeros(3)
    upper = 1.0 if a == math.inf else float(dist.std_cdf(a, family))
    if upper <= 0.0:
        return np.zeros(3)
    # tolerance scales with the integration range so deep-tail values keep
    # their relative accuracy
    tol = EPSABS * min(1.0, upper)
    val, err = integrate.quad_vec(_integrands(family), 0.0, upper, epsabs=tol, epsrel=1e-10,
                                  limit=SPLIT_LIMIT, norm="max")
    if not np.all(np.isfinite(val)) or err > 10 * max(tol, 1e-10 * np.max(np.abs(val))):
        raise NumericalError(f"quadrature for Psi at a={a} did not converge (err={err:.2g})")
    return val


@functools.lru_cache(maxsize=4096)
def _psi_cached(a: float, family: Family):
    return tuple(_psi_all(a, family))


def psi(i: int, a: float, family) -> float:
    """Psi_i(a) for i in {0, 1, 2}."""
    if i not in (0, 1, 2):
        raise ValueError("i must be 0, 1 or 2")
    return _psi_cached(float(a), as_family(family))[i]


def scaled_fim(z_c: float, family) -> ScaledFim:
    """Scaled FIM elements at standardized censoring point ``z_c`` (may be inf)."""
    f11, f12, f22 = _psi_cached(float(z_c), as_family(family))
    return ScaledFim(f11, f12, f22, float(z_c))


def _z_c(n, p: LSParams, censoring, family):
    if isinstance(censoring, TypeTwo):
        if censoring.r is not None and censoring.r > n:
            raise ValueError(f"r={censoring.r} exceeds n={n}")
        return censoring.z_c(family, n)
    if isinstance(censoring, TypeOne):
        return (math.log(censoring.t_c) - p.mu) / p.sigma
    raise TypeError("censoring must be TypeOne or TypeTwo")


def fim_for_sample(n: int, p: LSParams, censoring, family) -> np.ndarray:
    """Expected information matrix for (mu, sigma) from n singly censored units."""
    if n < 1:
        raise ValueError("n must be at least 1")
    s = scaled_fim(_z_c(n, p, censoring, family), family)
    return (n / p.sigma ** 2) * s.matrix()


# ---------------------------------------------------------------------------
# Random censoring


@dataclass(frozen=True)
class PointMass:
    """All censoring at one log time."""

    x: float


@dataclass(frozen=True)
class DiscreteCensoring:
    """Censoring log-times with probability weights (e.g. empirical)."""

    x: tuple
    weights: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, float)
        if w.size != len(self.x) or np.any(w < 0) or abs(w.sum() - 1) > 1e-6:
            raise ValueError("censoring weights must be nonnegative and sum to 1")


def random_censoring_fim(h, p: LSParams, family, n: int = 1, support=None) -> np.ndarray:
    """Information under random censoring with log-time density ``h``.

    ``h`` may be a `PointMass`, a `DiscreteCensoring`, a callable density on
    the real line, or any object with ``pdf`` and ``support()`` methods (such
    as a frozen scipy distribution).  The scaled elements are averaged over
    the censoring distribution: E_h[f_ij((X - mu)/sigma)].
    """
    family = as_family(family)
    scale = n / p.sigma ** 2
    if isinstance(h, PointMass):
        return scale * scaled_fim((h.x - p.mu) / p.sigma, family).matrix()
    if isinstance(h, DiscreteCensoring):
        m = sum(w * scaled_fim((x - p.mu) / p.sigma, family).matrix()
                for x, w in zip(h.x, h.weights))
        return scale * m
    pdf: Callable = h.pdf if hasattr(h, "pdf") else h
    if support is None:
        support = tuple(h.support()) if hasattr(h, "support") else (-math.inf, math.inf)
    lo, hi = (float(v) for v in support)
    mass, _ = integrate.quad(pdf, lo, hi, epsabs=1e-10, limit=200)
    if abs(mass - 1.0) > 1e-6:
        raise ValueError(f"censoring density integrates to {mass:.8g}, not 1")

    def integrand(x):
        return scaled_fim((x - p.mu) / p.sigma, family).matrix().ravel() * pdf(x)

    val, _ = integrate.quad_vec(integrand, lo, hi, epsabs=1e-9, limit=SPLIT_LIMIT)
    return scale * val.reshape(2, 2)


# ---------------------------------------------------------------------------
# Interpolation tables


@dataclass(frozen=True)
class FimTable:
    """Scaled FIM elements tabulated on an equally spaced z_c grid.

    The grid covers censoring probabilities in [1e-8, 1 - 1e-8].  For the
    sev family Phi^{-1}(p) = log(-log(1 - p)), so equal spacing in z_c is
    equal spacing in that coordinate.  Since dPsi_i/da is the integrand at
    a, exact slopes are stored and lookups use cubic Hermite interpolation
    by default; ``method="linear"`` gives plain piecewise-linear lookups.
    """

    family: Family
    grid: np.ndarray
    values: np.ndarray = field(repr=False)  # (len(grid), 3)
    slopes: np.ndarray = field(repr=False)  # (len(grid), 3)
    method: str = "hermite"

    def __post_init__(self):
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("table grid must be strictly increasing")
        if self.method not in ("hermite", "linear"):
            raise ValueError("method must be 'hermite' or 'linear'")

    def lookup(self, z_c):
        """Interpolated (f11, f12, f22) arrays and a boolean clamp mask."""
        z = np.asarray(z_c, dtype=float)
        g = self.grid
        clamped = (z < g[0]) | (z > g[-1])
        zc = np.clip(z, g[0], g[-1])
        k = np.clip(np.searchsorted(g, zc, side="right") - 1, 0, len(g) - 2)
        h = g[k + 1] - g[k]
        t = ((zc - g[k]) / h)[..., None]
        y0, y1 = self.values[k], self.values[k + 1]
        if self.method == "linear":
            out = y0 + t * (y1 - y0)
        else:
            d0, d1 = self.slopes[k] * h[..., None], self.slopes[k + 1] * h[..., None]
            t2, t3 = t * t, t * t * t
            out = ((2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * d0
                   + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * d1)
        return out[..., 0], out[..., 1], out[..., 2], clamped

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("z_c,f11,f12,f22\n")
        for z, (a, b, c) in zip(self.grid, self.values):
            buf.write(f"{z!r},{a!r},{b!r},{c!r}\n")
        return buf.getvalue()


def _integrand_x(x, family):
    """Psi integrands times phi, evaluated at an array of x; shape (..., 3)."""
    h = score_h(x, family)
    b = 1.0 + x * h
    ph = dist.std_pdf(x, family)
    return np.stack([h * h * ph, b * h * ph, b * b * ph], axis=-1)


def build_fim_table(family, grid_size: int = 200, method: str = "hermite") -> FimTable:
    """Tabulate (f11, f12, f22) on the standard grid.

    The lowest node comes from the adaptive quadrature; the rest accumulate
    32-point Gauss-Legendre integrals between consecutive nodes, where the
    integrand is smooth.
    """
    family = as_family(family)
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    lo, hi = (float(dist.std_quantile(q, family)) for q in P_RANGE)
    grid = np.linspace(lo, hi, grid_size)
    xg, wg = np.polynomial.legendre.leggauss(32)
    a, b = grid[:-1, None], grid[1:, None]
    x = 0.5 * (b - a) * xg + 0.5 * (b + a)
    pieces = np.einsum("ijk,j->ik", _integrand_x(x, family), wg) * 0.5 * (b - a)
    values = np.vstack([_psi_all(lo, family), pieces]).cumsum(axis=0)
    slopes = _integrand_x(grid, family)
    return FimTable(family, grid, values, slopes, method)


@functools.lru_cache(maxsize=None)
def get_fim_table(family, grid_size: int = 200, method: str = "hermite") -> FimTable:
    """Shared, lazily built table for ``family``."""
    return build_fim_table(as_family(family), grid_size, method)


def interp_fim(table: FimTable, z_c: float, warn: bool = False) -> ScaledFim:
    """Table lookup; clamps to the boundary value (and flags it) beyond the grid."""
    f11, f12, f22, clamped = table.lookup(z_c)
    if warn and np.any(clamped):
        warnings.warn(f"z_c={z_c} outside table range; boundary value used", RuntimeWarning)
    return ScaledFim(float(f11), float(f12), float(f22), float(z_c), bool(clamped))
