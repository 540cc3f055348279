"""Censored failure-time data, CSV I/O and nonparametric cdf estimates.

CSV schema (header required)::

    time,kind,t_lower,t_upper,count

``kind`` is one of ``exact``, ``right``, ``left``, ``interval``.  Exact and
right-censored rows use ``time``; interval rows use ``t_lower``/``t_upper``;
left-censored rows use ``t_upper`` (``time`` may repeat it).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

import numpy as np

from .errors import DataError

__all__ = [
    "Kind",
    "Observation",
    "Dataset",
    "StepEstimate",
    "parse_csv",
    "read_csv",
    "kaplan_meier",
    "pav_npmle",
    "max_nonparametric_p",
    "nonparametric_estimate",
]

CSV_HEADER = ("time", "kind", "t_lower", "t_upper", "count")


class Kind(str, Enum):
    EXACT = "exact"
    RIGHT = "right"
    LEFT = "left"
    INTERVAL = "interval"


@dataclass(frozen=True)
class Observation:
    """One record with multiplicity ``count``.

    Use the constructors `exact`, `right`, `left` and `interval` rather than
    filling the fields by hand.
    """

    kind: Kind
    t: float | None = None
    t_lower: float | None = None
    t_upper: float | None = None
    count: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if int(self.count) != self.count or self.count < 1:
            raise DataError(f"count must be a positive integer, got {self.count!r}")
        object.__setattr__(self, "count", int(self.count))
        k = self.kind
        if k in (Kind.EXACT, Kind.RIGHT):
            if self.t is None or not (self.t > 0 and math.isfinite(self.t)):
                raise DataError(f"{k.value} observation needs a positive time")
        elif k is Kind.LEFT:
            if self.t_upper is None or not (self.t_upper > 0 and math.isfinite(self.t_upper)):
                raise DataError("left-censored observation needs a positive t_upper")
        else:
            lo, hi = self.t_lower, self.t_upper
            if lo is None or hi is None or not (0 < lo < hi < math.inf):
                raise DataError("interval observation needs 0 < t_lower < t_upper")

    @classmethod
    def exact(cls, t, count=1):
        return cls(Kind.EXACT, t=float(t), count=count)

    @classmethod
    def right(cls, t, count=1):
        return cls(Kind.RIGHT, t=float(t), count=count)

    @classmethod
    def left(cls, t_upper, count=1):
        return cls(Kind.LEFT, t_upper=float(t_upper), count=count)

    @classmethod
    def interval(cls, t_lower, t_upper, count=1):
        return cls(Kind.INTERVAL, t_lower=float(t_lower), t_upper=float(t_upper), count=count)

    @property
    def time(self) -> float:
        """A representative time used for sorting and plotting."""
        if self.kind in (Kind.EXACT, Kind.RIGHT):
            return self.t
        return self.t_upper


@dataclass(frozen=True)
class Dataset:
    observations: tuple[Observation, ...]
    time_unit: str = ""

    def __post_init__(self):
        obs = tuple(self.observations)
        if not obs:
            raise DataError("dataset is empty")
        object.__setattr__(self, "observations", obs)

    def __iter__(self):
        return iter(self.observations)

    def __len__(self):
        return len(self.observations)

    @property
    def n_units(self) -> int:
        return sum(o.count for o in self.observations)

    def count(self, kind) -> int:
        kind = Kind(kind)
        return sum(o.count for o in self.observations if o.kind is kind)

    @property
    def n_failures(self) -> int:
        """Units known to have failed (exact, left or interval records)."""
        return self.n_units - self.count(Kind.RIGHT)

    @property
    def kinds(self) -> set[Kind]:
        return {o.kind for o in self.observations}

    @property
    def is_current_status(self) -> bool:
        return self.kinds <= {Kind.LEFT, Kind.RIGHT}

    @property
    def is_right_censored(self) -> bool:
        return self.kinds <= {Kind.EXACT, Kind.RIGHT}

    def censoring_times(self) -> np.ndarray:
        return np.array([o.t for o in self.observations if o.kind is Kind.RIGHT])

    @classmethod
    def from_arrays(cls, times, censored=None, counts=None, time_unit=""):
        """Build an exact/right-censored dataset from parallel arrays."""
        times = np.asarray(times, dtype=float).ravel()
        censored = np.zeros(times.shape, bool) if censored is None else np.asarray(censored, bool)
        counts = np.ones(times.shape, int) if counts is None else np.asarray(counts, int)
        obs = [
            Observation.right(t, c) if cen else Observation.exact(t, c)
            for t, cen, c in zip(times, censored, counts)
        ]
        return cls(tuple(obs), time_unit)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for o in self.observations:
            w.writerow([_fmt(o.t), o.kind.value, _fmt(o.t_lower), _fmt(o.t_upper), o.count])
        return buf.getvalue()


def _fmt(x):
    return "" if x is None else repr(float(x))


def _num(cell, row_no, name):
    cell = cell.strip()
    if not cell:
        return None
    try:
        return float(cell)
    except ValueError:
        raise DataError(f"row {row_no}: {name} {cell!r} is not a number") from None


def parse_csv(stream, time_unit: str = "") -> Dataset:
    """Parse a dataset from a text or byte stream (or a string).

    All offending rows are collected and reported in one `DataError`.
    """
    if isinstance(stream, (bytes, bytearray)):
        text = stream.decode("utf-8-sig")
    elif isinstance(stream, str):
        text = stream
    else:
        raw = stream.read()
        text = raw.decode("utf-8-sig") if isinstance(raw, (bytes, bytearray)) else raw
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip().lower() for h in next(reader)]
    except StopIteration:
        raise DataError("empty file: header row missing") from None
    if tuple(header) != CSV_HEADER:
        raise DataError(f"header must be {','.join(CSV_HEADER)}; got {','.join(header)}")

    obs, problems = [], []
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            if len(row) != 5:
                raise DataError(f"row {row_no}: expected 5 fields, got {len(row)}")
            t = _num(row[0], row_no, "time")
            lo = _num(row[2], row_no, "t_lower")
            hi = _num(row[3], row_no, "t_upper")
            cnt = _num(row[4], row_no, "count")
            cnt = 1 if cnt is None else cnt
            token = row[1].strip().lower()
            if token not in {k.value for k in Kind}:
                raise DataError(f"row {row_no}: unknown kind {row[1]!r}")
            kind = Kind(token)
            if kind is Kind.LEFT and hi is None:
                hi = t
            try:
                obs.append(Observation(kind, t=t if kind in (Kind.EXACT, Kind.RIGHT) else None,
                                       t_lower=lo if kind is Kind.INTERVAL else None,
                                       t_upper=hi if kind in (Kind.LEFT, Kind.INTERVAL) else None,
                                       count=cnt))
            except DataError as exc:
                raise DataError(f"row {row_no}: {exc}") from None
        except DataError as exc:
            problems.append(str(exc))
    if problems:
        raise DataError("invalid rows:\n  " + "\n  ".join(problems))
    return Dataset(tuple(obs), time_unit)


def read_csv(path, time_unit: str = "") -> Dataset:
    try:
        with open(path, "rb") as fh:
            return parse_csv(fh, time_unit)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None


# ---------------------------------------------------------------------------
# Nonparametric estimates


@dataclass(frozen=True)
class StepEstimate:
    """Right-continuous step estimate of F with its plotting positions."""

    jump_times: np.ndarray
    levels: np.ndarray
    plot_points: list[tuple[float, float]] = field(default_factory=list)
    method: str = ""

    def __call__(self, t):
        """Evaluate the step function at ``t``."""
        idx = np.searchsorted(self.jump_times, np.asarray(t, float), side="right") - 1
        lv = np.concatenate([[0.0], self.levels])
        return lv[idx + 1]

    def to_dict(self):
        return {
            "method": self.method,
            "jump_times": [float(x) for x in self.jump_times],
            "levels": [float(x) for x in self.levels],
            "plot_points": [[float(a), float(b)] for a, b in self.plot_points],
        }


def kaplan_meier(d: Dataset) -> StepEstimate:
    """Product-limit estimate of F = 1 - S for exact/right-censored data.

    Plot points sit at the midpoint of each jump, (F(t-) + F(t)) / 2, which
    reduces to (i - 0.5)/n for complete data.  Failures tied with censorings
    are taken to occur first.
    """
    if not d.is_right_censored:
        raise DataError("Kaplan-Meier needs exact and right-censored observations only")
    fail: dict[float, int] = {}
    cens: dict[float, int] = {}
    for o in d.observations:
        target = fail if o.kind is Kind.EXACT else cens
        target[o.t] = target.get(o.t, 0) + o.count
    times = np.array(sorted(fail))
    at_risk = d.n_units
    surv = 1.0
    levels, points = [], []
    cens_times = sorted(cens)
    ci = 0
    for t in times:
        # censorings strictly before t leave the risk set first
        while ci < len(cens_times) and cens_times[ci] < t:
            at_risk -= cens[cens_times[ci]]
            ci += 1
        k = fail[t]
        before = 1.0 - surv
        surv *= 1.0 - k / at_risk
        after = 1.0 - surv
        levels.append(after)
        points.append((float(t), 0.5 * (before + after)))
        at_risk -= k
    return StepEstimate(times, np.array(levels), points, "kaplan-meier")


def _pav(y, w):
    """Weighted isotonic (nondecreasing) regression by pooling adjacent violators."""
    blocks = []  # [value, weight, size]
    for yi, wi in zip(y, w):
        blocks.append([yi, wi, 1])
        while len(blocks) > 1 and blocks[-2][0] > blocks[-1][0]:
            v2, w2, s2 = blocks.pop()
            v1, w1, s1 = blocks.pop()
            blocks.append([(v1 * w1 + v2 * w2) / (w1 + w2), w1 + w2, s1 + s2])
    out = []
    for v, _, s in blocks:
        out.extend([v] * s)
    return np.array(out)


def pav_npmle(d: Dataset) -> StepEstimate:
    """NPMLE of F for current-status data.

    Each inspection time contributes its observed failing fraction weighted by
    the number of units inspected; the isotonic fit of those fractions is the
    NPMLE.  Pooling is done on the integer counts so pooled levels are exact
    ratios.  Plot points sit at half the height of each jump.
    """
    if not d.is_current_status:
        raise DataError("PAV estimate needs current-status data (left/right censored only)")
    dead: dict[float, int] = {}
    total: dict[float, int] = {}
    for o in d.observations:
        t = o.time
        total[t] = total.get(t, 0) + o.count
        if o.kind is Kind.LEFT:
            dead[t] = dead.get(t, 0) + o.count
    times = np.array(sorted(total))
    k = np.array([dead.get(t, 0) for t in times], dtype=float)
    n = np.array([total[t] for t in times], dtype=float)
    # pool on (failures, units) pairs so the levels are exact ratios
    blocks = []
    for ki, ni in zip(k, n):
        blocks.append([ki, ni, 1])
        while len(blocks) > 1 and blocks[-2][0] * blocks[-1][1] > blocks[-1][0] * blocks[-2][1]:
            k2, n2, s2 = blocks.pop()
            k1, n1, s1 = blocks.pop()
            blocks.append([k1 + k2, n1 + n2, s1 + s2])
    fitted = []
    for kb, nb, s in blocks:
        fitted.extend([kb / nb] * s)
    fitted = np.array(fitted)

    jumps, levels, points = [], [], []
    prev = 0.0
    for t, v in zip(times, fitted):
        if v > prev:
            jumps.append(t)
            levels.append(v)
            points.append((float(t), 0.5 * (prev + v)))
            prev = v
    return StepEstimate(np.array(jumps), np.array(levels), points, "pav")


def nonparametric_estimate(d: Dataset) -> StepEstimate:
    """Kaplan-Meier or PAV, whichever applies to the data."""
    if d.is_right_censored:
        return kaplan_meier(d)
    if d.is_current_status:
        return pav_npmle(d)
    raise DataError("no nonparametric estimator for general interval-censored data")


def max_nonparametric_p(d: Dataset) -> float:
    """Largest level reached by the applicable nonparametric estimate."""
    est = nonparametric_estimate(d)
    return float(est.levels[-1]) if len(est.levels) else 0.0


def isotonic_fit(y: Iterable[float], w: Iterable[float]) -> np.ndarray:
    """Weighted least-squares nondecreasing fit (exposed for testing)."""
    return _pav(np.asarray(list(y), float), np.asarray(list(w), float))
