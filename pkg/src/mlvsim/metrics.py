"""Trace aggregation: objective means, boxplot statistics, confidence
intervals across replications."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps


class MetricsError(Exception):
    pass


class EmptyTrace(MetricsError):
    pass


class EmptyGroup(MetricsError):
    pass


class TooFewReplications(MetricsError):
    pass


@dataclass(frozen=True)
class ObjectiveSummary:
    """Request-weighted means over one trace, with a per-model secondary view.

    o1/o2/o3 are the mean total delay, mean accuracy, and mean stability of
    all completed requests. The *_model_avg variants first average per model,
    then across models (the equal-request-count convention).
    """

    o1_mean_delay_ms: float
    o2_mean_accuracy: float
    o3_mean_stability: float
    o1_model_avg_ms: float
    o2_model_avg: float
    o3_model_avg: float
    request_count: int
    per_app_class: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "o1_mean_delay_ms": self.o1_mean_delay_ms,
            "o2_mean_accuracy": self.o2_mean_accuracy,
            "o3_mean_stability": self.o3_mean_stability,
            "o1_model_avg_ms": self.o1_model_avg_ms,
            "o2_model_avg": self.o2_model_avg,
            "o3_model_avg": self.o3_model_avg,
            "request_count": self.request_count,
            "per_app_class": self.per_app_class,
        }


@dataclass(frozen=True)
class DistributionStats:
    n: int
    mean: float
    stddev: float
    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    outlier_count: int

    def as_dict(self):
        return {k: getattr(self, k) for k in (
            "n", "mean", "stddev", "median", "q1", "q3", "whisker_low",
            "whisker_high", "outlier_count")}


@dataclass(frozen=True)
class ConfidenceInterval:
    mean: float
    half_width: float
    level: float
    n: int

    @property
    def low(self):
        return self.mean - self.half_width

    @property
    def high(self):
        return self.mean + self.half_width

    def overlaps(self, other):
        return self.low <= other.high and other.low <= self.high

    def as_dict(self):
        return {"mean": self.mean, "half_width": self.half_width,
                "level": self.level, "n": self.n}


def objectives(records):
    """Objective means over a trace of completed request records."""
    if not records:
        raise EmptyTrace("no completed requests")
    total = np.array([r.total_ms for r in records])
    acc = np.array([r.accuracy for r in records])
    stab = np.array([r.stability for r in records])

    by_model, by_class = {}, {}
    for r in records:
        by_model.setdefault(r.model_id, []).append(r)
        by_class.setdefault(r.app_class, []).append(r)

    def model_avg(attr):
        return float(np.mean([np.mean([getattr(r, attr) for r in group])
                              for group in by_model.values()]))

    per_class = {}
    for cls, group in sorted(by_class.items()):
        per_class[cls] = {
            "o1_mean_delay_ms": float(np.mean([r.total_ms for r in group])),
            "o2_mean_accuracy": float(np.mean([r.accuracy for r in group])),
            "o3_mean_stability": float(np.mean([r.stability for r in group])),
            "request_count": len(group),
        }

    return ObjectiveSummary(
        o1_mean_delay_ms=float(total.mean()),
        o2_mean_accuracy=float(acc.mean()),
        o3_mean_stability=float(stab.mean()),
        o1_model_avg_ms=model_avg("total_ms"),
        o2_model_avg=model_avg("accuracy"),
        o3_model_avg=model_avg("stability"),
        request_count=len(records),
        per_app_class=per_class)


def boxplot_stats(values):
    """Quartiles (linear interpolation), 1.5*IQR whiskers, outlier count."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise EmptyGroup("no values in group")
    q1, median, q3 = np.percentile(arr, [25, 50, 75])
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = arr[(arr >= lo_fence) & (arr <= hi_fence)]
    return DistributionStats(
        n=int(arr.size), mean=float(arr.mean()),
        stddev=float(arr.std(ddof=1)) if arr.size > 1 else 0.0,
        median=float(median), q1=float(q1), q3=float(q3),
        whisker_low=float(inside.min()), whisker_high=float(inside.max()),
        outlier_count=int(arr.size - inside.size))


def confidence_interval(per_replication_means, level=0.98):
    """Student-t interval over independent replication means."""
    arr = np.asarray(list(per_replication_means), dtype=float)
    n = arr.size
    if n < 2:
        raise TooFewReplications("need at least 2 replications")
    mean = float(arr.mean())
    s = float(arr.std(ddof=1))
    t = float(sps.t.ppf((1 + level) / 2, n - 1))
    half = t * s / math.sqrt(n)
    return ConfidenceInterval(mean=mean, half_width=half, level=level, n=n)
