import statistics
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    median: float
    min: float
    max: float
    standard_deviation: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "mean": self.mean,
            "median": self.median,
            "min": self.min,
            "max": self.max,
            "standard_deviation": self.standard_deviation,
        }


@dataclass(frozen=True)
class BoxStats:
    q1: float
    median: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: list[float]

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1


def get_summary_stats(values: Sequence[float]) -> SummaryStats:
    if not values:
        raise ValueError("Summary statistics need at least one value")

    return SummaryStats(
        mean=statistics.mean(values),
        # averages the two central values for even n
        median=statistics.median(values),
        min=min(values),
        max=max(values),
        standard_deviation=statistics.stdev(values) if len(values) > 1 else 0.0,
    )


def quantile(values: Sequence[float], q: float) -> float:
    """Type-7 (linear interpolation) sample quantile."""
    if not values:
        raise ValueError("Quantile of an empty sample")
    return float(np.quantile(np.asarray(values, dtype=float), q, method="linear"))


def get_box_stats(values: Sequence[float], whisker_iqr: float = 1.5) -> BoxStats:
    if not values:
        raise ValueError("Box statistics need at least one value")

    q1, median, q3 = (quantile(values, q) for q in (0.25, 0.5, 0.75))
    low_fence = q1 - whisker_iqr * (q3 - q1)
    high_fence = q3 + whisker_iqr * (q3 - q1)
    inside = [v for v in values if low_fence <= v <= high_fence]
    return BoxStats(
        q1=q1,
        median=median,
        q3=q3,
        whisker_low=min(inside),
        whisker_high=max(inside),
        outliers=sorted(float(v) for v in values if v < low_fence or v > high_fence),
    )
