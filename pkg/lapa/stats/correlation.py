import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from lapa.errors import DegenerateInputError
from lapa.stats.special import normal_ppf, student_t_sf2

DEFAULT_ALPHA = 0.05


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    n: int
    p_value: float
    ci_lower: float
    ci_upper: float
    name: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "CORRELATION": self.r,
            "P_VALUE": self.p_value,
            "CI_LOWER": self.ci_lower,
            "CI_UPPER": self.ci_upper,
            "n": self.n,
        }


def pearson_r(x: Sequence[float], y: Sequence[float]) -> float:
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError(f"x and y must be vectors of equal length, got {xs.shape} and {ys.shape}")
    if len(xs) < 3:
        raise ValueError(f"Pearson correlation needs n >= 3, got {len(xs)}")

    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0:
        raise DegenerateInputError("x is constant; correlation is undefined")
    if syy == 0:
        raise DegenerateInputError("y is constant; correlation is undefined")

    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def pearson_inference(r: float, n: int, alpha: float = DEFAULT_ALPHA, name: str = "") -> CorrelationResult:
    """t-test p-value and Fisher-z confidence interval for a sample correlation."""
    if n < 4:
        raise ValueError(f"Correlation inference needs n >= 4, got {n}")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if abs(r) >= 1:
        raise DegenerateInputError(f"|r| = 1 leaves no residual variance ({r=})")

    t = r * math.sqrt((n - 2) / (1 - r * r))
    p_value = student_t_sf2(t, n - 2)

    z = math.atanh(r)
    half_width = normal_ppf(1 - alpha / 2) / math.sqrt(n - 3)
    return CorrelationResult(
        r=r,
        n=n,
        p_value=p_value,
        ci_lower=math.tanh(z - half_width),
        ci_upper=math.tanh(z + half_width),
        name=name,
    )


def correlate(
    x: Sequence[float], y: Sequence[float], alpha: float = DEFAULT_ALPHA, name: str = ""
) -> CorrelationResult:
    return pearson_inference(pearson_r(x, y), len(x), alpha, name)
