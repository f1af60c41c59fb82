"""Ordinary least squares with classical inference."""
import logging
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np
from scipy import linalg

from lapa.errors import DegenerateInputError, InsufficientDataError, SingularDesignError
from lapa.stats.correlation import DEFAULT_ALPHA
from lapa.stats.special import f_sf, student_t_ppf, student_t_sf2

logger = logging.getLogger(__name__)

INTERCEPT = "(Intercept)"
RANK_TOLERANCE = 1e-10
PERFECT_FIT_RTOL = 1e-24


@dataclass(frozen=True)
class RegressionTerm:
    name: str
    estimate: float
    std_error: float | None
    t_value: float | None
    p_value: float | None

    @property
    def has_inference(self) -> bool:
        return self.std_error is not None and self.std_error > 0


@dataclass(frozen=True)
class CoefficientInterval:
    name: str
    estimate: float
    lower: float | None
    upper: float | None

    @property
    def excludes_zero(self) -> bool:
        if self.lower is None or self.upper is None:
            return False
        return self.lower > 0 or self.upper < 0


@dataclass(frozen=True)
class RegressionResult:
    terms: list[RegressionTerm]
    r_squared: float
    adj_r_squared: float
    f_stat: float | None
    df_model: int
    df_resid: int
    f_p_value: float | None
    n: int
    rss: float = 0.0
    alpha: float = DEFAULT_ALPHA
    fitted: list[float] = field(default_factory=list, repr=False)

    @property
    def perfect_fit(self) -> bool:
        return all(term.std_error is None for term in self.terms)

    def term(self, name: str) -> RegressionTerm:
        for term in self.terms:
            if term.name == name:
                return term
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "terms": [
                {
                    "Predictor": t.name,
                    "Estimate": t.estimate,
                    "Std. Error": t.std_error,
                    "t-value": t.t_value,
                    "p-value": t.p_value,
                }
                for t in self.terms
            ],
            "r_squared": self.r_squared,
            "adj_r_squared": self.adj_r_squared,
            "f_stat": self.f_stat,
            "df_model": self.df_model,
            "df_resid": self.df_resid,
            "f_p_value": self.f_p_value,
            "n": self.n,
        }


def ols_fit(
    y: Sequence[float],
    columns: Mapping[str, Sequence[float]],
    include_intercept: bool = True,
    alpha: float = DEFAULT_ALPHA,
) -> RegressionResult:
    response = np.asarray(y, dtype=float)
    n = len(response)
    names = [INTERCEPT] if include_intercept else []
    vectors = [np.ones(n)] if include_intercept else []
    for name, values in columns.items():
        column = np.asarray(values, dtype=float)
        if column.shape != (n,):
            raise ValueError(f"Column {name!r} has {len(column)} values, expected {n}")
        names.append(name)
        vectors.append(column)

    p = len(vectors)
    if p == 0:
        raise ValueError("Regression needs at least one term")
    if n <= p:
        raise InsufficientDataError(f"Regression needs more observations than terms (n={n}, p={p})")

    design = np.column_stack(vectors)
    q, r = np.linalg.qr(design, mode="reduced")
    column_norms = np.linalg.norm(design, axis=0)
    for j, name in enumerate(names):
        if column_norms[j] == 0 or abs(r[j, j]) <= RANK_TOLERANCE * column_norms[j]:
            raise SingularDesignError(name)

    estimates = linalg.solve_triangular(r, q.T @ response)
    fitted = design @ estimates
    residuals = response - fitted
    rss = float(residuals @ residuals)
    centered = response - response.mean() if include_intercept else response
    tss = float(centered @ centered)
    if tss == 0:
        raise DegenerateInputError("Response is constant; R-squared is undefined")

    df_resid = n - p
    df_model = p - 1 if include_intercept else p
    perfect_fit = rss <= PERFECT_FIT_RTOL * float(response @ response)
    if perfect_fit:
        logger.warning("Perfect fit (RSS = 0); standard errors, t, p and F are undefined")
        r_squared = 1.0
    else:
        r_squared = max(0.0, 1 - rss / tss)

    terms = []
    if perfect_fit:
        terms = [RegressionTerm(name, float(b), None, None, None) for name, b in zip(names, estimates)]
    else:
        sigma2 = rss / df_resid
        r_inv = linalg.solve_triangular(r, np.eye(p))
        std_errors = np.sqrt(sigma2 * np.sum(r_inv * r_inv, axis=1))
        for name, estimate, std_error in zip(names, estimates, std_errors):
            t_value = float(estimate / std_error)
            terms.append(
                RegressionTerm(
                    name=name,
                    estimate=float(estimate),
                    std_error=float(std_error),
                    t_value=t_value,
                    p_value=student_t_sf2(t_value, df_resid),
                )
            )

    f_stat = None
    f_p_value = None
    if df_model > 0 and not perfect_fit:
        f_stat = ((tss - rss) / df_model) / (rss / df_resid)
        f_p_value = f_sf(max(0.0, f_stat), df_model, df_resid)

    return RegressionResult(
        terms=terms,
        r_squared=r_squared,
        adj_r_squared=1 - (1 - r_squared) * (n - 1) / df_resid if include_intercept else r_squared,
        f_stat=f_stat,
        df_model=df_model,
        df_resid=df_resid,
        f_p_value=f_p_value,
        n=n,
        rss=rss,
        alpha=alpha,
        fitted=[float(v) for v in fitted],
    )


def adj_r_squared(r2: float, n: int, k: int) -> float:
    if n <= k + 1:
        raise ValueError(f"Adjusted R-squared needs n > k + 1 (n={n}, k={k})")
    return 1 - (1 - r2) * (n - 1) / (n - k - 1)


def f_statistic(r2: float, k: int, n: int) -> float:
    """Overall F from R-squared, k predictors and n observations."""
    if k < 1:
        raise ValueError(f"F needs at least one predictor, got {k=}")
    if n <= k + 1:
        raise ValueError(f"F needs n > k + 1 (n={n}, k={k})")
    if r2 >= 1:
        raise DegenerateInputError("R-squared of 1 leaves no residual variance")
    return (r2 / k) / ((1 - r2) / (n - k - 1))


def coefficient_intervals(result: RegressionResult, alpha: float | None = None) -> list[CoefficientInterval]:
    """estimate +/- t_{1-alpha/2, df_resid} * SE; terms without a usable SE get no interval."""
    level = result.alpha if alpha is None else alpha
    critical = student_t_ppf(1 - level / 2, result.df_resid)
    intervals = []
    for term in result.terms:
        if not term.has_inference:
            intervals.append(CoefficientInterval(term.name, term.estimate, None, None))
            continue
        margin = critical * term.std_error  # type: ignore[operator]
        intervals.append(CoefficientInterval(term.name, term.estimate, term.estimate - margin, term.estimate + margin))
    return intervals
