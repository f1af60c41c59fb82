"""Correlations and the regression model relating persistence counts to psychometrics."""
import logging
from dataclasses import dataclass
from typing import Any, Mapping

from lapa.errors import DegenerateInputError, JoinError
from lapa.models.participant import Participant
from lapa.stats.correlation import DEFAULT_ALPHA, CorrelationResult, correlate
from lapa.stats.regression import RegressionResult, ols_fit

logger = logging.getLogger(__name__)

CORRELATION_NAMES = {
    "grips": "LA_GriPS",
    "admc_rc1": "LA_ADMC_RC1",
    "admc_rc2": "LA_ADMC_RC2",
}
RC1_TERM = "ADMC RC1 Score"
RC2_TERM = "ADMC RC2 Score"
GRIPS_TERM = "GRiPS Score"
DIVISION_TERM = "Division (Open)"


@dataclass(frozen=True)
class AnalysisInput:
    participant_ids: list[str]
    counts: list[float]
    grips: list[float]
    admc_rc1: list[float]
    admc_rc2: list[float]
    division: list[int]

    @property
    def n(self) -> int:
        return len(self.participant_ids)

    def predictors(self) -> dict[str, list[float]]:
        return {
            RC1_TERM: self.admc_rc1,
            RC2_TERM: self.admc_rc2,
            GRIPS_TERM: self.grips,
            DIVISION_TERM: [float(d) for d in self.division],
        }


@dataclass(frozen=True)
class AnalysisResult:
    correlations: list[CorrelationResult]
    regression: RegressionResult
    data: AnalysisInput

    def correlation(self, name: str) -> CorrelationResult:
        for result in self.correlations:
            if result.name == name:
                return result
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.data.n,
            "correlations": [c.to_dict() for c in self.correlations],
            "regression": self.regression.to_dict(),
        }


def join_counts(counts: Mapping[str, float], participants: list[Participant]) -> AnalysisInput:
    by_id = {p.participant_id: p for p in participants}
    metrics_only = sorted(set(counts) - set(by_id))
    psychometrics_only = sorted(set(by_id) - set(counts))
    if metrics_only or psychometrics_only:
        raise JoinError(metrics_only, psychometrics_only)

    ids = sorted(counts)
    return AnalysisInput(
        participant_ids=ids,
        counts=[float(counts[i]) for i in ids],
        grips=[by_id[i].psychometrics.grips for i in ids],
        admc_rc1=[by_id[i].psychometrics.admc_rc1 for i in ids],
        admc_rc2=[by_id[i].psychometrics.admc_rc2 for i in ids],
        division=[by_id[i].division.indicator for i in ids],
    )


def analyze(
    counts: Mapping[str, float], participants: list[Participant], alpha: float = DEFAULT_ALPHA
) -> AnalysisResult:
    data = join_counts(counts, participants)
    logger.info(f"Analyzing {data.n} participants")

    if len(set(data.counts)) <= 1:
        raise DegenerateInputError("Column 'persistence_count' is constant across participants")
    for name, values in data.predictors().items():
        if len(set(values)) <= 1:
            raise DegenerateInputError(f"Predictor {name!r} is constant across participants")

    regression = ols_fit(data.counts, data.predictors(), include_intercept=True, alpha=alpha)
    correlations = [
        correlate(getattr(data, field), data.counts, alpha, name) for field, name in CORRELATION_NAMES.items()
    ]
    for result in correlations:
        logger.info(f"{result.name}: r={result.r:.4f} p={result.p_value:.4f}")
    logger.info(
        f"Regression: R2={regression.r_squared:.3f} adjR2={regression.adj_r_squared:.3f} F={regression.f_stat}"
    )
    return AnalysisResult(correlations=correlations, regression=regression, data=data)
