"""Correlation and regression tables as CSV (rounded) and JSON (unrounded)."""
import logging
from collections import defaultdict
from pathlib import Path
from typing import Mapping

import pandas as pd

from lapa.report.formatters import format_correlation, format_regression
from lapa.stats.correlation import CorrelationResult
from lapa.stats.regression import RegressionResult
from lapa.utils import write_atomic, write_json

logger = logging.getLogger(__name__)

TABLE1_COLUMNS = ["CORRELATION", "P_VALUE", "CI_LOWER", "CI_UPPER"]
TABLE2_COLUMNS = ["Predictor", "Estimate", "Std. Error", "t-value", "p-value"]


def get_correlation_table_df(correlations: list[CorrelationResult]) -> pd.DataFrame:
    data: Mapping[str, list[str]] = defaultdict(list)
    for result in correlations:
        data["CORRELATION"].append(format_correlation(result.r))
        data["P_VALUE"].append(format_correlation(result.p_value))
        data["CI_LOWER"].append(format_correlation(result.ci_lower))
        data["CI_UPPER"].append(format_correlation(result.ci_upper))

    return pd.DataFrame(data=data, columns=TABLE1_COLUMNS)


def get_regression_table_df(regression: RegressionResult | None) -> pd.DataFrame:
    data: Mapping[str, list[str]] = defaultdict(list)
    for term in regression.terms if regression else []:
        data["Predictor"].append(term.name)
        data["Estimate"].append(format_regression(term.estimate))
        data["Std. Error"].append(format_regression(term.std_error))
        data["t-value"].append(format_regression(term.t_value))
        data["p-value"].append(format_regression(term.p_value))

    return pd.DataFrame(data=data, columns=TABLE2_COLUMNS)


def emit_tables(
    correlations: list[CorrelationResult], regression: RegressionResult | None, report_dir: Path
) -> list[Path]:
    table1 = get_correlation_table_df(correlations)
    table2 = get_regression_table_df(regression)
    paths = [
        write_atomic(report_dir / "table1.csv", _to_csv(table1)),
        write_json(report_dir / "table1.json", [c.to_dict() for c in correlations]),
        write_atomic(report_dir / "table2.csv", _to_csv(table2)),
        write_json(report_dir / "table2.json", regression.to_dict() if regression else {"terms": []}),
    ]
    logger.info(f"Wrote tables to {report_dir.as_posix()}")
    return paths


def _to_csv(df: pd.DataFrame) -> str:
    return df.to_csv(index=False, lineterminator="\n")
