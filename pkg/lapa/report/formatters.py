from lapa.utils import format_fixed

CORRELATION_PLACES = 8
REGRESSION_PLACES = 3
MISSING = "NA"


def format_correlation(value: float) -> str:
    return format_fixed(value, CORRELATION_PLACES)


def format_regression(value: float | None) -> str:
    if value is None:
        return MISSING
    return format_fixed(value, REGRESSION_PLACES)


def format_percent(share: float) -> str:
    return f"{format_fixed(share * 100, 1)}%"


def format_mean(value: float) -> str:
    return format_fixed(value, 2)
