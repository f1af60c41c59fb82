import pytest

from lapa.report import formatters


@pytest.mark.parametrize(
    "value, expected",
    [(-0.43151994, "-0.43151994"), (0.0282206, "0.02822060"), (0.123456785, "0.12345678"), (1e-10, "0.00000000")],
)
def test_format_correlation(value, expected):
    assert formatters.format_correlation(value) == expected


@pytest.mark.parametrize(
    "value, expected",
    [(25.021, "25.021"), (0.0285, "0.028"), (0.0275, "0.028"), (-0.0004, "0.000"), (None, "NA"), (2.0, "2.000")],
)
def test_format_regression__half_even(value, expected):
    assert formatters.format_regression(value) == expected


def test_format_percent():
    assert formatters.format_percent(33 / 236) == "14.0%"
    assert formatters.format_percent(28 / 236) == "11.9%"


def test_format_mean():
    assert formatters.format_mean(236 / 17) == "13.88"
