import json

import pytest

from lapa.report import tables
from lapa.stats.correlation import pearson_inference
from lapa.stats.regression import RegressionResult, RegressionTerm


@pytest.fixture
def correlations():
    return [
        pearson_inference(-0.43151994, 19, name="LA_GriPS"),
        pearson_inference(-0.09360824, 19, name="LA_ADMC_RC1"),
        pearson_inference(-0.19870651, 19, name="LA_ADMC_RC2"),
    ]


@pytest.fixture
def regression_result():
    return RegressionResult(
        terms=[
            RegressionTerm("(Intercept)", 25.021, 6.175, 4.052, 0.001),
            RegressionTerm("GRiPS Score", -4.421, 2.008, -2.202, 0.045),
            RegressionTerm("Division (Open)", -4.775, None, None, None),
        ],
        r_squared=0.376,
        adj_r_squared=0.198,
        f_stat=2.11,
        df_model=4,
        df_resid=14,
        f_p_value=0.133,
        n=19,
    )


def test_get_correlation_table_df(correlations):
    df = tables.get_correlation_table_df(correlations)

    assert list(df.columns) == tables.TABLE1_COLUMNS
    assert df["CORRELATION"].tolist() == ["-0.43151994", "-0.09360824", "-0.19870651"]
    assert all(len(value.split(".")[1]) == 8 for value in df["P_VALUE"])


def test_get_regression_table_df(regression_result):
    df = tables.get_regression_table_df(regression_result)

    assert list(df.columns) == tables.TABLE2_COLUMNS
    assert df.iloc[0].tolist() == ["(Intercept)", "25.021", "6.175", "4.052", "0.001"]
    assert df.iloc[2].tolist() == ["Division (Open)", "-4.775", "NA", "NA", "NA"]


def test_emit_tables__files_and_idempotence(tmp_path, correlations, regression_result):
    paths = tables.emit_tables(correlations, regression_result, tmp_path)
    first = {path.name: path.read_bytes() for path in paths}

    tables.emit_tables(correlations, regression_result, tmp_path)

    assert sorted(first) == ["table1.csv", "table1.json", "table2.csv", "table2.json"]
    assert {path.name: path.read_bytes() for path in paths} == first
    table1_csv = first["table1.csv"].decode("utf-8").splitlines()
    assert table1_csv[0] == "CORRELATION,P_VALUE,CI_LOWER,CI_UPPER"
    assert len(table1_csv) == 4
    table1_json = json.loads(first["table1.json"])
    assert table1_json[0]["name"] == "LA_GriPS"
    assert table1_json[0]["CORRELATION"] == -0.43151994
    assert json.loads(first["table2.json"])["terms"][1]["Predictor"] == "GRiPS Score"


def test_emit_tables__without_regression(tmp_path, correlations):
    tables.emit_tables(correlations, None, tmp_path)

    assert (tmp_path / "table2.csv").read_text(encoding="utf-8") == "Predictor,Estimate,Std. Error,t-value,p-value\n"
