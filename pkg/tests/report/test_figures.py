import json
import logging
import math

import numpy as np
import pytest

from lapa.metrics import CorpusDistribution
from lapa.report import figures
from lapa.stats.regression import INTERCEPT, RegressionResult, RegressionTerm
from lapa.stats.summary import get_summary_stats

GRIPS = [2.0, 2.5, 3.0, 3.5, 4.0, 4.5]
COUNTS = [16.0, 15.0, 12.0, 11.0, 9.0, 6.0]
DIVISIONS = ["Expert", "Open", "Expert", "Open", "Expert", "Open"]


@pytest.fixture
def distribution():
    totals = {"Account Manipulation": 33, "Create Account": 28, "Valid Accounts": 28}
    grand_total = sum(totals.values())
    return CorpusDistribution(
        totals=totals,
        grand_total=grand_total,
        percentages={name: count / grand_total for name, count in totals.items()},
        participant_summary=get_summary_stats([13.0, 14.0, 15.0]),
        participant_count=3,
    )


@pytest.fixture
def regression_result():
    return RegressionResult(
        terms=[
            RegressionTerm(INTERCEPT, 25.021, 6.175, 4.052, 0.001),
            RegressionTerm("RC1", 3.869, 2.345, 1.650, 0.121),
            RegressionTerm("GRiPS Score", -4.421, 2.008, -2.202, 0.045),
        ],
        r_squared=0.376,
        adj_r_squared=0.198,
        f_stat=2.11,
        df_model=4,
        df_resid=14,
        f_p_value=0.133,
        n=19,
    )


class TestFigFrequency:
    def test_fig_frequency__spec(self, distribution):
        artifact = figures.fig_frequency(distribution)

        assert artifact.spec.kind == figures.PlotKind.BAR
        assert artifact.spec.labels["categories"] == ["Account Manipulation", "Create Account", "Valid Accounts"]
        assert artifact.spec.series["count"] == [33, 28, 28]
        assert artifact.spec.annotations["percent"] == ["37.1%", "31.5%", "31.5%"]
        assert artifact.svg.lstrip().startswith("<?xml")

    def test_fig_frequency__insertion_order_does_not_matter(self, distribution):
        totals = {"Valid Accounts": 28, "Boot or Logon Autostart Execution": 28, **distribution.totals, "Web Shell": 5}
        grand_total = sum(totals.values())
        rng = np.random.default_rng(8)
        svgs = set()

        for _ in range(5):
            names = [list(totals)[int(i)] for i in rng.permutation(len(totals))]
            permuted = CorpusDistribution(
                totals={name: totals[name] for name in names},
                grand_total=grand_total,
                percentages={name: totals[name] / grand_total for name in names},
                participant_summary=distribution.participant_summary,
                participant_count=3,
            )
            artifact = figures.fig_frequency(permuted)
            svgs.add(artifact.svg)

        assert len(svgs) == 1
        assert artifact.spec.labels["categories"][:3] == [
            "Account Manipulation",
            "Boot or Logon Autostart Execution",
            "Create Account",
        ]

    def test_fig_frequency__empty(self, distribution):
        empty = CorpusDistribution(
            totals={},
            grand_total=0,
            percentages={},
            participant_summary=distribution.participant_summary,
            participant_count=1,
        )

        with pytest.raises(ValueError):
            figures.fig_frequency(empty)


class TestFigScatter:
    def test_fig_scatter_fit__deterministic(self):
        first = figures.fig_scatter_fit(GRIPS, COUNTS, DIVISIONS)
        second = figures.fig_scatter_fit(GRIPS, COUNTS, DIVISIONS)

        assert first.svg == second.svg
        assert "<dc:date>" not in first.svg

    def test_fig_scatter_fit__fitted_line(self):
        artifact = figures.fig_scatter_fit(GRIPS, COUNTS, DIVISIONS)

        fit = artifact.spec.annotations["panels"][0]["fit"]
        assert fit["slope"] < 0
        assert fit["slope"] == pytest.approx(-17.25 / 4.375, rel=1e-9)
        assert artifact.spec.annotations["panels"][0]["warning"] is None

    def test_fig_scatter_fit__constant_x(self, caplog):
        with caplog.at_level(logging.WARNING):
            artifact = figures.fig_scatter_fit([3.0] * 4, [1.0, 2.0, 3.0, 4.0], ["Expert"] * 4)

        assert artifact.spec.annotations["panels"][0]["fit"] is None
        assert artifact.spec.annotations["panels"][0]["warning"] == figures.CONSTANT_X_WARNING
        assert figures.CONSTANT_X_WARNING in caplog.text

    def test_fig_scatter_fit__length_mismatch(self):
        with pytest.raises(ValueError):
            figures.fig_scatter_fit(GRIPS, COUNTS[:-1], DIVISIONS)

    def test_fig_scatter_panels__one_fit_per_panel(self):
        panels = [
            figures.ScatterPanel(x=GRIPS, y=COUNTS, groups=DIVISIONS, x_label="RC1"),
            figures.ScatterPanel(x=list(reversed(GRIPS)), y=COUNTS, groups=DIVISIONS, x_label="RC2"),
        ]

        artifact = figures.fig_scatter_panels(panels, "Decision-making competence")

        slopes = [panel["fit"]["slope"] for panel in artifact.spec.annotations["panels"]]
        assert slopes[0] == pytest.approx(-slopes[1])
        assert artifact.spec.labels["x"] == ["RC1", "RC2"]


class TestFigCoefficients:
    def test_fig_coefficients__excludes_intercept(self, regression_result):
        artifact = figures.fig_coefficients(regression_result)

        assert artifact.spec.labels["terms"] == ["RC1", "GRiPS Score"]
        assert artifact.spec.annotations["confidence"] == pytest.approx(0.95)
        lower = artifact.spec.series["lower"]
        upper = artifact.spec.series["upper"]
        assert all(lo <= est <= hi for lo, est, hi in zip(lower, artifact.spec.series["estimate"], upper))

    def test_fig_coefficients__grips_interval_excludes_zero(self, regression_result):
        artifact = figures.fig_coefficients(regression_result)

        assert artifact.spec.series["upper"][1] < 0
        assert artifact.spec.series["upper"][0] > 0 > artifact.spec.series["lower"][0]


class TestFigBox:
    def test_fig_box__quartiles(self):
        artifact = figures.fig_box({"Open": [1.0, 2.0, 3.0, 4.0, 5.0], "Expert": [10.0, 12.0, 14.0]})

        assert artifact.spec.labels["groups"] == ["Expert", "Open"]
        assert artifact.spec.annotations["box"]["Open"]["median"] == 3.0
        assert artifact.spec.annotations["box"]["Open"]["q1"] == 2.0
        assert artifact.spec.annotations["box"]["Open"]["q3"] == 4.0

    def test_fig_box__random_groups_match_sorted_quantiles(self):
        rng = np.random.default_rng(21)

        def sorted_quantile(values, q):
            ordered = sorted(values)
            h = (len(ordered) - 1) * q
            low = math.floor(h)
            high = min(low + 1, len(ordered) - 1)
            return ordered[low] + (h - low) * (ordered[high] - ordered[low])

        for _ in range(50):
            groups = {
                group: [float(v) for v in rng.integers(0, 30, size=int(rng.integers(1, 25)))]
                for group in ("Expert", "Open")
            }

            box = figures.fig_box(groups).spec.annotations["box"]

            for group, values in groups.items():
                q1, median, q3 = (sorted_quantile(values, q) for q in (0.25, 0.5, 0.75))
                low_fence, high_fence = q1 - 1.5 * (q3 - q1), q3 + 1.5 * (q3 - q1)
                assert box[group]["q1"] == pytest.approx(q1)
                assert box[group]["median"] == pytest.approx(median)
                assert box[group]["q3"] == pytest.approx(q3)
                inside = [v for v in values if low_fence <= v <= high_fence]
                assert (box[group]["whisker_low"], box[group]["whisker_high"]) == (min(inside), max(inside))
                assert box[group]["outliers"] == sorted(v for v in values if v < low_fence or v > high_fence)

    def test_fig_box__empty_group(self):
        with pytest.raises(ValueError, match="Open"):
            figures.fig_box({"Expert": [1.0], "Open": []})


def test_write_figure(tmp_path):
    artifact = figures.fig_box({"Expert": [1.0, 2.0]})

    paths = figures.write_figure(tmp_path, "fig4", artifact)

    assert [p.name for p in paths] == ["fig4.svg", "fig4.json"]
    assert json.loads(paths[1].read_text(encoding="utf-8"))["kind"] == "box"
    assert paths[0].read_text(encoding="utf-8") == artifact.svg
