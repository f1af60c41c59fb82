"""Plot specs and their SVG renderings for the report figures."""
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from matplotlib.figure import Figure

from lapa.metrics import CorpusDistribution
from lapa.report.formatters import format_percent
from lapa.report.svg import render_svg
from lapa.stats.regression import INTERCEPT, RegressionResult, coefficient_intervals
from lapa.stats.summary import BoxStats, get_box_stats
from lapa.utils import write_atomic, write_json

logger = logging.getLogger(__name__)

GROUP_MARKERS = {"Expert": "o", "Open": "^"}
CONSTANT_X_WARNING = "x is constant; fitted line omitted"


class PlotKind(Enum):
    BAR = "bar"
    SCATTER_FIT = "scatter_fit"
    COEF_INTERVAL = "coef_interval"
    BOX = "box"


@dataclass(frozen=True)
class PlotSpec:
    kind: PlotKind
    series: dict[str, list[Any]]
    labels: dict[str, Any]
    annotations: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "series": self.series,
            "labels": self.labels,
            "annotations": self.annotations,
        }


@dataclass(frozen=True)
class FigureArtifact:
    spec: PlotSpec
    svg: str


@dataclass(frozen=True)
class ScatterPanel:
    x: Sequence[float]
    y: Sequence[float]
    groups: Sequence[str]
    x_label: str
    y_label: str = "Persistence technique count"


def fig_frequency(
    dist: CorpusDistribution, title: str = "Most frequently used persistence techniques"
) -> FigureArtifact:
    ranked = dist.ranked()
    if not ranked:
        raise ValueError("Cannot plot an empty technique distribution")

    names = [name for name, _ in ranked]
    counts = [count for _, count in ranked]
    spec = PlotSpec(
        kind=PlotKind.BAR,
        series={"count": counts, "share": [dist.percentages[name] for name in names]},
        labels={"categories": names, "x": "Occurrences", "y": "Technique", "title": title},
        annotations={"percent": [dist.percent_label(name) for name in names], "grand_total": dist.grand_total},
    )

    def draw(figure: Figure) -> None:
        ax = figure.add_subplot()
        positions = np.arange(len(names))
        ax.barh(positions, counts, color="#4c72b0")
        ax.set_yticks(positions, labels=names)
        ax.invert_yaxis()
        for position, count, name in zip(positions, counts, names):
            ax.annotate(
                format_percent(dist.percentages[name]),
                (count, position),
                xytext=(3, 0),
                textcoords="offset points",
                va="center",
            )
        ax.set_xlabel(spec.labels["x"])
        ax.set_title(title)
        figure.tight_layout()

    return FigureArtifact(spec=spec, svg=render_svg(draw))


def fig_scatter_fit(
    x: Sequence[float],
    y: Sequence[float],
    groups: Sequence[str],
    x_label: str = "GRiPS Score",
    title: str = "GRiPS score and persistence technique usage",
) -> FigureArtifact:
    return fig_scatter_panels([ScatterPanel(x=x, y=y, groups=groups, x_label=x_label)], title)


def fig_scatter_panels(panels: list[ScatterPanel], title: str) -> FigureArtifact:
    """One scatterplot per panel, side by side, each with its own least-squares line."""
    if not panels:
        raise ValueError("At least one scatter panel is required")

    panel_specs = [_scatter_panel_spec(panel) for panel in panels]
    spec = PlotSpec(
        kind=PlotKind.SCATTER_FIT,
        series={f"{p.x_label}.{axis}": list(values) for p in panels for axis, values in (("x", p.x), ("y", p.y))},
        labels={"title": title, "x": [p.x_label for p in panels], "y": panels[0].y_label},
        annotations={"panels": panel_specs, "groups": [list(p.groups) for p in panels]},
    )

    def draw(figure: Figure) -> None:
        axes = figure.subplots(1, len(panels), squeeze=False)[0]
        for ax, panel, panel_spec in zip(axes, panels, panel_specs):
            xs = np.asarray(panel.x, dtype=float)
            ys = np.asarray(panel.y, dtype=float)
            group_values = np.asarray(panel.groups)
            for group in sorted(set(panel.groups)):
                mask = group_values == group
                ax.scatter(xs[mask], ys[mask], marker=GROUP_MARKERS.get(group, "s"), label=group)
            fit = panel_spec["fit"]
            if fit is not None:
                line_x = np.array([xs.min(), xs.max()])
                ax.plot(line_x, fit["intercept"] + fit["slope"] * line_x, color="black", linewidth=1)
            else:
                ax.text(0.5, 0.95, CONSTANT_X_WARNING, transform=ax.transAxes, ha="center", va="top")
            ax.set_xlabel(panel.x_label)
            ax.set_ylabel(panel.y_label)
            ax.legend(loc="best")
        figure.suptitle(title)
        figure.tight_layout()

    return FigureArtifact(spec=spec, svg=render_svg(draw))


def fig_coefficients(
    result: RegressionResult,
    alpha: float | None = None,
    title: str = "Regression coefficients with confidence intervals",
) -> FigureArtifact:
    intervals = [i for i in coefficient_intervals(result, alpha) if i.name != INTERCEPT]
    if not intervals:
        intervals = coefficient_intervals(result, alpha)
    if not intervals:
        raise ValueError("Regression result has no terms to plot")

    for interval in intervals:
        if interval.lower is not None and not interval.lower <= interval.estimate <= interval.upper:  # type: ignore
            raise ValueError(f"Interval for {interval.name!r} does not contain its estimate")

    level = result.alpha if alpha is None else alpha
    spec = PlotSpec(
        kind=PlotKind.COEF_INTERVAL,
        series={
            "estimate": [i.estimate for i in intervals],
            "lower": [i.lower for i in intervals],
            "upper": [i.upper for i in intervals],
        },
        labels={"terms": [i.name for i in intervals], "x": "Estimate", "title": title},
        annotations={"confidence": 1 - level, "df_resid": result.df_resid, "reference": 0.0},
    )

    def draw(figure: Figure) -> None:
        ax = figure.add_subplot()
        positions = np.arange(len(intervals))
        for position, interval in zip(positions, intervals):
            if interval.lower is not None and interval.upper is not None:
                ax.hlines(position, interval.lower, interval.upper, color="#4c72b0", linewidth=2)
            ax.plot([interval.estimate], [position], marker="o", color="black")
        ax.axvline(0.0, color="grey", linestyle="--", linewidth=1)
        ax.set_yticks(positions, labels=spec.labels["terms"])
        ax.invert_yaxis()
        ax.set_xlabel(spec.labels["x"])
        ax.set_title(title)
        figure.tight_layout()

    return FigureArtifact(spec=spec, svg=render_svg(draw))


def fig_box(
    counts_by_division: dict[str, Sequence[float]],
    title: str = "Persistence technique counts by division",
) -> FigureArtifact:
    if not counts_by_division:
        raise ValueError("At least one group is required")
    for group, values in counts_by_division.items():
        if not values:
            raise ValueError(f"Group {group!r} is empty")

    groups = sorted(counts_by_division)
    box_stats = {group: get_box_stats(list(counts_by_division[group])) for group in groups}
    spec = PlotSpec(
        kind=PlotKind.BOX,
        series={group: [float(v) for v in counts_by_division[group]] for group in groups},
        labels={"groups": groups, "y": "Persistence technique count", "title": title},
        annotations={"box": {group: _box_dict(stats) for group, stats in box_stats.items()}},
    )

    def draw(figure: Figure) -> None:
        ax = figure.add_subplot()
        ax.bxp(
            [
                {
                    "label": group,
                    "q1": stats.q1,
                    "med": stats.median,
                    "q3": stats.q3,
                    "whislo": stats.whisker_low,
                    "whishi": stats.whisker_high,
                    "fliers": stats.outliers,
                }
                for group, stats in box_stats.items()
            ],
            showfliers=True,
        )
        ax.set_ylabel(spec.labels["y"])
        ax.set_title(title)
        figure.tight_layout()

    return FigureArtifact(spec=spec, svg=render_svg(draw))


def _scatter_panel_spec(panel: ScatterPanel) -> dict[str, Any]:
    if not len(panel.x) == len(panel.y) == len(panel.groups):
        raise ValueError("x, y and groups must have equal lengths")
    if len(panel.x) < 2:
        raise ValueError("A scatter fit needs at least two points")

    xs = np.asarray(panel.x, dtype=float)
    if np.all(xs == xs[0]):
        logger.warning(f"{panel.x_label}: {CONSTANT_X_WARNING}")
        return {"x_label": panel.x_label, "fit": None, "warning": CONSTANT_X_WARNING}

    slope, intercept = np.polyfit(xs, np.asarray(panel.y, dtype=float), 1)
    return {"x_label": panel.x_label, "fit": {"slope": float(slope), "intercept": float(intercept)}, "warning": None}


def _box_dict(stats: BoxStats) -> dict[str, Any]:
    return {
        "q1": stats.q1,
        "median": stats.median,
        "q3": stats.q3,
        "whisker_low": stats.whisker_low,
        "whisker_high": stats.whisker_high,
        "outliers": stats.outliers,
    }


def write_figure(report_dir: Path, name: str, artifact: FigureArtifact) -> list[Path]:
    return [
        write_atomic(report_dir / f"{name}.svg", artifact.svg),
        write_json(report_dir / f"{name}.json", artifact.spec.to_dict()),
    ]
