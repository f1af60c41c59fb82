"""Per-participant behavioral metrics and corpus-level technique distributions."""
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Iterable, Mapping

import pandas as pd

from lapa.errors import InsufficientDataError, MetricsFileError
from lapa.models.annotation import AnnotatedAction
from lapa.stats.summary import SummaryStats, get_summary_stats
from lapa.utils import format_fixed, write_atomic

logger = logging.getLogger(__name__)

UNMAPPED_BUCKET = "(unmapped)"
DEFAULT_BIN_COUNT = 8
DEFAULT_STAGE_LABELS = ["reconnaissance", "privilege_escalation", "lateral_movement", "data_exfiltration"]
METRICS_COLUMNS = [
    "participant_id",
    "persistence_count",
    "unique_technique_count",
    "unique_subtechnique_count",
    "unmapped_count",
    "action_count",
    "persistence_minutes",
]

TechniqueToCount = dict[str, int]


@dataclass(frozen=True)
class BinSpec:
    """Stage boundaries (bin i covers [start_i, start_i+1)) or equal-width bins over a time span."""

    labels: list[str]
    starts: list[datetime] = field(default_factory=list)
    span: tuple[datetime, datetime] | None = None

    @classmethod
    def from_stages(cls, stages: list[tuple[str, datetime]]) -> "BinSpec":
        if not stages:
            raise ValueError("At least one stage boundary is required")
        ordered = sorted(stages, key=lambda s: s[1])
        labels = [label for label, _ in ordered]
        if len(set(labels)) != len(labels):
            raise ValueError(f"Stage labels must be unique, got {labels}")
        return cls(labels=labels, starts=[start for _, start in ordered])

    @classmethod
    def equal_width(cls, timestamps: Iterable[datetime], count: int = DEFAULT_BIN_COUNT) -> "BinSpec":
        if count < 1:
            raise ValueError(f"Bin count must be >= 1, got {count}")
        times = list(timestamps)
        span = (min(times), max(times)) if times else None
        return cls(labels=[f"t{i}" for i in range(1, count + 1)], span=span)

    def index(self, timestamp: datetime) -> int:
        if self.starts:
            position = 0
            for i, start in enumerate(self.starts):
                if timestamp >= start:
                    position = i
            return position

        if self.span is None:
            return 0
        first, last = self.span
        width = (last - first) / len(self.labels)
        if width.total_seconds() == 0:
            return 0
        # the final bin is closed on the right
        position = int((timestamp - first) / width)
        return min(max(position, 0), len(self.labels) - 1)

    @property
    def columns(self) -> list[str]:
        return [f"bin_{label}" for label in self.labels]


@dataclass(frozen=True)
class BehavioralMetrics:
    participant_id: str
    persistence_count: int
    unique_technique_count: int
    per_technique_counts: TechniqueToCount
    temporal_bins: dict[str, int]
    unmapped_count: int = 0
    action_count: int = 0
    unique_subtechnique_count: int = 0
    persistence_minutes: float = 0.0
    technique_names: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class CorpusDistribution:
    totals: TechniqueToCount
    grand_total: int
    percentages: dict[str, float]
    participant_summary: SummaryStats
    participant_count: int

    def ranked(self) -> list[tuple[str, int]]:
        """Descending by count, ties by name."""
        return sorted(self.totals.items(), key=lambda item: (-item[1], item[0]))

    def percent_label(self, name: str) -> str:
        return f"{format_fixed(self.percentages[name] * 100, 1)}%"

    def to_dict(self) -> dict[str, Any]:
        return {
            "techniques": [
                {"name": name, "count": count, "share": self.percentages[name], "percent": self.percent_label(name)}
                for name, count in self.ranked()
            ],
            "grand_total": self.grand_total,
            "participant_count": self.participant_count,
            "participant_summary": self.participant_summary.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "CorpusDistribution":
        return cls(
            totals={t["name"]: int(t["count"]) for t in data["techniques"]},
            grand_total=int(data["grand_total"]),
            percentages={t["name"]: float(t["share"]) for t in data["techniques"]},
            participant_summary=SummaryStats(**data["participant_summary"]),
            participant_count=int(data["participant_count"]),
        )


def participant_metrics(
    actions: list[AnnotatedAction], bin_spec: BinSpec, participant_id: str | None = None
) -> BehavioralMetrics:
    ids = {a.participant_id for a in actions}
    if participant_id is not None:
        ids.add(participant_id)
    if len(ids) != 1:
        raise ValueError(f"Annotations must belong to exactly one participant, got {sorted(ids)}")
    (owner,) = ids

    per_technique: TechniqueToCount = Counter()
    names: dict[str, str] = {}
    subtechniques: set[str] = set()
    bins = {label: 0 for label in bin_spec.labels}
    unmapped = 0
    minutes = 0.0
    persistence = [a for a in actions if a.annotation.is_persistence]
    for action in persistence:
        technique = action.annotation.technique
        if technique is None:
            unmapped += 1
        else:
            per_technique[technique.technique_id] += 1
            names[technique.technique_id] = technique.name
            if technique.subtechnique_id:
                subtechniques.add(technique.subtechnique_id)
        bins[bin_spec.labels[bin_spec.index(action.segment.start)]] += 1
        minutes += action.segment.duration_minutes

    return BehavioralMetrics(
        participant_id=owner,
        persistence_count=len(persistence),
        unique_technique_count=len(per_technique),
        per_technique_counts=dict(sorted(per_technique.items())),
        temporal_bins=bins,
        unmapped_count=unmapped,
        action_count=len(actions),
        unique_subtechnique_count=len(subtechniques),
        persistence_minutes=minutes,
        technique_names=names,
    )


def get_participant_to_metrics(
    actions: list[AnnotatedAction], participant_ids: Iterable[str], bin_spec: BinSpec
) -> dict[str, BehavioralMetrics]:
    participant_to_actions: Mapping[str, list[AnnotatedAction]] = defaultdict(list)
    for action in actions:
        participant_to_actions[action.participant_id].append(action)

    return {
        participant_id: participant_metrics(participant_to_actions.get(participant_id, []), bin_spec, participant_id)
        for participant_id in sorted(set(participant_ids))
    }


def technique_totals(all_metrics: Iterable[BehavioralMetrics]) -> TechniqueToCount:
    totals: TechniqueToCount = Counter()
    for metrics in all_metrics:
        for technique_id, count in metrics.per_technique_counts.items():
            totals[metrics.technique_names.get(technique_id, technique_id)] += count
        if metrics.unmapped_count:
            totals[UNMAPPED_BUCKET] += metrics.unmapped_count
    return dict(totals)


def merge_totals(*parts: Mapping[str, int]) -> TechniqueToCount:
    merged: TechniqueToCount = Counter()
    for part in parts:
        merged.update(part)
    return dict(merged)


def corpus_distribution(all_metrics: list[BehavioralMetrics]) -> CorpusDistribution:
    if not all_metrics:
        raise InsufficientDataError("Corpus distribution needs at least one participant")

    totals = technique_totals(all_metrics)
    grand_total = sum(totals.values())
    percentages = {name: count / grand_total for name, count in totals.items()} if grand_total else {}
    return CorpusDistribution(
        totals=dict(sorted(totals.items())),
        grand_total=grand_total,
        percentages=dict(sorted(percentages.items())),
        participant_summary=get_summary_stats([m.persistence_count for m in all_metrics]),
        participant_count=len(all_metrics),
    )


def get_metrics_df(all_metrics: list[BehavioralMetrics], bin_spec: BinSpec) -> pd.DataFrame:
    data: Mapping[str, list[str | int | float]] = defaultdict(list)
    for metrics in sorted(all_metrics, key=lambda m: m.participant_id):
        data["participant_id"].append(metrics.participant_id)
        data["persistence_count"].append(metrics.persistence_count)
        data["unique_technique_count"].append(metrics.unique_technique_count)
        data["unique_subtechnique_count"].append(metrics.unique_subtechnique_count)
        data["unmapped_count"].append(metrics.unmapped_count)
        data["action_count"].append(metrics.action_count)
        data["persistence_minutes"].append(metrics.persistence_minutes)
        for label, column in zip(bin_spec.labels, bin_spec.columns):
            data[column].append(metrics.temporal_bins[label])

    return pd.DataFrame(data=data, columns=[*METRICS_COLUMNS, *bin_spec.columns])


def write_metrics_csv(path: Path, df: pd.DataFrame) -> Path:
    logger.info(f"Writing metrics for {len(df)} participants to {path.as_posix()}")
    return write_atomic(path, df.to_csv(index=False, lineterminator="\n", float_format="%.3f"))


def read_persistence_counts(path: Path) -> dict[str, int]:
    if not path.is_file():
        raise MetricsFileError(path, "metrics file not found")

    df = pd.read_csv(path, dtype={"participant_id": str}, keep_default_na=False)
    missing = [c for c in ("participant_id", "persistence_count") if c not in df.columns]
    if missing:
        raise MetricsFileError(path, f"missing columns {missing}")

    counts: dict[str, int] = {}
    for participant_id, count in zip(df["participant_id"], df["persistence_count"]):
        if participant_id in counts:
            raise MetricsFileError(path, f"duplicate participant id {participant_id!r}")
        counts[participant_id] = int(count)
    return counts
