"""Segmented actions and their persistence annotations."""
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from typing import Any

from lapa.models.technique import LabelMatch, MatchKind, TechniqueRef


@dataclass(frozen=True)
class ActionSegment:
    action_id: int
    start: datetime
    end: datetime
    description: str
    source_span: tuple[int, int]

    @property
    def duration_minutes(self) -> float:
        return (self.end - self.start).total_seconds() / 60

    def to_dict(self) -> dict[str, Any]:
        return {
            "action_id": self.action_id,
            "start": self.start.isoformat(sep=" "),
            "end": self.end.isoformat(sep=" "),
            "description": self.description,
            "source_span": list(self.source_span),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ActionSegment":
        first, last = data["source_span"]
        return cls(
            action_id=int(data["action_id"]),
            start=datetime.fromisoformat(data["start"]),
            end=datetime.fromisoformat(data["end"]),
            description=data["description"],
            source_span=(first, last),
        )


@dataclass(frozen=True)
class PersistenceAnnotation:
    action_id: int
    is_persistence: bool
    raw_label: str
    reasoning: str
    backend_id: str
    technique: TechniqueRef | None = None
    match_kind: MatchKind = MatchKind.UNMAPPED

    @classmethod
    def from_match(
        cls, action_id: int, reasoning: str, backend_id: str, match: LabelMatch
    ) -> "PersistenceAnnotation":
        return cls(
            action_id=action_id,
            is_persistence=True,
            raw_label=match.label,
            reasoning=reasoning,
            backend_id=backend_id,
            technique=match.technique,
            match_kind=match.match_kind,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "action_id": self.action_id,
            "is_persistence": self.is_persistence,
            "technique": self.technique.to_dict() if self.technique else None,
            "match_kind": self.match_kind.value if self.is_persistence else None,
            "raw_label": self.raw_label,
            "reasoning": self.reasoning,
            "backend_id": self.backend_id,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PersistenceAnnotation":
        technique = data.get("technique")
        return cls(
            action_id=int(data["action_id"]),
            is_persistence=bool(data["is_persistence"]),
            raw_label=data.get("raw_label", ""),
            reasoning=data.get("reasoning", ""),
            backend_id=data.get("backend_id", ""),
            technique=TechniqueRef.from_dict(technique) if technique else None,
            match_kind=MatchKind(data.get("match_kind") or MatchKind.UNMAPPED.value),
        )


@dataclass(frozen=True)
class AnnotatedAction:
    """One line of the annotations JSONL: a segment with its embedded annotation."""

    participant_id: str
    segment: ActionSegment
    annotation: PersistenceAnnotation

    def to_dict(self) -> dict[str, Any]:
        return {
            "participant_id": self.participant_id,
            **self.segment.to_dict(),
            "annotation": self.annotation.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "AnnotatedAction":
        return cls(
            participant_id=data["participant_id"],
            segment=ActionSegment.from_dict(data),
            annotation=PersistenceAnnotation.from_dict(data["annotation"]),
        )


class FailureKind(Enum):
    TRANSPORT = "transport"
    SCHEMA = "schema"
    CACHE_MISS = "cache_miss"


@dataclass(frozen=True)
class AnnotationFailure:
    participant_id: str
    stage: str
    kind: FailureKind
    message: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "participant_id": self.participant_id,
            "stage": self.stage,
            "kind": self.kind.value,
            "message": self.message,
        }
