"""MITRE ATT&CK technique identities."""
from dataclasses import dataclass
from enum import Enum
from typing import Any

PERSISTENCE_TACTIC = "persistence"


@dataclass(frozen=True, order=True)
class TechniqueRef:
    """A persistence technique, optionally narrowed to one of its sub-techniques."""

    technique_id: str
    name: str
    subtechnique_id: str | None = None
    subtechnique_name: str | None = None
    tactic: str = PERSISTENCE_TACTIC

    @property
    def is_subtechnique(self) -> bool:
        return self.subtechnique_id is not None

    @property
    def label(self) -> str:
        if self.subtechnique_name:
            return f"{self.name}: {self.subtechnique_name}"
        return self.name

    @property
    def sort_key(self) -> tuple[str, str]:
        return self.technique_id, self.subtechnique_id or ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "technique_id": self.technique_id,
            "name": self.name,
            "subtechnique_id": self.subtechnique_id,
            "subtechnique_name": self.subtechnique_name,
            "tactic": self.tactic,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TechniqueRef":
        return cls(
            technique_id=data["technique_id"],
            name=data["name"],
            subtechnique_id=data.get("subtechnique_id"),
            subtechnique_name=data.get("subtechnique_name"),
            tactic=data.get("tactic", PERSISTENCE_TACTIC),
        )


class MatchKind(Enum):
    EXACT = "exact"
    ALIAS = "alias"
    FUZZY = "fuzzy"
    UNMAPPED = "unmapped"


@dataclass(frozen=True)
class LabelMatch:
    label: str
    match_kind: MatchKind
    technique: TechniqueRef | None = None
    score: float = 0.0

    @property
    def is_mapped(self) -> bool:
        return self.technique is not None
