"""Operational notes (OPNOTES) as parsed from participant files."""
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any


@dataclass(frozen=True)
class NoteEntry:
    timestamp: datetime
    text: str
    line_span: tuple[int, int]

    def to_dict(self) -> dict[str, Any]:
        return {
            "timestamp": self.timestamp.isoformat(sep=" "),
            "text": self.text,
            "line_span": list(self.line_span),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "NoteEntry":
        first, last = data["line_span"]
        return cls(timestamp=datetime.fromisoformat(data["timestamp"]), text=data["text"], line_span=(first, last))


@dataclass
class OpNote:
    participant_id: str
    entries: list[NoteEntry] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {"participant_id": self.participant_id, "entries": [e.to_dict() for e in self.entries]}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "OpNote":
        return cls(
            participant_id=data["participant_id"],
            entries=[NoteEntry.from_dict(e) for e in data["entries"]],
        )
