"""A corpus: participants joined to their operational notes."""
from dataclasses import dataclass, field
from typing import Any

from lapa.models.notes import OpNote
from lapa.models.participant import Division, Participant


@dataclass(frozen=True)
class ParticipantRecord:
    participant: Participant
    note: OpNote

    @property
    def participant_id(self) -> str:
        return self.participant.participant_id


@dataclass
class Corpus:
    records: list[ParticipantRecord] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.records = sorted(self.records, key=lambda r: r.participant_id)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def participant_ids(self) -> list[str]:
        return [r.participant_id for r in self.records]

    @property
    def participants(self) -> list[Participant]:
        return [r.participant for r in self.records]

    def division_counts(self) -> dict[Division, int]:
        counts = {division: 0 for division in Division}
        for record in self.records:
            counts[record.participant.division] += 1
        return counts

    def to_dict(self) -> dict[str, Any]:
        return {
            "participants": [
                {**record.participant.to_dict(), "entries": record.note.to_dict()["entries"]}
                for record in self.records
            ]
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Corpus":
        records = []
        for item in data["participants"]:
            participant = Participant.from_dict(item)
            note = OpNote.from_dict({"participant_id": participant.participant_id, "entries": item["entries"]})
            records.append(ParticipantRecord(participant=participant, note=note))
        return cls(records=records)
