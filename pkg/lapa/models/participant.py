"""Participants and their psychometric profiles."""
from dataclasses import dataclass
from enum import Enum
from typing import Any


class Division(Enum):
    EXPERT = "Expert"
    OPEN = "Open"

    @classmethod
    def parse(cls, value: str) -> "Division":
        folded = value.strip().casefold()
        for division in cls:
            if division.value.casefold() == folded:
                return division
        raise ValueError(f"Unknown division: {value!r}")

    @property
    def indicator(self) -> int:
        """Regression encoding, Expert is the reference level."""
        return 1 if self is Division.OPEN else 0


@dataclass(frozen=True)
class PsychometricProfile:
    grips: float
    admc_rc1: float
    admc_rc2: float


@dataclass(frozen=True)
class Participant:
    participant_id: str
    division: Division
    psychometrics: PsychometricProfile

    def to_dict(self) -> dict[str, Any]:
        return {
            "participant_id": self.participant_id,
            "division": self.division.value,
            "grips": self.psychometrics.grips,
            "admc_rc1": self.psychometrics.admc_rc1,
            "admc_rc2": self.psychometrics.admc_rc2,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Participant":
        return cls(
            participant_id=data["participant_id"],
            division=Division.parse(data["division"]),
            psychometrics=PsychometricProfile(
                grips=float(data["grips"]),
                admc_rc1=float(data["admc_rc1"]),
                admc_rc2=float(data["admc_rc2"]),
            ),
        )
