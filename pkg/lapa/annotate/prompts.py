"""Prompt text and response schemas for the two annotation stages.

Bump PROMPT_VERSION whenever instructions or schemas change; it is part of every cache key.
"""
import json
from dataclasses import dataclass, field
from hashlib import sha256
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from lapa.models.annotation import ActionSegment
from lapa.models.notes import OpNote
from lapa.utils import canonical_json

PROMPT_VERSION = "2024-06-persistence-v2"

SEGMENT_STAGE = "segment"
CLASSIFY_STAGE = "classify"

SEGMENT_INSTRUCTIONS = """\
You read a red-team operator's timestamped operational notes and split them into discrete attacker actions.
Each action is one task the operator carried out, such as a scan, an exploit attempt, a credential use or
the installation of an access mechanism. An action covers one or more consecutive note entries.

Reply with a JSON object {"segments": [...]} where each segment has:
  "description": a concise description of the task (one sentence),
  "first_entry": index of the first note entry of the action,
  "last_entry": index of the last note entry of the action.
Segments must be in note order and must not overlap. Entries that record no action may be left out."""

CLASSIFY_INSTRUCTIONS = """\
You classify one attacker action from a red-team engagement. Consider the surrounding actions as context:
an action counts as persistence when its purpose is to keep or regain access to a compromised system across
interruptions such as restarts, changed credentials or defender clean-up.

Think first, then decide. Reply with a JSON object whose fields appear in this order:
  "reasoning": your step-by-step justification,
  "is_persistence": true or false,
  "technique_label": when is_persistence is true, the closest MITRE ATT&CK persistence technique or
                     sub-technique name from the provided list; otherwise an empty string."""

REPAIR_INSTRUCTIONS = """\
Your previous reply did not match the required JSON format. The original request, your reply and the
validation error follow. Reply again with only a corrected JSON object."""


class SegmentItem(BaseModel):
    model_config = ConfigDict(extra="forbid")

    description: str = Field(min_length=1)
    first_entry: int = Field(ge=0)
    last_entry: int = Field(ge=0)


class SegmentationResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    segments: list[SegmentItem]


class ClassificationResponse(BaseModel):
    """Reasoning is declared first so the serialized schema asks for it before the label."""

    model_config = ConfigDict(extra="forbid")

    reasoning: str
    is_persistence: bool
    technique_label: str = ""


SEGMENTATION_SCHEMA = SegmentationResponse.model_json_schema()
CLASSIFICATION_SCHEMA = ClassificationResponse.model_json_schema()


@dataclass(frozen=True)
class BackendRequest:
    stage: str
    system_instructions: str
    user_payload: str
    response_schema: dict[str, Any] = field(hash=False)
    model: str
    temperature: float = 0.0
    prompt_version: str = PROMPT_VERSION

    def to_dict(self) -> dict[str, Any]:
        return {
            "stage": self.stage,
            "system_instructions": self.system_instructions,
            "user_payload": self.user_payload,
            "response_schema": self.response_schema,
            "model": self.model,
            "temperature": self.temperature,
            "prompt_version": self.prompt_version,
        }

    @property
    def cache_key(self) -> str:
        return sha256(canonical_json(self.to_dict()).encode("utf-8")).hexdigest()

    @property
    def payload(self) -> dict[str, Any]:
        return json.loads(self.user_payload)


@dataclass(frozen=True)
class BackendResponse:
    text: str
    backend_id: str
    usage: dict[str, int] = field(default_factory=dict, hash=False)
    latency: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return {"text": self.text, "backend_id": self.backend_id, "usage": self.usage, "latency": self.latency}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "BackendResponse":
        return cls(
            text=data["text"],
            backend_id=data["backend_id"],
            usage=dict(data.get("usage", {})),
            latency=float(data.get("latency", 0.0)),
        )


def build_segment_request(note: OpNote, model: str) -> BackendRequest:
    payload = {
        "participant_id": note.participant_id,
        "entries": [
            {"index": i, "timestamp": entry.timestamp.isoformat(sep=" "), "text": entry.text}
            for i, entry in enumerate(note.entries)
        ],
    }
    return BackendRequest(
        stage=SEGMENT_STAGE,
        system_instructions=SEGMENT_INSTRUCTIONS,
        user_payload=canonical_json(payload),
        response_schema=SEGMENTATION_SCHEMA,
        model=model,
    )


def build_classify_request(
    segments: list[ActionSegment],
    index: int,
    note: OpNote,
    technique_labels: list[str],
    context_window: int,
    model: str,
) -> BackendRequest:
    target = segments[index]
    first, last = target.source_span
    payload = {
        "participant_id": note.participant_id,
        "target": {**_describe(target), "notes": [e.text for e in note.entries[first : last + 1]]},
        "context_before": [_describe(s) for s in segments[max(0, index - context_window) : index]],
        "context_after": [_describe(s) for s in segments[index + 1 : index + 1 + context_window]],
        "techniques": technique_labels,
    }
    return BackendRequest(
        stage=CLASSIFY_STAGE,
        system_instructions=CLASSIFY_INSTRUCTIONS,
        user_payload=canonical_json(payload),
        response_schema=CLASSIFICATION_SCHEMA,
        model=model,
    )


def build_repair_request(request: BackendRequest, invalid_output: str, error: str) -> BackendRequest:
    payload = {"original_request": request.payload, "invalid_output": invalid_output, "validation_error": error}
    return BackendRequest(
        stage=f"{request.stage}_repair",
        system_instructions=f"{REPAIR_INSTRUCTIONS}\n\n{request.system_instructions}",
        user_payload=canonical_json(payload),
        response_schema=request.response_schema,
        model=request.model,
        temperature=request.temperature,
        prompt_version=request.prompt_version,
    )


def _describe(segment: ActionSegment) -> dict[str, Any]:
    return {
        "action_id": segment.action_id,
        "start": segment.start.isoformat(sep=" "),
        "end": segment.end.isoformat(sep=" "),
        "description": segment.description,
    }
