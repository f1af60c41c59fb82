"""Segment each note into actions, then classify every action in context."""
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, TypeVar

from pydantic import BaseModel

from lapa.annotate import prompts
from lapa.annotate.backends import Backend, BoundedBackend
from lapa.annotate.prompts import BackendRequest, ClassificationResponse, SegmentationResponse
from lapa.env import LLMSettings
from lapa.errors import BackendError, CacheMissError, SchemaValidationError
from lapa.models.annotation import (
    ActionSegment,
    AnnotatedAction,
    AnnotationFailure,
    FailureKind,
    PersistenceAnnotation,
)
from lapa.models.corpus import Corpus, ParticipantRecord
from lapa.models.notes import OpNote
from lapa.taxonomy import DEFAULT_FUZZY_THRESHOLD, Catalog, normalize_label
from lapa.utils import write_atomic

logger = logging.getLogger(__name__)

DEFAULT_MODEL = LLMSettings.model_fields["MODEL"].default
DEFAULT_CONTEXT_WINDOW = 2
DEFAULT_MAX_INFLIGHT = 4

ResponseModel = TypeVar("ResponseModel", bound=BaseModel)


@dataclass(frozen=True)
class AnnotateConfig:
    model: str = DEFAULT_MODEL
    context_window: int = DEFAULT_CONTEXT_WINDOW
    max_inflight: int = DEFAULT_MAX_INFLIGHT
    fuzzy_threshold: float = DEFAULT_FUZZY_THRESHOLD


@dataclass
class AnnotationRun:
    actions: list[AnnotatedAction] = field(default_factory=list)
    failures: list[AnnotationFailure] = field(default_factory=list)

    @property
    def failed_participant_ids(self) -> list[str]:
        return sorted({f.participant_id for f in self.failures})


def segment(note: OpNote, backend: Backend, model: str = DEFAULT_MODEL) -> list[ActionSegment]:
    if not note.entries:
        raise ValueError(f"Cannot segment an empty note (participant_id={note.participant_id})")

    request = prompts.build_segment_request(note, model)

    def check(response: SegmentationResponse) -> None:
        previous_last = -1
        for item in response.segments:
            if not item.description.strip():
                raise ValueError("segment description is empty")
            if item.first_entry > item.last_entry:
                raise ValueError(f"segment span {item.first_entry}..{item.last_entry} is reversed")
            if item.last_entry >= len(note.entries):
                raise ValueError(f"segment span ends at {item.last_entry}, note has {len(note.entries)} entries")
            if item.first_entry <= previous_last:
                raise ValueError(f"segment starting at entry {item.first_entry} overlaps or is out of order")
            previous_last = item.last_entry

    parsed, _ = _complete_validated(backend, request, SegmentationResponse, check)
    return [
        ActionSegment(
            action_id=action_id,
            start=note.entries[item.first_entry].timestamp,
            end=note.entries[item.last_entry].timestamp,
            description=item.description.strip(),
            source_span=(item.first_entry, item.last_entry),
        )
        for action_id, item in enumerate(parsed.segments, start=1)
    ]


def classify(
    segments: list[ActionSegment],
    note: OpNote,
    catalog: Catalog,
    backend: Backend,
    context_window: int = DEFAULT_CONTEXT_WINDOW,
    model: str = DEFAULT_MODEL,
    fuzzy_threshold: float = DEFAULT_FUZZY_THRESHOLD,
) -> list[PersistenceAnnotation]:
    if context_window < 0:
        raise ValueError(f"context_window must be >= 0, got {context_window}")
    for segment_ in segments:
        if segment_.source_span[1] >= len(note.entries):
            raise ValueError(f"Action {segment_.action_id} does not belong to note {note.participant_id}")

    technique_labels = catalog.labels()
    annotations = []
    for index, segment_ in enumerate(segments):
        request = prompts.build_classify_request(segments, index, note, technique_labels, context_window, model)
        parsed, backend_id = _complete_validated(backend, request, ClassificationResponse, _check_classification)
        if not parsed.is_persistence:
            annotations.append(
                PersistenceAnnotation(
                    action_id=segment_.action_id,
                    is_persistence=False,
                    raw_label=parsed.technique_label.strip(),
                    reasoning=parsed.reasoning,
                    backend_id=backend_id,
                )
            )
            continue

        match = normalize_label(catalog, parsed.technique_label.strip(), fuzzy_threshold)
        if not match.is_mapped:
            logger.warning(
                f"Unmapped technique label {match.label!r} (participant_id={note.participant_id}, "
                f"action_id={segment_.action_id})"
            )
        annotations.append(PersistenceAnnotation.from_match(segment_.action_id, parsed.reasoning, backend_id, match))

    return annotations


def run_pipeline(corpus: Corpus, catalog: Catalog, backend: Backend, config: AnnotateConfig) -> AnnotationRun:
    bounded = BoundedBackend(inner=backend, max_inflight=config.max_inflight)
    logger.info(f"Annotating {len(corpus)} participants with backend={backend.backend_id} ({config=})")

    with ThreadPoolExecutor(max_workers=max(1, config.max_inflight)) as executor:
        outcomes = list(executor.map(lambda r: _annotate_participant(r, catalog, bounded, config), corpus.records))

    run = AnnotationRun()
    for actions, failure in outcomes:
        run.actions.extend(actions)
        if failure:
            run.failures.append(failure)

    run.actions.sort(key=lambda a: (a.participant_id, a.segment.action_id))
    run.failures.sort(key=lambda f: (f.participant_id, f.stage))
    logger.info(f"Annotated {len(run.actions)} actions; {len(run.failures)} participants failed")
    return run


def write_annotations(path: Path, actions: list[AnnotatedAction]) -> Path:
    lines = [json.dumps(action.to_dict(), sort_keys=True, ensure_ascii=False) for action in actions]
    return write_atomic(path, "".join(f"{line}\n" for line in lines))


def read_annotations(path: Path) -> list[AnnotatedAction]:
    lines = path.read_text(encoding="utf-8").splitlines()
    return [AnnotatedAction.from_dict(json.loads(line)) for line in lines if line.strip()]


def _annotate_participant(
    record: ParticipantRecord, catalog: Catalog, backend: Backend, config: AnnotateConfig
) -> tuple[list[AnnotatedAction], AnnotationFailure | None]:
    note = record.note
    if not note.entries:
        logger.warning(f"Participant has an empty note: participant_id={record.participant_id}")
        return [], None

    stage = prompts.SEGMENT_STAGE
    try:
        segments = segment(note, backend, config.model)
        stage = prompts.CLASSIFY_STAGE
        annotations = classify(
            segments, note, catalog, backend, config.context_window, config.model, config.fuzzy_threshold
        )
    except (BackendError, SchemaValidationError) as e:
        kind = _failure_kind(e)
        logger.warning(f"Annotation failed: participant_id={record.participant_id} {stage=} kind={kind.value}: {e}")
        return [], AnnotationFailure(participant_id=record.participant_id, stage=stage, kind=kind, message=str(e))

    actions = [
        AnnotatedAction(participant_id=record.participant_id, segment=s, annotation=a)
        for s, a in zip(segments, annotations)
    ]
    return actions, None


def _failure_kind(error: Exception) -> FailureKind:
    if isinstance(error, CacheMissError):
        return FailureKind.CACHE_MISS
    if isinstance(error, SchemaValidationError):
        return FailureKind.SCHEMA
    return FailureKind.TRANSPORT


def _check_classification(response: ClassificationResponse) -> None:
    if response.is_persistence:
        if not response.technique_label.strip():
            raise ValueError("technique_label is required when is_persistence is true")
        if not response.reasoning.strip():
            raise ValueError("reasoning is required when is_persistence is true")


def _complete_validated(
    backend: Backend,
    request: BackendRequest,
    schema: type[ResponseModel],
    check: Callable[[ResponseModel], None],
) -> tuple[ResponseModel, str]:
    """Validate a response, with one repair round-trip on failure."""
    response = backend.complete(request)
    try:
        return _validate(response.text, schema, check), response.backend_id
    except ValueError as e:
        logger.warning(f"Invalid {request.stage} output, requesting repair: {e}")
        error = str(e)

    repaired = backend.complete(prompts.build_repair_request(request, response.text, error))
    try:
        return _validate(repaired.text, schema, check), repaired.backend_id
    except ValueError as e:
        raise SchemaValidationError(f"{request.stage} output invalid after repair: {e}") from e


def _validate(text: str, schema: type[ResponseModel], check: Callable[[ResponseModel], None]) -> ResponseModel:
    parsed = schema.model_validate_json(text)
    check(parsed)
    return parsed
