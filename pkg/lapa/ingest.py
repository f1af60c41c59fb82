"""OPNOTE and psychometrics parsing, and the corpus join.

OPNOTE grammar: a header line `[YYYY-MM-DD HH:MM:SS] <text>` opens an entry; every following line
that is not a header continues it. Blank lines before the first header are ignored.
"""
import logging
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

import pandas as pd

from lapa.errors import ConfigError, JoinError, OpNoteParseError, PsychometricsError
from lapa.models.corpus import Corpus, ParticipantRecord
from lapa.models.notes import NoteEntry, OpNote
from lapa.models.participant import Division, Participant, PsychometricProfile

logger = logging.getLogger(__name__)

TIMESTAMP_FORMAT = "%Y-%m-%d %H:%M:%S"
NOTE_SUFFIX = ".txt"
PSYCHOMETRICS_COLUMNS = ["participant_id", "division", "grips", "admc_rc1", "admc_rc2"]
SCORE_COLUMNS = ["grips", "admc_rc1", "admc_rc2"]

_HEADER = re.compile(r"^\[(\d{4}-\d{2}-\d{2} \d{2}:\d{2}:\d{2})\] ?(.*)$")


@dataclass(frozen=True)
class ExerciseWindow:
    start: datetime | None = None
    end: datetime | None = None

    def __contains__(self, timestamp: datetime) -> bool:
        if self.start and timestamp < self.start:
            return False
        if self.end and timestamp > self.end:
            return False
        return True


def parse_opnote(path: Path, participant_id: str, window: ExerciseWindow | None = None) -> OpNote:
    if not participant_id:
        raise ValueError("participant_id must be non-empty")

    raw = path.read_bytes()
    try:
        lines = raw.decode("utf-8").splitlines()
    except UnicodeDecodeError as e:
        raise OpNoteParseError(path, raw[: e.start].count(b"\n") + 1, "invalid UTF-8") from e
    entries: list[NoteEntry] = []
    header: tuple[int, datetime] | None = None
    body: list[str] = []

    def close_entry() -> None:
        if header is None:
            return
        line_number, timestamp = header
        while body and not body[-1].strip():
            body.pop()
        text = "\n".join(body)
        if not text.strip():
            raise OpNoteParseError(path, line_number, "entry has no text")
        entries.append(NoteEntry(timestamp=timestamp, text=text, line_span=(line_number, line_number + len(body) - 1)))

    for line_number, line in enumerate(lines, start=1):
        match = _HEADER.match(line)
        if match:
            try:
                timestamp = datetime.strptime(match.group(1), TIMESTAMP_FORMAT)
            except ValueError as e:
                raise OpNoteParseError(path, line_number, f"invalid timestamp {match.group(1)!r}") from e
            if window and timestamp not in window:
                raise OpNoteParseError(path, line_number, f"timestamp {match.group(1)} outside the exercise window")

            close_entry()
            header = (line_number, timestamp)
            body = [match.group(2)]
            continue

        if header is None:
            if line.strip():
                raise OpNoteParseError(path, line_number, "text before the first timestamp header")
            continue

        body.append(line)

    close_entry()
    # sorted() is stable, so entries sharing a timestamp keep file order
    entries = sorted(entries, key=lambda e: e.timestamp)
    logger.debug(f"Parsed {len(entries)} entries from {path.as_posix()} ({participant_id=})")
    return OpNote(participant_id=participant_id, entries=entries)


def render_opnote(note: OpNote) -> str:
    """Serialize a note back to the grammar in normal form."""
    lines: list[str] = []
    for entry in note.entries:
        first, *rest = entry.text.split("\n")
        header = f"[{entry.timestamp.strftime(TIMESTAMP_FORMAT)}]"
        lines.append(f"{header} {first}" if first else header)
        lines.extend(rest)
    return "".join(f"{line}\n" for line in lines)


def parse_psychometrics(path: Path) -> list[Participant]:
    if not path.is_file():
        raise ConfigError(f"Psychometrics file not found: {path.as_posix()}")

    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError as e:
        raise PsychometricsError(f"Psychometrics file {path.as_posix()} is empty") from e

    columns = [str(c).strip() for c in df.columns]
    for column in PSYCHOMETRICS_COLUMNS:
        if column not in columns:
            raise PsychometricsError("Missing column", column=column)
    if columns != PSYCHOMETRICS_COLUMNS:
        unexpected = next((c for c in columns if c not in PSYCHOMETRICS_COLUMNS), None)
        raise PsychometricsError(
            f"Header must be exactly {','.join(PSYCHOMETRICS_COLUMNS)}", row=1, column=unexpected
        )
    df.columns = columns

    participants: list[Participant] = []
    seen: set[str] = set()
    for index, row in enumerate(df.itertuples(index=False)):
        row_number = index + 2  # 1-based, after the header
        participant_id = row.participant_id.strip()
        if not participant_id:
            raise PsychometricsError("Empty participant id", row=row_number, column="participant_id")
        if participant_id in seen:
            raise PsychometricsError(
                f"Duplicate participant id {participant_id!r}", row=row_number, column="participant_id"
            )
        seen.add(participant_id)

        try:
            division = Division.parse(row.division)
        except ValueError as e:
            raise PsychometricsError(str(e), row=row_number, column="division") from e

        scores = {column: _parse_score(getattr(row, column), row_number, column) for column in SCORE_COLUMNS}
        participants.append(
            Participant(
                participant_id=participant_id,
                division=division,
                psychometrics=PsychometricProfile(**scores),
            )
        )

    logger.info(f"Parsed {len(participants)} participants from {path.as_posix()}")
    return participants


def load_corpus(
    notes_dir: Path,
    psychometrics_path: Path,
    allow_partial: bool = False,
    workers: int = 4,
    window: ExerciseWindow | None = None,
) -> Corpus:
    if not notes_dir.is_dir():
        raise ConfigError(f"Notes directory not found: {notes_dir.as_posix()}")

    participants = {p.participant_id: p for p in parse_psychometrics(psychometrics_path)}
    note_paths = {p.stem: p for p in sorted(notes_dir.glob(f"*{NOTE_SUFFIX}")) if p.is_file()}

    notes_only = sorted(set(note_paths) - set(participants))
    psychometrics_only = sorted(set(participants) - set(note_paths))
    if notes_only or psychometrics_only:
        if not allow_partial:
            raise JoinError(notes_only, psychometrics_only)
        for participant_id in notes_only:
            logger.warning(f"Skipping note without psychometrics: {participant_id=}")
        for participant_id in psychometrics_only:
            logger.warning(f"Skipping psychometrics row without a note: {participant_id=}")

    joined_ids = sorted(set(note_paths) & set(participants))
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        notes = list(executor.map(lambda pid: parse_opnote(note_paths[pid], pid, window), joined_ids))

    corpus = Corpus(
        records=[ParticipantRecord(participant=participants[n.participant_id], note=n) for n in notes]
    )
    logger.info(f"Loaded corpus of {len(corpus)} participants from {notes_dir.as_posix()}")
    return corpus


def _parse_score(value: str, row_number: int, column: str) -> float:
    try:
        score = float(value)
    except ValueError as e:
        raise PsychometricsError(f"Non-numeric score {value!r}", row=row_number, column=column) from e
    if not math.isfinite(score):
        raise PsychometricsError(f"Non-finite score {value!r}", row=row_number, column=column)
    return score
