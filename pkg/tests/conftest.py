import socket
from datetime import datetime, timedelta

import pytest

from lapa import paths
from lapa.models.annotation import ActionSegment, AnnotatedAction, PersistenceAnnotation
from lapa.models.notes import NoteEntry, OpNote
from lapa.models.participant import Division, Participant, PsychometricProfile
from lapa.models.technique import MatchKind, TechniqueRef
from lapa.taxonomy import load_catalog

BASE_TIME = datetime(2024, 6, 1, 9, 0, 0)


@pytest.fixture(autouse=True)
def no_network(monkeypatch):
    def guard(*args, **kwargs):
        raise RuntimeError("Network access is not allowed in tests")

    monkeypatch.setattr(socket.socket, "connect", guard)
    monkeypatch.setattr(socket, "create_connection", guard)


@pytest.fixture(scope="session")
def bundled_catalog():
    return load_catalog(paths.BUNDLED_CATALOG)


@pytest.fixture
def mock_note_entry_builder():
    def note_entry_builder(minutes: int = 0, text: str = "Ran nmap sweep", line: int = 1):
        height = text.count("\n") + 1
        return NoteEntry(
            timestamp=BASE_TIME + timedelta(minutes=minutes),
            text=text,
            line_span=(line, line + height - 1),
        )

    return note_entry_builder


@pytest.fixture
def mock_note_builder(mock_note_entry_builder):
    def note_builder(texts: list[str] | None = None, participant_id: str = "p001", gap_minutes: int = 10):
        texts = texts if texts is not None else ["Ran nmap sweep"]
        entries = []
        line = 1
        for i, text in enumerate(texts):
            entry = mock_note_entry_builder(minutes=i * gap_minutes, text=text, line=line)
            entries.append(entry)
            line = entry.line_span[1] + 1
        return OpNote(participant_id=participant_id, entries=entries)

    return note_builder


@pytest.fixture
def mock_participant_builder():
    def participant_builder(
        participant_id: str = "p001",
        division: Division = Division.EXPERT,
        grips: float = 3.0,
        admc_rc1: float = 2.0,
        admc_rc2: float = 2.5,
    ):
        return Participant(
            participant_id=participant_id,
            division=division,
            psychometrics=PsychometricProfile(grips=grips, admc_rc1=admc_rc1, admc_rc2=admc_rc2),
        )

    return participant_builder


@pytest.fixture
def mock_participant(mock_participant_builder):
    return mock_participant_builder()


@pytest.fixture
def mock_technique():
    return TechniqueRef(technique_id="T1505", name="Server Software Component")


@pytest.fixture
def mock_subtechnique():
    return TechniqueRef(
        technique_id="T1505",
        name="Server Software Component",
        subtechnique_id="T1505.003",
        subtechnique_name="Web Shell",
    )


@pytest.fixture
def mock_action_builder():
    def action_builder(
        action_id: int = 1,
        participant_id: str = "p001",
        technique: TechniqueRef | None = None,
        is_persistence: bool = True,
        minutes: int = 0,
        duration_minutes: int = 0,
        description: str = "Deployed a web shell",
    ):
        start = BASE_TIME + timedelta(minutes=minutes)
        match_kind = MatchKind.EXACT if technique else MatchKind.UNMAPPED
        return AnnotatedAction(
            participant_id=participant_id,
            segment=ActionSegment(
                action_id=action_id,
                start=start,
                end=start + timedelta(minutes=duration_minutes),
                description=description,
                source_span=(action_id - 1, action_id - 1),
            ),
            annotation=PersistenceAnnotation(
                action_id=action_id,
                is_persistence=is_persistence,
                raw_label=technique.label if technique else "",
                reasoning="because",
                backend_id="rules-v1",
                technique=technique if is_persistence else None,
                match_kind=match_kind if is_persistence else MatchKind.UNMAPPED,
            ),
        )

    return action_builder


@pytest.fixture
def write_psychometrics(tmp_path):
    def psychometrics_writer(rows: list[str], header: str = "participant_id,division,grips,admc_rc1,admc_rc2"):
        path = tmp_path / "psychometrics.csv"
        path.write_text("\n".join([header, *rows]) + "\n", encoding="utf-8")
        return path

    return psychometrics_writer
