"""Synthetic OPNOTE corpora with a planted psychometric effect on persistence counts.

Count model per participant:
    round(max(0, intercept + grips_slope * grips + division_effect * [Open] + Normal(0, noise_sd)))
All randomness comes from one `numpy.random.default_rng(seed)` stream consumed in a fixed order.
"""
import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path
from typing import Mapping

import numpy as np
import pandas as pd

from lapa.errors import ConfigError
from lapa.ingest import NOTE_SUFFIX, PSYCHOMETRICS_COLUMNS, render_opnote
from lapa.models.notes import NoteEntry, OpNote
from lapa.models.participant import Division
from lapa.taxonomy import Catalog
from lapa.utils import write_atomic

logger = logging.getLogger(__name__)

BASE_TIME = datetime(2024, 6, 1, 9, 0, 0)
ENGAGEMENT_MINUTES = 2 * 24 * 60
SCORE_RANGE = (1.0, 5.0)

PERSISTENCE_DETAILS = [
    "Confirmed the foothold survives a reboot.",
    "Callback verified from the implant.",
    "Documented the mechanism for the team.",
    "Tested re-entry after logging out.",
]
FILLER_ACTIONS = [
    "Ran nmap sweep against the DMZ subnet",
    "Enumerated SMB shares on the file server",
    "Dumped LSASS memory on the workstation",
    "Uploaded exfil data to the staging server",
    "Pivoted to the database subnet over RDP",
    "Reviewed loot and updated the target list",
    "Received simulated maintenance alert; paused activity",
    "Escalated privileges with a kernel exploit",
    "Cracked NTLM hashes offline",
    "Searched the intranet wiki for network diagrams",
]


@dataclass(frozen=True)
class SynthConfig:
    n_participants: int = 20
    seed: int = 0
    grips_slope: float = -4.4
    division_effect: float = 0.0
    noise_sd: float = 4.0
    intercept: float = 25.0
    techniques: list[str] = field(default_factory=list)
    entries_per_participant: tuple[int, int] = (3, 8)
    open_probability: float = 0.5

    def validate(self, catalog: Catalog) -> None:
        if self.n_participants < 1:
            raise ConfigError(f"n_participants must be >= 1, got {self.n_participants}")
        if self.noise_sd < 0:
            raise ConfigError(f"noise_sd must be >= 0, got {self.noise_sd}")
        low, high = self.entries_per_participant
        if low < 0 or high < low:
            raise ConfigError(f"entries_per_participant must be a range 0 <= low <= high, got {low}..{high}")
        if not 0 <= self.open_probability <= 1:
            raise ConfigError(f"open_probability must lie in [0, 1], got {self.open_probability}")
        unknown = sorted(set(self.techniques) - set(catalog.technique_names()))
        if unknown:
            raise ConfigError(f"Techniques not in the catalog: {unknown}")


@dataclass(frozen=True)
class SynthParticipant:
    participant_id: str
    division: Division
    grips: float
    admc_rc1: float
    admc_rc2: float
    note: OpNote
    persistence_techniques: list[tuple[int, str]]

    @property
    def persistence_count(self) -> int:
        return len(self.persistence_techniques)


@dataclass(frozen=True)
class SynthOutput:
    notes_dir: Path
    psychometrics_path: Path
    ground_truth_path: Path
    participants: list[SynthParticipant]


def planted_count(config: SynthConfig, grips: float, division: Division, noise: float) -> int:
    value = config.intercept + config.grips_slope * grips + config.division_effect * division.indicator + noise
    return int(round(max(0.0, value)))


def simulate(config: SynthConfig, catalog: Catalog) -> list[SynthParticipant]:
    config.validate(catalog)
    techniques = sorted(config.techniques or catalog.technique_names())
    rng = np.random.default_rng(config.seed)
    low, high = config.entries_per_participant
    participants = []
    for i in range(config.n_participants):
        grips, admc_rc1, admc_rc2 = (round(float(rng.uniform(*SCORE_RANGE)), 3) for _ in range(3))
        division = Division.OPEN if rng.random() < config.open_probability else Division.EXPERT
        noise = float(rng.normal(0.0, config.noise_sd))
        count = planted_count(config, grips, division, noise)
        filler_count = int(rng.integers(low, high + 1))

        texts = []
        for _ in range(count):
            name = techniques[int(rng.integers(len(techniques)))]
            texts.append((name, PERSISTENCE_DETAILS[int(rng.integers(len(PERSISTENCE_DETAILS)))]))
        fillers = [FILLER_ACTIONS[int(rng.integers(len(FILLER_ACTIONS)))] for _ in range(filler_count)]
        order = rng.permutation(count + filler_count)
        max_gap = max(1, min(45, ENGAGEMENT_MINUTES // (count + filler_count + 1)))
        gaps = rng.integers(1, max_gap + 1, size=count + filler_count)

        entries = []
        persistence_techniques = []
        timestamp = BASE_TIME
        line = 1
        for position, (slot, gap) in enumerate(zip(order, gaps)):
            timestamp += timedelta(minutes=int(gap))
            if slot < count:
                name, detail = texts[slot]
                text = f"Established persistence via {name}.\n{detail}"
                persistence_techniques.append((position, name))
            else:
                text = fillers[slot - count]
            height = text.count("\n") + 1
            entries.append(NoteEntry(timestamp=timestamp, text=text, line_span=(line, line + height - 1)))
            line += height

        participant_id = f"p{i + 1:03d}"
        participants.append(
            SynthParticipant(
                participant_id=participant_id,
                division=division,
                grips=grips,
                admc_rc1=admc_rc1,
                admc_rc2=admc_rc2,
                note=OpNote(participant_id=participant_id, entries=entries),
                persistence_techniques=persistence_techniques,
            )
        )
    return participants


def generate(config: SynthConfig, catalog: Catalog, out_dir: Path) -> SynthOutput:
    participants = simulate(config, catalog)
    notes_dir = out_dir / "notes"
    for participant in participants:
        write_atomic(notes_dir / f"{participant.participant_id}{NOTE_SUFFIX}", render_opnote(participant.note))

    psychometrics_path = write_atomic(out_dir / "psychometrics.csv", _psychometrics_csv(participants))
    ground_truth_path = write_atomic(out_dir / "ground_truth.jsonl", _ground_truth_jsonl(participants, catalog))
    logger.info(
        f"Generated {len(participants)} synthetic participants "
        f"({sum(p.persistence_count for p in participants)} persistence actions) in {out_dir.as_posix()}"
    )
    return SynthOutput(
        notes_dir=notes_dir,
        psychometrics_path=psychometrics_path,
        ground_truth_path=ground_truth_path,
        participants=participants,
    )


def read_ground_truth_counts(path: Path) -> dict[str, int]:
    counts: dict[str, int] = defaultdict(int)
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            counts[json.loads(line)["participant_id"]] += 1
    return dict(counts)


def _psychometrics_csv(participants: list[SynthParticipant]) -> str:
    data: Mapping[str, list[str]] = defaultdict(list)
    for participant in participants:
        data["participant_id"].append(participant.participant_id)
        data["division"].append(participant.division.value)
        data["grips"].append(f"{participant.grips:.3f}")
        data["admc_rc1"].append(f"{participant.admc_rc1:.3f}")
        data["admc_rc2"].append(f"{participant.admc_rc2:.3f}")
    return pd.DataFrame(data=data, columns=PSYCHOMETRICS_COLUMNS).to_csv(index=False, lineterminator="\n")


def _ground_truth_jsonl(participants: list[SynthParticipant], catalog: Catalog) -> str:
    name_to_id = {entry.name: entry.technique_id for entry in catalog.entries if not entry.is_subtechnique}
    lines = []
    for participant in participants:
        for entry_index, name in participant.persistence_techniques:
            record = {
                "participant_id": participant.participant_id,
                "entry_index": entry_index,
                "timestamp": participant.note.entries[entry_index].timestamp.isoformat(sep=" "),
                "technique_id": name_to_id[name],
                "technique_name": name,
            }
            lines.append(json.dumps(record, sort_keys=True))
    return "".join(f"{line}\n" for line in lines)
