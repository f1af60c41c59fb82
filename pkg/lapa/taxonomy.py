"""MITRE ATT&CK persistence catalog loading and free-text label normalization."""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from rapidfuzz import process
from rapidfuzz.distance import DamerauLevenshtein

from lapa.errors import CatalogError
from lapa.models.technique import PERSISTENCE_TACTIC, LabelMatch, MatchKind, TechniqueRef
from lapa.utils import normalize_key

logger = logging.getLogger(__name__)

DEFAULT_FUZZY_THRESHOLD = 0.84

KeyToRef = dict[str, TechniqueRef]


@dataclass(frozen=True)
class Catalog:
    entries: tuple[TechniqueRef, ...]
    source_version: str
    exact_index: KeyToRef = field(default_factory=dict)
    alias_index: KeyToRef = field(default_factory=dict)
    excluded_count: int = 0

    def __len__(self) -> int:
        return len(self.entries)

    def technique(self, technique_id: str) -> TechniqueRef:
        for entry in self.entries:
            if entry.technique_id == technique_id and not entry.is_subtechnique:
                return entry
        raise KeyError(technique_id)

    def technique_names(self) -> list[str]:
        return sorted({entry.name for entry in self.entries})

    def labels(self) -> list[str]:
        """Every technique and `Technique: Sub-technique` label, in catalog order."""
        return [entry.label for entry in self.entries]

    @property
    def fuzzy_keys(self) -> KeyToRef:
        """Name and alias keys; identifiers only ever match exactly."""
        keys = {key: ref for key, ref in self.exact_index.items() if not _looks_like_id(key)}
        for key, ref in self.alias_index.items():
            keys.setdefault(key, ref)
        return keys


def build_catalog(
    entries: list[TechniqueRef],
    aliases: dict[str, TechniqueRef],
    source_version: str,
    excluded_count: int = 0,
) -> Catalog:
    seen: set[tuple[str, str]] = set()
    for entry in entries:
        if entry.sort_key in seen:
            raise CatalogError(f"Duplicate catalog entry {entry.sort_key}")
        seen.add(entry.sort_key)

    exact_index: KeyToRef = {}
    for entry in sorted(entries, key=lambda e: e.sort_key):
        keys = [entry.label, entry.subtechnique_id or entry.technique_id]
        if entry.is_subtechnique:
            keys.append(entry.subtechnique_name or "")
        else:
            keys.append(entry.name)
        for key in keys:
            normalized = normalize_key(key)
            if normalized:
                exact_index.setdefault(normalized, entry)

    alias_index: KeyToRef = {}
    for alias, entry in sorted(aliases.items(), key=lambda item: (item[1].sort_key, item[0])):
        normalized = normalize_key(alias)
        if normalized and normalized not in exact_index:
            alias_index.setdefault(normalized, entry)

    return Catalog(
        entries=tuple(sorted(entries, key=lambda e: e.sort_key)),
        source_version=source_version,
        exact_index=exact_index,
        alias_index=alias_index,
        excluded_count=excluded_count,
    )


def load_catalog(path: Path) -> Catalog:
    logger.info(f"Loading persistence catalog from {path.as_posix()}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise CatalogError(f"Malformed catalog {path.as_posix()}: {e.msg}", line=e.lineno, column=e.colno) from e

    if not isinstance(raw, dict) or not isinstance(raw.get("techniques"), list):
        raise CatalogError(f"Catalog {path.as_posix()} must be an object with a 'techniques' array")

    entries: list[TechniqueRef] = []
    aliases: dict[str, TechniqueRef] = {}
    excluded_count = 0
    for position, technique in enumerate(raw["techniques"]):
        _check_entry(technique, f"techniques[{position}]")
        if PERSISTENCE_TACTIC not in _get_tactics(technique):
            excluded_count += 1
            continue

        parent = TechniqueRef(technique_id=technique["id"], name=technique["name"])
        entries.append(parent)
        for alias in technique.get("aliases", []):
            aliases[alias] = parent

        for sub_position, subtechnique in enumerate(technique.get("subtechniques", [])):
            _check_entry(subtechnique, f"techniques[{position}].subtechniques[{sub_position}]", tactic_required=False)
            if not subtechnique["id"].startswith(f"{parent.technique_id}."):
                raise CatalogError(f"Sub-technique {subtechnique['id']} does not belong to {parent.technique_id}")

            ref = TechniqueRef(
                technique_id=parent.technique_id,
                name=parent.name,
                subtechnique_id=subtechnique["id"],
                subtechnique_name=subtechnique["name"],
            )
            entries.append(ref)
            for alias in subtechnique.get("aliases", []):
                aliases[alias] = ref

    if excluded_count:
        logger.info(f"Excluded {excluded_count} non-persistence catalog entries")
    if not entries:
        raise CatalogError(f"Catalog {path.as_posix()} has no persistence entries")

    catalog = build_catalog(entries, aliases, str(raw.get("version", "unknown")), excluded_count)
    logger.info(f"Loaded {len(catalog)} persistence entries (catalog version {catalog.source_version})")
    return catalog


def normalize_label(catalog: Catalog, label: str, threshold: float = DEFAULT_FUZZY_THRESHOLD) -> LabelMatch:
    """Map a free-text technique label onto the catalog: exact, then alias, then fuzzy."""
    if not label or not label.strip():
        raise ValueError("Technique label must be non-empty")

    key = normalize_key(label)
    if key in catalog.exact_index:
        return LabelMatch(label=label, match_kind=MatchKind.EXACT, technique=catalog.exact_index[key], score=1.0)

    if key in catalog.alias_index:
        return LabelMatch(label=label, match_kind=MatchKind.ALIAS, technique=catalog.alias_index[key], score=1.0)

    candidates = catalog.fuzzy_keys
    matches = process.extract(
        key,
        list(candidates),
        scorer=DamerauLevenshtein.normalized_similarity,
        limit=None,
        score_cutoff=threshold,
    )
    if not matches:
        logger.debug(f"Unmapped technique label: {label=}")
        return LabelMatch(label=label, match_kind=MatchKind.UNMAPPED)

    best_key, best_score, _ = min(matches, key=lambda m: (-m[1], candidates[m[0]].sort_key, m[0]))
    return LabelMatch(label=label, match_kind=MatchKind.FUZZY, technique=candidates[best_key], score=float(best_score))


def _check_entry(entry: Any, where: str, tactic_required: bool = True) -> None:
    if not isinstance(entry, dict):
        raise CatalogError(f"{where} must be an object")

    for key in ("id", "name"):
        if not isinstance(entry.get(key), str) or not entry[key].strip():
            raise CatalogError(f"{where} is missing a non-empty '{key}'")

    if tactic_required:
        _get_tactics(entry, where)

    aliases = entry.get("aliases", [])
    if not isinstance(aliases, list) or not all(isinstance(a, str) for a in aliases):
        raise CatalogError(f"{where}.aliases must be a list of strings")

    if not isinstance(entry.get("subtechniques", []), list):
        raise CatalogError(f"{where}.subtechniques must be an array")


def _get_tactics(entry: dict[str, Any], where: str = "technique") -> list[str]:
    tactic = entry.get("tactic")
    if isinstance(tactic, str):
        return [tactic.strip().lower()]
    if isinstance(tactic, list) and tactic and all(isinstance(t, str) for t in tactic):
        return [t.strip().lower() for t in tactic]
    raise CatalogError(f"{where} has an invalid 'tactic' (expected a string or list of strings)")


def _looks_like_id(key: str) -> bool:
    return key.startswith("t") and key[1:].isdigit()
