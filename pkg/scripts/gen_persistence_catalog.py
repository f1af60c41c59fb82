"""Generate the bundled persistence catalog from the MITRE ATT&CK enterprise STIX bundle.

Usage: python scripts/gen_persistence_catalog.py [BUNDLE_PATH_OR_URL] > lapa/data/attack_persistence.json

Aliases are curated by hand; existing ones are carried over from the current catalog.
"""
import json
import sys
from collections import defaultdict
from pathlib import Path

import requests

BUNDLE_URL = "https://raw.githubusercontent.com/mitre/cti/ATT&CK-v14.1/enterprise-attack/enterprise-attack.json"
CURRENT_CATALOG = Path(__file__).parents[1] / "lapa" / "data" / "attack_persistence.json"


def load_bundle(source: str) -> dict:
    if source.startswith("http"):
        response = requests.get(source, timeout=60)
        response.raise_for_status()
        return response.json()
    return json.loads(Path(source).read_text(encoding="utf-8"))


def attack_id(obj: dict) -> str | None:
    for reference in obj.get("external_references", []):
        if reference.get("source_name") == "mitre-attack":
            return reference.get("external_id")
    return None


def current_aliases() -> dict[str, list[str]]:
    if not CURRENT_CATALOG.is_file():
        return {}
    aliases = {}
    for technique in json.loads(CURRENT_CATALOG.read_text(encoding="utf-8"))["techniques"]:
        for item in [technique, *technique.get("subtechniques", [])]:
            if item.get("aliases"):
                aliases[item["id"]] = item["aliases"]
    return aliases


def main(source: str) -> None:
    bundle = load_bundle(source)
    techniques = {}
    subtechniques = defaultdict(list)
    for obj in bundle["objects"]:
        if obj.get("type") != "attack-pattern" or obj.get("revoked") or obj.get("x_mitre_deprecated"):
            continue
        tactics = sorted(
            phase["phase_name"]
            for phase in obj.get("kill_chain_phases", [])
            if phase.get("kill_chain_name") == "mitre-attack"
        )
        if "persistence" not in tactics:
            continue
        technique_id = attack_id(obj)
        if technique_id is None:
            continue
        if obj.get("x_mitre_is_subtechnique"):
            subtechniques[technique_id.split(".")[0]].append({"id": technique_id, "name": obj["name"]})
        else:
            techniques[technique_id] = {"id": technique_id, "name": obj["name"], "tactic": tactics}

    aliases = current_aliases()
    out = []
    for technique_id in sorted(techniques):
        technique = techniques[technique_id]
        if technique_id in aliases:
            technique["aliases"] = aliases[technique_id]
        subs = sorted(subtechniques.get(technique_id, []), key=lambda s: s["id"])
        for sub in subs:
            if sub["id"] in aliases:
                sub["aliases"] = aliases[sub["id"]]
        if subs:
            technique["subtechniques"] = subs
        out.append(technique)

    version = next(
        (o.get("x_mitre_version") for o in bundle["objects"] if o.get("type") == "x-mitre-collection"), "unknown"
    )
    print(json.dumps({"version": f"enterprise-attack-{version}-persistence", "techniques": out}, indent=2))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else BUNDLE_URL)
