# File: ingest/attack_bundle.py
"""
Enterprise ATT&CK STIX 2.x bundle reader. Only techniques, sub-techniques and
tactics are kept; groups, software, mitigations and relationships are dropped.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from .errors import SchemaMismatch, UnknownKillChain
from .records import AttackTechnique
from .snapshot import ManifestEntry, Snapshot, SnapshotSource, parse_date, resolve_snapshot

logger = logging.getLogger(__name__)

KILL_CHAIN = "mitre-attack"


def _external_id(obj: Dict[str, Any], source_name: str) -> List[str]:
    return [
        ref["external_id"]
        for ref in obj.get("external_references", [])
        if ref.get("source_name") == source_name and ref.get("external_id")
    ]


def _read_bundle(path: Path) -> List[Dict[str, Any]]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise SchemaMismatch(f"Unreadable STIX bundle {path}: {e}") from e
    if not isinstance(data, dict) or data.get("type") != "bundle" or not isinstance(data.get("objects"), list):
        raise SchemaMismatch(f"{path} is not a STIX bundle")
    return data["objects"]


def _tactics(objects: List[Dict[str, Any]]) -> Tuple[Tuple[str, ...], set]:
    """Active tactic shortnames in matrix order, plus every declared shortname."""
    by_stix_id = {}
    declared = set()
    for obj in objects:
        if obj.get("type") != "x-mitre-tactic":
            continue
        shortname = obj.get("x_mitre_shortname")
        if not shortname:
            raise SchemaMismatch(f"Tactic {obj.get('id')} has no shortname")
        declared.add(shortname)
        if not obj.get("revoked") and not obj.get("x_mitre_deprecated"):
            by_stix_id[obj["id"]] = shortname

    ordered = []
    for obj in objects:
        if obj.get("type") == "x-mitre-matrix" and not obj.get("revoked"):
            ordered.extend(by_stix_id[ref] for ref in obj.get("tactic_refs", []) if ref in by_stix_id)
    remaining = sorted(set(by_stix_id.values()) - set(ordered))
    return tuple(dict.fromkeys(ordered + remaining)), declared


def _parse_technique(obj: Dict[str, Any], declared_tactics: set) -> Optional[AttackTechnique]:
    ids = _external_id(obj, "mitre-attack")
    if not ids:
        logger.debug(f"Skipping attack-pattern {obj.get('id')} without an ATT&CK id")
        return None
    technique_id = ids[0]

    tactics = set()
    for phase in obj.get("kill_chain_phases", []):
        if phase.get("kill_chain_name") != KILL_CHAIN:
            continue
        name = phase.get("phase_name")
        if name not in declared_tactics:
            raise UnknownKillChain(f"{technique_id} uses undeclared tactic '{name}'")
        tactics.add(name)

    try:
        return AttackTechnique(
            id=technique_id,
            stix_id=obj["id"],
            name=obj.get("name", ""),
            tactics=frozenset(tactics),
            data_sources=frozenset(obj.get("x_mitre_data_sources", [])),
            is_subtechnique=bool(obj.get("x_mitre_is_subtechnique", "." in technique_id)),
            revoked=bool(obj.get("revoked", False)),
            deprecated=bool(obj.get("x_mitre_deprecated", False)),
            capec_ids=frozenset(_external_id(obj, "capec")),
        )
    except ValueError as e:
        raise SchemaMismatch(str(e)) from e


def _bundle_version(objects: List[Dict[str, Any]]) -> Tuple[str, Optional[str]]:
    for obj in objects:
        if obj.get("type") == "x-mitre-collection":
            return str(obj.get("x_mitre_version", "")), obj.get("modified")
    modified = [obj["modified"] for obj in objects if obj.get("modified")]
    return "", max(modified) if modified else None


def load_attack_bundle(
    path: Path,
    entry: Optional[ManifestEntry] = None,
) -> Tuple[Tuple[AttackTechnique, ...], Tuple[str, ...], Snapshot]:
    """
    Map attack-pattern objects to techniques. Revoked and deprecated objects are
    kept with their flags; analyses filter on ``is_active``.
    """
    path = Path(path)
    objects = _read_bundle(path)
    tactics, declared = _tactics(objects)

    techniques: Dict[str, AttackTechnique] = {}
    for obj in objects:
        if obj.get("type") != "attack-pattern":
            continue
        technique = _parse_technique(obj, declared)
        if technique is None:
            continue
        previous = techniques.get(technique.id)
        if previous is not None:
            if previous.is_active and technique.is_active:
                raise SchemaMismatch(f"Technique {technique.id} appears twice in {path.name}")
            if previous.is_active:
                continue
        techniques[technique.id] = technique

    ordered = tuple(techniques[k] for k in sorted(techniques))
    active = sum(1 for t in ordered if t.is_active)
    logger.info(f"Loaded {len(ordered)} ATT&CK techniques ({active} active) and {len(tactics)} tactics")

    version_label, modified = _bundle_version(objects)
    snapshot = resolve_snapshot(
        SnapshotSource.ATTACK, [path], entry,
        version_label=version_label,
        retrieval_date=parse_date(modified),
    )
    return ordered, tactics, snapshot
