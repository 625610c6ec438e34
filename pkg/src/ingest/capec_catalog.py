# File: ingest/capec_catalog.py
import logging
import re
from pathlib import Path
from typing import Optional, Tuple

from .cwe_catalog import read_catalog_root
from .errors import SchemaMismatch
from .records import CapecEntry, EntryStatus
from .snapshot import ManifestEntry, Snapshot, SnapshotSource, parse_date, resolve_snapshot

logger = logging.getLogger(__name__)

_ATTACK_ENTRY = re.compile(r"T?(\d{4}(?:\.\d{3})?)")


def normalize_technique_id(entry_id: str) -> Optional[str]:
    """CAPEC stores ATT&CK ids without the leading T ("1566.001")."""
    match = _ATTACK_ENTRY.fullmatch(entry_id.strip())
    return f"T{match.group(1)}" if match else None


def _parse_pattern(element) -> CapecEntry:
    capec_id = f"CAPEC-{element.get('ID')}"
    parents = {
        f"CAPEC-{rel.get('CAPEC_ID')}"
        for rel in element.iterfind("{*}Related_Attack_Patterns/{*}Related_Attack_Pattern")
        if rel.get("Nature") == "ChildOf"
    }

    techniques = set()
    for mapping in element.iterfind("{*}Taxonomy_Mappings/{*}Taxonomy_Mapping"):
        if mapping.get("Taxonomy_Name") != "ATTACK":
            continue
        raw = mapping.findtext("{*}Entry_ID") or ""
        technique = normalize_technique_id(raw)
        if technique:
            techniques.add(technique)
        else:
            logger.warning(f"{capec_id}: ignoring malformed ATT&CK entry '{raw}'")

    weaknesses = {
        f"CWE-{rel.get('CWE_ID')}"
        for rel in element.iterfind("{*}Related_Weaknesses/{*}Related_Weakness")
        if rel.get("CWE_ID")
    }
    severity = element.findtext("{*}Typical_Severity")

    return CapecEntry(
        id=capec_id,
        name=element.get("Name", ""),
        parent_ids=frozenset(parents),
        technique_ids=frozenset(techniques),
        severity=severity.strip() if severity else None,
        status=EntryStatus.DEPRECATED if element.get("Status") == "Deprecated" else EntryStatus.ACTIVE,
        related_cwe_ids=frozenset(weaknesses),
    )


def load_capec_catalog(
    path: Path,
    entry: Optional[ManifestEntry] = None,
) -> Tuple[Tuple[CapecEntry, ...], Snapshot]:
    """Load attack patterns with ChildOf parents and ATT&CK taxonomy mappings."""
    path = Path(path)
    root = read_catalog_root(path, "Attack_Pattern_Catalog")
    try:
        patterns = [_parse_pattern(p) for p in root.iterfind("{*}Attack_Patterns/{*}Attack_Pattern")]
    except ValueError as e:
        raise SchemaMismatch(f"{path.name}: {e}") from e

    patterns.sort(key=lambda p: int(p.id.split("-")[1]))
    logger.info(f"Loaded {len(patterns)} attack patterns from CAPEC catalog {root.get('Version')}")
    snapshot = resolve_snapshot(
        SnapshotSource.CAPEC, [path], entry,
        version_label=root.get("Version", ""),
        retrieval_date=parse_date(root.get("Date")),
    )
    return tuple(patterns), snapshot
