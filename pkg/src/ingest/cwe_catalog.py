# File: ingest/cwe_catalog.py
"""
CWE 4.x XML catalog reader: weaknesses, categories and the OWASP Top Ten 2021
view (CWE-1344).
"""
import logging
import re
from pathlib import Path
from typing import Dict, Optional, Tuple

from lxml import etree

from .errors import MissingView1344, SchemaMismatch
from .records import CweEntry, CweKind, EntryStatus, OwaspMapping, OWASP_2021_CATEGORIES
from .snapshot import ManifestEntry, Snapshot, SnapshotSource, parse_date, resolve_snapshot

logger = logging.getLogger(__name__)

OWASP_VIEW_ID = "1344"
RESEARCH_VIEW_ID = "1000"

_OWASP_LABEL = re.compile(r"\bA(\d{2}):2021\b")


def _local_name(element) -> str:
    return etree.QName(element).localname


def _status(element) -> EntryStatus:
    return EntryStatus.DEPRECATED if element.get("Status") == "Deprecated" else EntryStatus.ACTIVE


def _parse_weakness(element, hierarchy_view: str) -> CweEntry:
    cwe_id = f"CWE-{element.get('ID')}"
    parents = {
        f"CWE-{rel.get('CWE_ID')}"
        for rel in element.iterfind("{*}Related_Weaknesses/{*}Related_Weakness")
        if rel.get("Nature") == "ChildOf" and rel.get("View_ID") == hierarchy_view
    }
    capecs = {
        f"CAPEC-{rel.get('CAPEC_ID')}"
        for rel in element.iterfind("{*}Related_Attack_Patterns/{*}Related_Attack_Pattern")
        if rel.get("CAPEC_ID")
    }
    return CweEntry(
        id=cwe_id,
        name=element.get("Name", ""),
        parent_ids=frozenset(parents),
        related_capec_ids=frozenset(capecs),
        status=_status(element),
        kind=CweKind.WEAKNESS,
    )


def _parse_category(element) -> CweEntry:
    return CweEntry(
        id=f"CWE-{element.get('ID')}",
        name=element.get("Name", ""),
        status=_status(element),
        kind=CweKind.CATEGORY,
    )


def _owasp_mappings(root, categories: Dict[str, object]) -> Tuple[OwaspMapping, ...]:
    view = root.find(f"{{*}}Views/{{*}}View[@ID='{OWASP_VIEW_ID}']")
    if view is None:
        raise MissingView1344(f"CWE catalog has no view CWE-{OWASP_VIEW_ID}")

    mappings = {}
    for member in view.iterfind("{*}Members/{*}Has_Member"):
        category = categories.get(member.get("CWE_ID"))
        if category is None:
            logger.warning(f"View CWE-{OWASP_VIEW_ID} lists unknown category CWE-{member.get('CWE_ID')}")
            continue
        name = category.get("Name", "")
        label = _OWASP_LABEL.search(name)
        if not label:
            raise SchemaMismatch(f"Cannot read the OWASP label of CWE-{category.get('ID')} '{name}'")
        code = f"A{int(label.group(1))}"
        cwe_ids = {
            f"CWE-{rel.get('CWE_ID')}"
            for rel in category.iterfind("{*}Relationships/{*}Has_Member")
            if rel.get("View_ID") == OWASP_VIEW_ID
        }
        mappings[code] = OwaspMapping(code, name, frozenset(cwe_ids))

    missing = [c for c in OWASP_2021_CATEGORIES if c not in mappings]
    if missing:
        raise SchemaMismatch(f"View CWE-{OWASP_VIEW_ID} is missing categories {missing}")
    return tuple(mappings[c] for c in OWASP_2021_CATEGORIES)


def read_catalog_root(path: Path, expected_root: str):
    try:
        root = etree.parse(str(path)).getroot()
    except (OSError, etree.XMLSyntaxError) as e:
        raise SchemaMismatch(f"Unreadable XML catalog {path}: {e}") from e
    if _local_name(root) != expected_root:
        raise SchemaMismatch(f"{path} is not a {expected_root} document (root is {_local_name(root)})")
    return root


def load_cwe_catalog(
    path: Path,
    entry: Optional[ManifestEntry] = None,
    hierarchy_view: str = RESEARCH_VIEW_ID,
    strict_owasp: bool = False,
) -> Tuple[Tuple[CweEntry, ...], Tuple[OwaspMapping, ...], Snapshot]:
    """
    Load weaknesses (ChildOf parents within ``hierarchy_view`` and related
    attack patterns), categories, and the OWASP Top Ten 2021 mapping.

    A catalog without view 1344 still loads with an empty mapping unless
    ``strict_owasp`` is set.
    """
    path = Path(path)
    root = read_catalog_root(path, "Weakness_Catalog")

    try:
        weaknesses = [_parse_weakness(w, hierarchy_view) for w in root.iterfind("{*}Weaknesses/{*}Weakness")]
        category_elements = {c.get("ID"): c for c in root.iterfind("{*}Categories/{*}Category")}
        categories = [_parse_category(c) for c in category_elements.values()]
    except ValueError as e:
        raise SchemaMismatch(f"{path.name}: {e}") from e

    try:
        owasp = _owasp_mappings(root, category_elements)
    except MissingView1344:
        if strict_owasp:
            raise
        logger.warning(f"{path.name} has no OWASP Top Ten 2021 view; OWASP counts unavailable")
        owasp = ()

    entries = tuple(sorted(weaknesses + categories, key=lambda e: int(e.id.split("-")[1])))
    logger.info(
        f"Loaded {len(weaknesses)} weaknesses and {len(categories)} categories "
        f"from CWE catalog {root.get('Version')}"
    )
    snapshot = resolve_snapshot(
        SnapshotSource.CWE, [path], entry,
        version_label=root.get("Version", ""),
        retrieval_date=parse_date(root.get("Date")),
    )
    return entries, owasp, snapshot
