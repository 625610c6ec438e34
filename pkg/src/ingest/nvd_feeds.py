# File: ingest/nvd_feeds.py
"""
Reader for the NVD JSON 1.1 yearly feed files (``nvdcve-1.1-<year>.json[.gz]``).
"""
import gzip
import json
import logging
import re
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple
from urllib.parse import unquote

from cpe_core import CpeError, CpeName, parse_formatted_string

from .errors import CpeParseError, DuplicateCveId, SchemaMismatch
from .records import (
    ApplicabilityNode,
    CpeMatchClause,
    CveEntry,
    CveStatus,
    InvertedVersionRange,
    Operator,
    VersionBound,
)
from .snapshot import ManifestEntry, Snapshot, SnapshotSource, parse_date, resolve_snapshot

logger = logging.getLogger(__name__)

REJECT_MARKER = "** REJECT **"
FEED_SCHEMA_VERSION = "1.1"

_URI_PREFIX = "cpe:/"
_URI_FIELDS = ("part", "vendor", "product", "version", "update", "edition", "language")
_PACKED_EDITION = ("edition", "sw_edition", "target_sw", "target_hw", "other")
_PERCENT = re.compile(r"%[0-9a-fA-F]{2}")


def _uri_component_to_fs(component: str) -> str:
    """Rewrite one 2.2 URI component in formatted-string syntax."""
    if component == "":
        return "*"
    if component == "-":
        return "-"
    out = []
    i = 0
    while i < len(component):
        chunk = component[i:i + 3]
        if _PERCENT.fullmatch(chunk):
            code = chunk.lower()
            if code == "%01":
                out.append("?")
            elif code == "%02":
                out.append("*")
            else:
                ch = unquote(chunk)
                out.append(ch if ch.isalnum() or ch in "._-" else "\\" + ch)
            i += 3
            continue
        ch = component[i]
        out.append(ch if ch.isalnum() or ch in "._-" else "\\" + ch)
        i += 1
    return "".join(out)


def cpe22_uri_to_name(uri: str) -> CpeName:
    """Convert a legacy ``cpe:/`` URI to a 2.3 name without losing fields."""
    if not uri.lower().startswith(_URI_PREFIX):
        raise CpeError(f"Not a CPE 2.2 URI: '{uri}'")
    components = uri[len(_URI_PREFIX):].split(":")
    if len(components) > len(_URI_FIELDS):
        raise CpeError(f"Too many components in CPE 2.2 URI '{uri}'")
    components += [""] * (len(_URI_FIELDS) - len(components))
    values = dict(zip(_URI_FIELDS, components))

    edition = values.pop("edition")
    if edition.startswith("~"):
        packed = edition[1:].split("~")
        if len(packed) != len(_PACKED_EDITION):
            raise CpeError(f"Malformed packed edition in '{uri}'")
        values.update(zip(_PACKED_EDITION, packed))
    else:
        values["edition"] = edition

    fs_fields = [
        _uri_component_to_fs(values.get(name, ""))
        for name in ("part", "vendor", "product", "version", "update", "edition",
                     "language", "sw_edition", "target_sw", "target_hw", "other")
    ]
    return parse_formatted_string("cpe:2.3:" + ":".join(fs_fields))


def _bound(raw: Dict[str, Any], including: str, excluding: str) -> Optional[VersionBound]:
    if raw.get(including):
        return VersionBound(raw[including], inclusive=True)
    if raw.get(excluding):
        return VersionBound(raw[excluding], inclusive=False)
    return None


class _Unsatisfiable(Exception):
    """A node that can no longer hold once one of its clauses was dropped."""


def _parse_clause(raw: Dict[str, Any], cve_id: str, dropped: List[str]) -> Optional[CpeMatchClause]:
    text = raw.get("cpe23Uri") or raw.get("criteria")
    try:
        if text:
            criterion = parse_formatted_string(text)
        elif raw.get("cpe22Uri"):
            text = raw["cpe22Uri"]
            criterion = cpe22_uri_to_name(text)
        else:
            raise SchemaMismatch(f"{cve_id}: CPE match without a criterion")
    except CpeError as e:
        raise CpeParseError(cve_id, text, str(e)) from e

    start = _bound(raw, "versionStartIncluding", "versionStartExcluding")
    end = _bound(raw, "versionEndIncluding", "versionEndExcluding")
    try:
        return CpeMatchClause(
            criterion=criterion,
            vulnerable=bool(raw.get("vulnerable", True)),
            version_start=start,
            version_end=end,
        )
    except InvertedVersionRange as e:
        logger.warning(f"{cve_id}: dropping clause {text}: {e}")
        dropped.append(f"{text} {start.describe(upper=False)} {end.describe(upper=True)}")
        return None
    except ValueError as e:
        raise SchemaMismatch(f"{cve_id}: {e}") from e


def _parse_node(raw: Dict[str, Any], cve_id: str, dropped: List[str]) -> Optional[ApplicabilityNode]:
    """
    Returns None for a node with nothing in it. Raises _Unsatisfiable when a
    dropped clause leaves the node false: any loss under AND, every
    alternative lost under OR.
    """
    try:
        operator = Operator(str(raw.get("operator", "OR")).upper())
    except ValueError as e:
        raise SchemaMismatch(f"{cve_id}: unknown node operator '{raw.get('operator')}'") from e

    lost = False
    children = []
    for child in raw.get("children", []):
        try:
            node = _parse_node(child, cve_id, dropped)
        except _Unsatisfiable:
            if operator is Operator.AND:
                raise
            lost = True
            continue
        if node is not None:
            children.append(node)
    matches = []
    for m in raw.get("cpe_match", []):
        clause = _parse_clause(m, cve_id, dropped)
        if clause is None:
            if operator is Operator.AND:
                raise _Unsatisfiable(cve_id)
            lost = True
            continue
        matches.append(clause)

    if not children and not matches:
        if lost:
            raise _Unsatisfiable(cve_id)
        logger.debug(f"{cve_id}: dropping empty configuration node")
        return None
    return ApplicabilityNode(operator, tuple(children), tuple(matches))


def _parse_configuration(
    raw: Optional[Dict[str, Any]], cve_id: str, dropped: List[str]
) -> Optional[ApplicabilityNode]:
    if not raw:
        return None
    nodes = []
    for node in raw.get("nodes", []):
        try:
            parsed = _parse_node(node, cve_id, dropped)
        except _Unsatisfiable:
            continue
        if parsed is not None:
            nodes.append(parsed)
    if not nodes:
        return None
    if len(nodes) == 1:
        return nodes[0]
    # top-level nodes of a feed item are alternatives
    return ApplicabilityNode(Operator.OR, children=tuple(nodes))


def parse_cve_item(item: Dict[str, Any]) -> CveEntry:
    try:
        cve = item["cve"]
        cve_id = cve["CVE_data_meta"]["ID"]
    except (KeyError, TypeError) as e:
        raise SchemaMismatch(f"Feed item without CVE id: {e}") from e

    descriptions = [
        d.get("value", "") for d in cve.get("description", {}).get("description_data", [])
        if d.get("lang", "en") == "en"
    ]
    description = descriptions[0] if descriptions else ""
    status = CveStatus.REJECTED if description.startswith(REJECT_MARKER) else CveStatus.PUBLISHED

    cwe_ids = set()
    for problem in cve.get("problemtype", {}).get("problemtype_data", []):
        for desc in problem.get("description", []):
            if desc.get("value"):
                cwe_ids.add(desc["value"])

    references = tuple(
        ref["url"] for ref in cve.get("references", {}).get("reference_data", []) if ref.get("url")
    )

    dropped: List[str] = []
    try:
        configuration = _parse_configuration(item.get("configurations"), cve_id, dropped)
        return CveEntry(
            id=cve_id,
            description=description,
            status=status,
            cwe_ids=frozenset(cwe_ids),
            configuration=configuration,
            references=references,
            dropped_clauses=tuple(dropped),
        )
    except (CpeParseError, SchemaMismatch):
        raise
    except ValueError as e:
        raise SchemaMismatch(str(e)) from e


def read_feed_file(path: Path) -> Dict[str, Any]:
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    try:
        with opener(path, "rt", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as e:
        raise SchemaMismatch(f"Unreadable NVD feed {path}: {e}") from e
    if not isinstance(data, dict) or not isinstance(data.get("CVE_Items"), list):
        raise SchemaMismatch(f"{path} is not an NVD JSON {FEED_SCHEMA_VERSION} feed (no CVE_Items)")
    return data


def _parse_feed_file(path: Path) -> Tuple[List[CveEntry], Optional[str]]:
    data = read_feed_file(path)
    entries = [parse_cve_item(item) for item in data["CVE_Items"]]
    logger.info(f"Parsed {len(entries)} CVE items from {Path(path).name}")
    return entries, data.get("CVE_data_timestamp")


def load_nvd_feeds(
    files: Sequence[Path],
    entry: Optional[ManifestEntry] = None,
    progress_callback: Optional[Callable[[int], None]] = None,
    output_callback: Optional[Callable[[str], None]] = None,
) -> Tuple[Tuple[CveEntry, ...], Snapshot]:
    """
    Parse the feed files one after another and consolidate them into one collection
    sorted by CVE id. Rejected items are kept and flagged.
    """
    files = [Path(f) for f in files]
    consolidated: Dict[str, CveEntry] = {}
    timestamps = []

    for i, path in enumerate(files):
        entries, timestamp = _parse_feed_file(path)
        for cve in entries:
            if cve.id in consolidated:
                raise DuplicateCveId(f"{cve.id} appears more than once (again in {path.name})")
            consolidated[cve.id] = cve
        if timestamp:
            timestamps.append(timestamp)
        if output_callback:
            output_callback(f"{path.name}: {len(entries)} CVE items")
        if progress_callback:
            progress_callback(int((i + 1) / len(files) * 100))

    cves = tuple(consolidated[k] for k in sorted(consolidated))
    rejected = sum(1 for c in cves if c.is_rejected)
    dropped = sum(len(c.dropped_clauses) for c in cves)
    logger.info(f"Loaded {len(cves)} CVE entries ({rejected} rejected) from {len(files)} feed files")
    if dropped:
        logger.warning(f"{dropped} CPE match clauses were dropped for inverted version ranges")

    snapshot = resolve_snapshot(
        SnapshotSource.NVD,
        files,
        entry,
        version_label=FEED_SCHEMA_VERSION,
        retrieval_date=parse_date(max(timestamps)) if timestamps else None,
    )
    return cves, snapshot
