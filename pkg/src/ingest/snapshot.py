# File: ingest/snapshot.py
"""
Snapshot provenance: which exact dataset file(s) every number came from.

The manifest is a JSON document with one entry per source::

    {"sources": {"ATTACK": {"path": "enterprise-attack.json",
                            "version_label": "10.1",
                            "retrieval_date": "2022-01-15",
                            "digest": "<sha256>"}}}

Sources made of several files (the yearly NVD feeds) use ``"paths"``; their
digest is the SHA-256 of the newline-joined per-file digests in listed order.
"""
import hashlib
import json
import logging
from dataclasses import dataclass
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .errors import DigestMismatch, ManifestError

logger = logging.getLogger(__name__)


class SnapshotSource(Enum):
    NVD = "NVD"
    CWE = "CWE"
    CAPEC = "CAPEC"
    ATTACK = "ATTACK"
    OWASP_MAP = "OWASP_MAP"


@dataclass(frozen=True)
class Snapshot:
    source: SnapshotSource
    version_label: str
    retrieval_date: Optional[date]
    content_digest: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            "source": self.source.value,
            "version_label": self.version_label,
            "retrieval_date": self.retrieval_date.isoformat() if self.retrieval_date else None,
            "content_digest": self.content_digest,
        }


@dataclass(frozen=True)
class ManifestEntry:
    source: SnapshotSource
    paths: Tuple[Path, ...]
    version_label: str
    retrieval_date: Optional[date]
    digest: str
    url: Optional[str] = None

    def snapshot(self) -> Snapshot:
        return Snapshot(self.source, self.version_label, self.retrieval_date, self.digest)


def sha256_file(path: Path, chunk_size: int = 1024 * 1024) -> str:
    hasher = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(chunk_size), b""):
            hasher.update(chunk)
    return hasher.hexdigest()


def digest_files(paths: Sequence[Path]) -> str:
    """Digest of one file, or the combined digest of several."""
    paths = list(paths)
    if len(paths) == 1:
        return sha256_file(paths[0])
    joined = "\n".join(sha256_file(p) for p in paths)
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()


def parse_date(text: Optional[str]) -> Optional[date]:
    """Accepts ISO dates and ISO timestamps; returns None when absent or unreadable."""
    if not text:
        return None
    try:
        return date.fromisoformat(str(text)[:10])
    except ValueError:
        logger.warning(f"Unreadable snapshot date '{text}'")
        return None


def load_manifest(manifest_path: Path, snapshot_dir: Optional[Path] = None) -> Dict[SnapshotSource, ManifestEntry]:
    """Read the manifest; relative paths resolve against ``snapshot_dir`` (default: the manifest's folder)."""
    manifest_path = Path(manifest_path)
    base = Path(snapshot_dir) if snapshot_dir else manifest_path.parent
    try:
        with open(manifest_path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except FileNotFoundError as e:
        raise ManifestError(f"Manifest not found: {manifest_path}") from e
    except json.JSONDecodeError as e:
        raise ManifestError(f"Manifest is not valid JSON: {manifest_path}: {e}") from e

    sources = raw.get("sources") if isinstance(raw, dict) else None
    if not sources:
        raise ManifestError(f"Manifest lists no sources: {manifest_path}")

    entries = {}
    for key, item in sources.items():
        try:
            source = SnapshotSource(key)
        except ValueError as e:
            raise ManifestError(f"Unknown manifest source '{key}'") from e
        if "paths" in item:
            rel_paths = item["paths"]
        elif "path" in item:
            rel_paths = [item["path"]]
        else:
            raise ManifestError(f"Manifest entry {key} has no path")
        if "digest" not in item:
            raise ManifestError(f"Manifest entry {key} has no digest")
        entries[source] = ManifestEntry(
            source=source,
            paths=tuple(base / p for p in rel_paths),
            version_label=str(item.get("version_label", "")),
            retrieval_date=parse_date(item.get("retrieval_date")),
            digest=item["digest"],
            url=item.get("url"),
        )
    return entries


def verify_entry(entry: ManifestEntry) -> Snapshot:
    missing = [str(p) for p in entry.paths if not p.exists()]
    if missing:
        raise ManifestError(f"{entry.source.value} snapshot files missing: {', '.join(missing)}")
    actual = digest_files(entry.paths)
    if actual != entry.digest:
        raise DigestMismatch(entry.source.value, entry.digest, actual)
    return entry.snapshot()


def verify_manifest(manifest: Dict[SnapshotSource, ManifestEntry]) -> List[Snapshot]:
    snapshots = []
    for source in sorted(manifest, key=lambda s: s.value):
        snapshot = verify_entry(manifest[source])
        logger.info(f"Verified {source.value} snapshot {snapshot.version_label} ({snapshot.content_digest[:12]})")
        snapshots.append(snapshot)
    return snapshots


def resolve_snapshot(
    source: SnapshotSource,
    paths: Sequence[Path],
    entry: Optional[ManifestEntry],
    version_label: str,
    retrieval_date: Optional[date],
) -> Snapshot:
    """
    Snapshot for freshly loaded files: the manifest's metadata when an entry is
    given (after checking the digest), otherwise what the content declares.
    """
    if entry is not None:
        actual = digest_files(paths)
        if actual != entry.digest:
            raise DigestMismatch(source.value, entry.digest, actual)
        return entry.snapshot()
    return Snapshot(source, version_label, retrieval_date, digest_files(paths) if paths else "")
