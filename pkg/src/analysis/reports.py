# File: analysis/reports.py
"""
Report writers. Every JSON report embeds the snapshot provenance block and is
written with sorted keys and no timestamps, so identical snapshots give
byte-identical files.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import pandas as pd

from ingest.snapshot import Snapshot

from .attack_sources import DataSourceCount
from .interop import OwaspCount, ReferenceSymmetry

logger = logging.getLogger(__name__)


def provenance(snapshots: Iterable[Snapshot]) -> List[Dict[str, Any]]:
    return [s.to_dict() for s in sorted(snapshots, key=lambda s: s.source.value)]


def write_json(path: Path, payload: Dict[str, Any], snapshots: Iterable[Snapshot]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = dict(payload)
    document["provenance"] = provenance(snapshots)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(document, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")
    logger.debug(f"Wrote {path}")
    return path


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n", float_format="%.2f")
    logger.debug(f"Wrote {path} ({len(frame)} rows)")
    return path


def ranking_frame(ranking: Sequence[DataSourceCount]) -> pd.DataFrame:
    return pd.DataFrame(
        [(r.data_source, r.technique_count) for r in ranking],
        columns=["data_source", "technique_count"],
    )


def owasp_frame(counts: Sequence[OwaspCount]) -> pd.DataFrame:
    return pd.DataFrame(
        [(c.category, c.category_name, c.cwe_count, c.capec_count) for c in counts],
        columns=["category", "category_name", "cwe_count", "capec_count"],
    )


def symmetry_rows(results: Sequence[ReferenceSymmetry]) -> List[Dict[str, Any]]:
    return [
        {"family": r.family, "mutual": r.mutual, "forward_only": r.forward_only, "reverse_only": r.reverse_only}
        for r in results
    ]


def metrics_frame(metrics: Dict[str, Any]) -> pd.DataFrame:
    """Flatten a metrics mapping into two columns for the CSV companion of a JSON report."""
    return pd.DataFrame(sorted(metrics.items()), columns=["metric", "value"])


def matches_frame(matches: Sequence[Any]) -> pd.DataFrame:
    """One row per (CVE, asset, matched criterion)."""
    rows = [
        (m.cve_id, m.asset_label, evidence["criterion"])
        for m in matches
        for evidence in m.to_dict()["matched_clauses"]
    ]
    frame = pd.DataFrame(rows, columns=["cve_id", "asset_label", "matched_criterion"])
    return frame.drop_duplicates().reset_index(drop=True)
