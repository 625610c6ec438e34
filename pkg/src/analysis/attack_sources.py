# File: analysis/attack_sources.py
"""ATT&CK data-source statistics: the most common sources and network visibility."""
import logging
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Sequence, Tuple

import pandas as pd

from ingest.records import AttackTechnique

logger = logging.getLogger(__name__)

NETWORK_SENSORS = frozenset({
    "Network Traffic: Network Connection Creation",
    "Network Traffic: Network Traffic Content",
    "Network Traffic: Network Traffic Flow",
})


@dataclass(frozen=True)
class DataSourceCount:
    data_source: str
    technique_count: int


def source_name(data_source: str) -> str:
    """'Network Traffic: Network Traffic Flow' -> 'Network Traffic'"""
    return data_source.split(":", 1)[0].strip()


def active_techniques(techniques: Iterable[AttackTechnique]) -> List[AttackTechnique]:
    return [t for t in techniques if t.is_active]


def data_source_ranking(techniques: Iterable[AttackTechnique]) -> List[DataSourceCount]:
    """
    Count techniques (and sub-techniques) per data source. A technique that
    lists several components of one source counts once for it. Sorted by
    count, descending, then by name.
    """
    rows = [
        (t.id, source_name(ds))
        for t in active_techniques(techniques)
        for ds in t.data_sources
    ]
    if not rows:
        return []
    frame = pd.DataFrame(rows, columns=["technique", "data_source"]).drop_duplicates()
    counts = (
        frame.groupby("data_source").size().rename("technique_count").reset_index()
        .sort_values(["technique_count", "data_source"], ascending=[False, True])
    )
    return [
        DataSourceCount(row.data_source, int(row.technique_count))
        for row in counts.itertuples(index=False)
    ]


def techniques_without_data_sources(techniques: Iterable[AttackTechnique]) -> int:
    return sum(1 for t in active_techniques(techniques) if not t.data_sources)


def network_visible_techniques(
    techniques: Iterable[AttackTechnique],
    sensors: Iterable[str] = NETWORK_SENSORS,
) -> Tuple[FrozenSet[str], FrozenSet[str]]:
    """Techniques with at least one of the exact ``sensors`` strings, and the union of their tactics."""
    sensors = frozenset(sensors)
    visible = [t for t in active_techniques(techniques) if t.data_sources & sensors]
    tactics = frozenset(tactic for t in visible for tactic in t.tactics)
    logger.debug(f"{len(visible)} techniques visible through {len(sensors)} sensor strings")
    return frozenset(t.id for t in visible), tactics


def tactic_coverage(found: Iterable[str], all_tactics: Sequence[str]) -> Tuple[int, int]:
    """(tactics covered, tactics in the matrix)"""
    declared = set(all_tactics)
    return len(declared & set(found)), len(declared)
