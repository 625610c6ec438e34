# File: analysis/interop.py
"""
Interoperability statistics over the reference graph: how far CVEs reach into
CAPEC and ATT&CK, how CWEs are covered, and how the OWASP categories map.
"""
import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Set, Tuple

from ingest.errors import MissingView1344
from refgraph import (
    EdgeKind,
    NodeKind,
    NodeRef,
    RefGraph,
    active_weaknesses,
    capecs_for_cve,
    techniques_for_cve,
)

from .buckets import CAPECS_PER_CVE, TECHNIQUES_PER_CVE, BucketSpec, Histogram, build_histogram

logger = logging.getLogger(__name__)

DIRECTIONS = ("capec", "attack", "either")


def cve_ids(graph: RefGraph, include_rejected: bool = False) -> List[str]:
    return [
        node.id for node in graph.nodes_of(NodeKind.CVE)
        if include_rejected or not graph.is_rejected(node)
    ]


def cve_capec_histogram(
    graph: RefGraph,
    spec: BucketSpec = CAPECS_PER_CVE,
    include_rejected: bool = False,
    auto_extend: bool = False,
    expand_hierarchy: bool = False,
) -> Histogram:
    sizes = [len(capecs_for_cve(graph, c, expand_hierarchy)) for c in cve_ids(graph, include_rejected)]
    return build_histogram(sizes, spec, graph.snapshot_set, auto_extend)


def cve_attack_histogram(
    graph: RefGraph,
    spec: BucketSpec = TECHNIQUES_PER_CVE,
    include_rejected: bool = False,
    auto_extend: bool = False,
    expand_hierarchy: bool = False,
) -> Histogram:
    sizes = [len(techniques_for_cve(graph, c, expand_hierarchy)) for c in cve_ids(graph, include_rejected)]
    return build_histogram(sizes, spec, graph.snapshot_set, auto_extend)


def _technique_capecs(graph: RefGraph, technique: NodeRef, direction: str) -> Set[NodeRef]:
    found: Set[NodeRef] = set()
    if direction in ("capec", "either"):
        found |= graph.sources(technique, EdgeKind.CAPEC_MAPS_TECHNIQUE)
    if direction in ("attack", "either"):
        found |= graph.targets(technique, EdgeKind.TECHNIQUE_CITES_CAPEC)
    return found


def network_capec_coverage(
    graph: RefGraph,
    network_techniques: Iterable[str],
    direction: str = "capec",
) -> Tuple[int, int]:
    """
    (techniques with at least one CAPEC, distinct CAPECs across them).

    ``direction`` picks the reference side: ``capec`` follows the CAPEC
    catalog's technique mappings, ``attack`` the techniques' own CAPEC
    citations, ``either`` their union. Techniques missing from the graph
    count as unmapped.
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got '{direction}'")
    mapped = 0
    capecs: Set[NodeRef] = set()
    for technique_id in sorted(set(network_techniques)):
        found = _technique_capecs(graph, NodeRef(NodeKind.TECHNIQUE, technique_id), direction)
        if found:
            mapped += 1
            capecs |= found
    return mapped, len(capecs)


@dataclass(frozen=True)
class OwaspCount:
    category: str
    category_name: str
    cwe_count: int
    capec_count: int


def owasp_counts(graph: RefGraph) -> List[OwaspCount]:
    """Per OWASP Top Ten 2021 category: CWEs present in the catalog and the union of their CAPECs."""
    categories = graph.nodes_of(NodeKind.OWASP_CATEGORY)
    if not categories:
        raise MissingView1344("No OWASP Top Ten 2021 mapping (CWE view 1344) in this snapshot set")
    counts = []
    for category in sorted(categories, key=lambda n: int(n.id[1:])):
        cwes = graph.targets(category, EdgeKind.OWASP_HAS_CWE)
        capecs = {c for cwe in cwes for c in graph.targets(cwe, EdgeKind.CWE_HAS_CAPEC)}
        counts.append(OwaspCount(category.id, graph.attribute(category, "name", ""), len(cwes), len(capecs)))
    return counts


def _reachable_techniques(graph: RefGraph, cwe: NodeRef) -> Set[NodeRef]:
    return {
        technique
        for capec in graph.targets(cwe, EdgeKind.CWE_HAS_CAPEC)
        for technique in graph.targets(capec, EdgeKind.CAPEC_MAPS_TECHNIQUE)
    }


def single_technique_cwes(graph: RefGraph) -> Tuple[int, int]:
    """
    (CWEs whose CAPECs reach exactly one technique, how many of those go
    through more than one CAPEC)
    """
    single = 0
    several_capecs = 0
    for cwe in active_weaknesses(graph):
        if len(_reachable_techniques(graph, cwe)) == 1:
            single += 1
            if len(graph.targets(cwe, EdgeKind.CWE_HAS_CAPEC)) > 1:
                several_capecs += 1
    return single, several_capecs


def cve_cwe_usage(graph: RefGraph, include_rejected: bool = False) -> Tuple[int, int]:
    """(distinct CWEs cited by CVEs, how many of them reference a CAPEC)"""
    cited: Set[NodeRef] = set()
    for cve_id in cve_ids(graph, include_rejected):
        cited |= graph.targets(NodeRef(NodeKind.CVE, cve_id), EdgeKind.CVE_HAS_CWE)
    with_capec = sum(1 for cwe in cited if graph.targets(cwe, EdgeKind.CWE_HAS_CAPEC))
    return len(cited), with_capec


@dataclass(frozen=True)
class ReferenceSymmetry:
    family: str
    mutual: int
    forward_only: int
    reverse_only: int


def _pairs(graph: RefGraph, kind: EdgeKind, reverse: bool = False) -> FrozenSet[Tuple[str, str]]:
    return frozenset(
        (target.id, source.id) if reverse else (source.id, target.id)
        for edge_kind, source, target in graph.edges()
        if edge_kind is kind
    )


def reference_symmetry(graph: RefGraph) -> List[ReferenceSymmetry]:
    """
    Compare the two directions of each mutually referencing pair of
    catalogs. ``forward_only`` pairs appear only on the first-named side.
    """
    families = [
        ("CWE-CAPEC", EdgeKind.CWE_HAS_CAPEC, EdgeKind.CAPEC_HAS_CWE),
        ("CAPEC-ATTACK", EdgeKind.CAPEC_MAPS_TECHNIQUE, EdgeKind.TECHNIQUE_CITES_CAPEC),
    ]
    results = []
    for family, forward_kind, reverse_kind in families:
        forward = _pairs(graph, forward_kind)
        reverse = _pairs(graph, reverse_kind, reverse=True)
        results.append(ReferenceSymmetry(
            family,
            mutual=len(forward & reverse),
            forward_only=len(forward - reverse),
            reverse_only=len(reverse - forward),
        ))
    return results


def capec_aggregates(histogram: Histogram) -> Dict[str, float]:
    """Headline shares for the CAPECs-per-CVE buckets."""
    labels = histogram.spec.labels
    return {
        "cves_with_1_to_5_capecs": float(histogram.share(labels[1:3])),
        "cves_with_any_capec": float(histogram.nonzero_share()),
    }


def attack_aggregates(histogram: Histogram) -> Dict[str, float]:
    labels = histogram.spec.labels
    return {
        "cves_with_any_technique": float(histogram.nonzero_share()),
        "cves_with_1_to_10_techniques": float(histogram.share(labels[1:5])),
    }
