# File: refgraph/graph.py
"""
Cross-enumeration reference graph.

Nodes are ``(kind, id)`` pairs; every edge carries an ``EdgeKind`` whose
endpoint kinds are fixed. References to entries that are absent (or
deprecated/revoked) are reported as dangling instead of becoming nodes.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

import networkx as nx

from cpe_core import format_name
from ingest.records import AttackTechnique, CapecEntry, CveEntry, CweEntry, CweKind, OwaspMapping
from ingest.snapshot import Snapshot

logger = logging.getLogger(__name__)


class GraphError(ValueError):
    pass


class CyclicHierarchy(GraphError):
    pass


class UnknownNode(GraphError):
    pass


class EmptyDomain(GraphError):
    pass


class NodeKind(Enum):
    CVE = "CVE"
    CWE = "CWE"
    CAPEC = "CAPEC"
    TECHNIQUE = "TECHNIQUE"
    OWASP_CATEGORY = "OWASP_CATEGORY"
    CPE = "CPE"


class EdgeKind(Enum):
    CVE_HAS_CWE = "CVE_HAS_CWE"
    CWE_HAS_CAPEC = "CWE_HAS_CAPEC"
    CAPEC_MAPS_TECHNIQUE = "CAPEC_MAPS_TECHNIQUE"
    OWASP_HAS_CWE = "OWASP_HAS_CWE"
    CVE_HAS_CPE = "CVE_HAS_CPE"
    PARENT_OF = "PARENT_OF"
    CAPEC_HAS_CWE = "CAPEC_HAS_CWE"
    TECHNIQUE_CITES_CAPEC = "TECHNIQUE_CITES_CAPEC"


# allowed (source kind, target kind) pairs per edge kind
ENDPOINTS: Dict[EdgeKind, Set[Tuple[NodeKind, NodeKind]]] = {
    EdgeKind.CVE_HAS_CWE: {(NodeKind.CVE, NodeKind.CWE)},
    EdgeKind.CWE_HAS_CAPEC: {(NodeKind.CWE, NodeKind.CAPEC)},
    EdgeKind.CAPEC_MAPS_TECHNIQUE: {(NodeKind.CAPEC, NodeKind.TECHNIQUE)},
    EdgeKind.OWASP_HAS_CWE: {(NodeKind.OWASP_CATEGORY, NodeKind.CWE)},
    EdgeKind.CVE_HAS_CPE: {(NodeKind.CVE, NodeKind.CPE)},
    EdgeKind.PARENT_OF: {(NodeKind.CWE, NodeKind.CWE), (NodeKind.CAPEC, NodeKind.CAPEC)},
    EdgeKind.CAPEC_HAS_CWE: {(NodeKind.CAPEC, NodeKind.CWE)},
    EdgeKind.TECHNIQUE_CITES_CAPEC: {(NodeKind.TECHNIQUE, NodeKind.CAPEC)},
}


@dataclass(frozen=True)
class NodeRef:
    kind: NodeKind
    id: str

    def __lt__(self, other):
        return (self.kind.value, self.id) < (other.kind.value, other.id)


@dataclass(frozen=True)
class DanglingReference:
    edge_kind: EdgeKind
    source: NodeRef
    target_id: str


class RefGraph:
    """Frozen view over the built graph plus its provenance and dangling report."""

    def __init__(
        self,
        graph: nx.DiGraph,
        snapshot_set: Sequence[Snapshot] = (),
        dangling: Sequence[DanglingReference] = (),
    ):
        self._graph = nx.freeze(graph)
        self.snapshot_set = tuple(snapshot_set)
        self.dangling = tuple(dangling)

    @property
    def nodes(self) -> FrozenSet[NodeRef]:
        return frozenset(self._graph.nodes)

    def has_node(self, node: NodeRef) -> bool:
        return node in self._graph

    def require(self, kind: NodeKind, node_id: str) -> NodeRef:
        node = NodeRef(kind, node_id)
        if node not in self._graph:
            raise UnknownNode(f"No {kind.value} node '{node_id}' in the graph")
        return node

    def nodes_of(self, kind: NodeKind) -> List[NodeRef]:
        return sorted(n for n in self._graph.nodes if n.kind is kind)

    def attribute(self, node: NodeRef, name: str, default=None):
        return self._graph.nodes[node].get(name, default)

    def targets(self, node: NodeRef, kind: EdgeKind) -> FrozenSet[NodeRef]:
        if node not in self._graph:
            return frozenset()
        return frozenset(t for t, data in self._graph.succ[node].items() if data["kind"] is kind)

    def sources(self, node: NodeRef, kind: EdgeKind) -> FrozenSet[NodeRef]:
        if node not in self._graph:
            return frozenset()
        return frozenset(s for s, data in self._graph.pred[node].items() if data["kind"] is kind)

    def edges(self) -> Iterator[Tuple[EdgeKind, NodeRef, NodeRef]]:
        for source, target, data in self._graph.edges(data=True):
            yield data["kind"], source, target

    def is_rejected(self, cve: NodeRef) -> bool:
        return bool(self.attribute(cve, "rejected", False))

    def __len__(self):
        return self._graph.number_of_nodes()


class _GraphBuilder:
    def __init__(self):
        self.graph = nx.DiGraph()
        self.dangling: List[DanglingReference] = []

    def add_node(self, kind: NodeKind, node_id: str, **attrs) -> NodeRef:
        node = NodeRef(kind, node_id)
        self.graph.add_node(node, **attrs)
        return node

    def add_edge(self, kind: EdgeKind, source: NodeRef, target: NodeRef):
        if (source.kind, target.kind) not in ENDPOINTS[kind]:
            raise GraphError(f"{kind.value} cannot connect {source.kind.value} to {target.kind.value}")
        self.graph.add_edge(source, target, kind=kind)

    def link(self, kind: EdgeKind, source: NodeRef, target_kind: NodeKind, target_ids: Iterable[str]):
        """Add edges to targets that exist; record the rest as dangling."""
        for target_id in sorted(target_ids):
            target = NodeRef(target_kind, target_id)
            if target in self.graph:
                self.add_edge(kind, source, target)
            else:
                self.dangling.append(DanglingReference(kind, source, target_id))


def _check_acyclic(graph: nx.DiGraph):
    hierarchy = graph.edge_subgraph(
        (s, t) for s, t, data in graph.edges(data=True) if data["kind"] is EdgeKind.PARENT_OF
    )
    try:
        cycle = nx.find_cycle(hierarchy)
    except nx.NetworkXNoCycle:
        return
    path = " -> ".join(edge[0].id for edge in cycle)
    raise CyclicHierarchy(f"PARENT_OF cycle: {path}")


def build_graph(
    cves: Iterable[CveEntry] = (),
    cwes: Iterable[CweEntry] = (),
    capecs: Iterable[CapecEntry] = (),
    techniques: Iterable[AttackTechnique] = (),
    owasp: Iterable[OwaspMapping] = (),
    snapshot_set: Sequence[Snapshot] = (),
) -> RefGraph:
    """Materialize every edge kind; deprecated and revoked entries are left out."""
    builder = _GraphBuilder()

    active_cwes = [c for c in cwes if c.is_active]
    active_capecs = [c for c in capecs if c.is_active]
    active_techniques = [t for t in techniques if t.is_active]
    owasp = list(owasp)
    cves = list(cves)

    for cwe in active_cwes:
        builder.add_node(NodeKind.CWE, cwe.id, name=cwe.name, category=cwe.kind is CweKind.CATEGORY)
    for capec in active_capecs:
        builder.add_node(NodeKind.CAPEC, capec.id, name=capec.name)
    for technique in active_techniques:
        builder.add_node(NodeKind.TECHNIQUE, technique.id, name=technique.name)
    for mapping in owasp:
        builder.add_node(NodeKind.OWASP_CATEGORY, mapping.category, name=mapping.category_name)

    for cwe in active_cwes:
        node = NodeRef(NodeKind.CWE, cwe.id)
        builder.link(EdgeKind.CWE_HAS_CAPEC, node, NodeKind.CAPEC, cwe.related_capec_ids)
        for parent_id in sorted(cwe.parent_ids):
            parent = NodeRef(NodeKind.CWE, parent_id)
            if parent in builder.graph:
                builder.add_edge(EdgeKind.PARENT_OF, parent, node)
            else:
                builder.dangling.append(DanglingReference(EdgeKind.PARENT_OF, node, parent_id))

    for capec in active_capecs:
        node = NodeRef(NodeKind.CAPEC, capec.id)
        builder.link(EdgeKind.CAPEC_MAPS_TECHNIQUE, node, NodeKind.TECHNIQUE, capec.technique_ids)
        builder.link(EdgeKind.CAPEC_HAS_CWE, node, NodeKind.CWE, capec.related_cwe_ids)
        for parent_id in sorted(capec.parent_ids):
            parent = NodeRef(NodeKind.CAPEC, parent_id)
            if parent in builder.graph:
                builder.add_edge(EdgeKind.PARENT_OF, parent, node)
            else:
                builder.dangling.append(DanglingReference(EdgeKind.PARENT_OF, node, parent_id))

    for technique in active_techniques:
        node = NodeRef(NodeKind.TECHNIQUE, technique.id)
        builder.link(EdgeKind.TECHNIQUE_CITES_CAPEC, node, NodeKind.CAPEC, technique.capec_ids)

    for mapping in owasp:
        node = NodeRef(NodeKind.OWASP_CATEGORY, mapping.category)
        builder.link(EdgeKind.OWASP_HAS_CWE, node, NodeKind.CWE, mapping.cwe_ids)

    for cve in cves:
        node = builder.add_node(NodeKind.CVE, cve.id, rejected=cve.is_rejected)
        builder.link(EdgeKind.CVE_HAS_CWE, node, NodeKind.CWE, cve.weakness_ids())
        for criterion in sorted({format_name(clause.criterion) for clause in cve.clauses()}):
            if NodeRef(NodeKind.CPE, criterion) not in builder.graph:
                builder.add_node(NodeKind.CPE, criterion)
            builder.add_edge(EdgeKind.CVE_HAS_CPE, node, NodeRef(NodeKind.CPE, criterion))

    _check_acyclic(builder.graph)

    if builder.dangling:
        logger.warning(f"{len(builder.dangling)} dangling cross-references (see the dangling report)")
    logger.info(
        f"Built reference graph with {builder.graph.number_of_nodes()} nodes "
        f"and {builder.graph.number_of_edges()} edges"
    )
    dangling = sorted(builder.dangling, key=lambda d: (d.edge_kind.value, d.source.kind.value, d.source.id, d.target_id))
    return RefGraph(builder.graph, snapshot_set, dangling)


def _cwe_ancestors(graph: RefGraph, cwe: NodeRef) -> Set[NodeRef]:
    seen: Set[NodeRef] = set()
    frontier = [cwe]
    while frontier:
        for parent in graph.sources(frontier.pop(), EdgeKind.PARENT_OF):
            if parent not in seen:
                seen.add(parent)
                frontier.append(parent)
    return seen


def capecs_for_cve(graph: RefGraph, cve_id: str, expand_hierarchy: bool = False) -> FrozenSet[str]:
    """
    CAPECs referenced by the CWEs the CVE cites. With ``expand_hierarchy`` the
    CWEs' ancestors contribute their CAPECs too.
    """
    cve = graph.require(NodeKind.CVE, cve_id)
    cwes = set(graph.targets(cve, EdgeKind.CVE_HAS_CWE))
    if expand_hierarchy:
        for cwe in list(cwes):
            cwes |= _cwe_ancestors(graph, cwe)
    return frozenset(
        capec.id for cwe in cwes for capec in graph.targets(cwe, EdgeKind.CWE_HAS_CAPEC)
    )


def techniques_for_cve(graph: RefGraph, cve_id: str, expand_hierarchy: bool = False) -> FrozenSet[str]:
    return frozenset(
        technique.id
        for capec_id in capecs_for_cve(graph, cve_id, expand_hierarchy)
        for technique in graph.targets(NodeRef(NodeKind.CAPEC, capec_id), EdgeKind.CAPEC_MAPS_TECHNIQUE)
    )


def capecs_for_technique(graph: RefGraph, technique_id: str) -> FrozenSet[str]:
    technique = graph.require(NodeKind.TECHNIQUE, technique_id)
    return frozenset(c.id for c in graph.sources(technique, EdgeKind.CAPEC_MAPS_TECHNIQUE))


def cited_capecs_for_technique(graph: RefGraph, technique_id: str) -> FrozenSet[str]:
    """CAPECs the technique itself cites (the ATT&CK side of the mutual reference)."""
    technique = graph.require(NodeKind.TECHNIQUE, technique_id)
    return frozenset(c.id for c in graph.targets(technique, EdgeKind.TECHNIQUE_CITES_CAPEC))


def active_weaknesses(graph: RefGraph, include_categories: bool = False) -> List[NodeRef]:
    return [
        node for node in graph.nodes_of(NodeKind.CWE)
        if include_categories or not graph.attribute(node, "category", False)
    ]


def cwe_capec_coverage(graph: RefGraph, include_categories: bool = False) -> float:
    weaknesses = active_weaknesses(graph, include_categories)
    if not weaknesses:
        raise EmptyDomain("The graph holds no CWE nodes")
    mapped = sum(1 for cwe in weaknesses if graph.targets(cwe, EdgeKind.CWE_HAS_CAPEC))
    return mapped / len(weaknesses)


def dangling_references(graph: RefGraph) -> Tuple[DanglingReference, ...]:
    return graph.dangling


def export_edge_list(graph: RefGraph, path: Path) -> int:
    """Write one ``kind<TAB>source<TAB>target`` line per edge, sorted; returns the edge count."""
    rows = sorted(
        (kind.value, source.id, target.id) for kind, source, target in graph.edges()
    )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for row in rows:
            f.write("\t".join(row) + "\n")
    return len(rows)
