from .graph import (
    CyclicHierarchy,
    DanglingReference,
    EdgeKind,
    EmptyDomain,
    GraphError,
    NodeKind,
    NodeRef,
    RefGraph,
    UnknownNode,
    active_weaknesses,
    build_graph,
    capecs_for_cve,
    capecs_for_technique,
    cited_capecs_for_technique,
    cwe_capec_coverage,
    dangling_references,
    export_edge_list,
    techniques_for_cve,
)
