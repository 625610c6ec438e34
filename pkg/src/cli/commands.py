# File: cli/commands.py
"""
Command implementations. Each command loads what it needs from the manifest,
writes its reports into ``config.output_dir`` and returns the written paths
(or summary lines); exit codes are assigned by ``main``.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple

from analysis import (
    TECHNIQUES_PER_CVE,
    TECHNIQUES_PER_CVE_PUBLISHED,
    DataSourceCount,
    MissingSourceError,
    attack_aggregates,
    capec_aggregates,
    cve_attack_histogram,
    cve_capec_histogram,
    cve_cwe_usage,
    data_source_ranking,
    network_capec_coverage,
    network_visible_techniques,
    owasp_counts,
    reference_symmetry,
    single_technique_cwes,
    tactic_coverage,
    techniques_without_data_sources,
)
from analysis.attack_sources import active_techniques
from analysis.interop import DIRECTIONS
from analysis.reports import (
    matches_frame,
    metrics_frame,
    owasp_frame,
    ranking_frame,
    symmetry_rows,
    write_csv,
    write_json,
)
from config import RunConfig
from ingest import (
    ManifestEntry,
    ManifestError,
    SnapshotSource,
    load_attack_bundle,
    load_capec_catalog,
    load_cwe_catalog,
    load_manifest,
    load_nvd_feeds,
    verify_manifest,
)
from ingest.records import AttackTechnique, CapecEntry, CveEntry, CweEntry, CweKind, OwaspMapping
from ingest.snapshot import Snapshot
from refgraph import RefGraph, build_graph, cwe_capec_coverage, export_edge_list
from vulnid import identify_vulnerabilities, load_inventory

logger = logging.getLogger(__name__)

OutputCallback = Optional[Callable[[str], None]]

# parity mode keeps only the seven most common data sources
TABLE3_ROWS = 7
# network techniques with a CAPEC, distinct CAPECs they reference
PUBLISHED_NETWORK_CAPEC_COVERAGE = (48, 22)

NVD, CWE, CAPEC, ATTACK, OWASP_MAP = (
    SnapshotSource.NVD, SnapshotSource.CWE, SnapshotSource.CAPEC, SnapshotSource.ATTACK, SnapshotSource.OWASP_MAP
)


@dataclass
class SourceBundle:
    cves: Tuple[CveEntry, ...] = ()
    cwes: Tuple[CweEntry, ...] = ()
    owasp: Tuple[OwaspMapping, ...] = ()
    capecs: Tuple[CapecEntry, ...] = ()
    techniques: Tuple[AttackTechnique, ...] = ()
    tactics: Tuple[str, ...] = ()
    snapshots: Dict[SnapshotSource, Snapshot] = field(default_factory=dict)

    @property
    def snapshot_set(self) -> List[Snapshot]:
        return [self.snapshots[s] for s in sorted(self.snapshots, key=lambda s: s.value)]

    def has(self, source: SnapshotSource) -> bool:
        return source in self.snapshots

    def graph(self) -> RefGraph:
        return build_graph(self.cves, self.cwes, self.capecs, self.techniques, self.owasp, self.snapshot_set)


class SourceLoader:
    def __init__(self, config: RunConfig, output_callback: OutputCallback = None):
        self.config = config
        self.output_callback = output_callback
        self._manifest: Optional[Dict[SnapshotSource, ManifestEntry]] = None

    @property
    def manifest(self) -> Dict[SnapshotSource, ManifestEntry]:
        if self._manifest is None:
            if not self.config.snapshot_dir.is_dir():
                raise ManifestError(f"Snapshot directory does not exist: {self.config.snapshot_dir}")
            self._manifest = load_manifest(self.config.manifest, self.config.snapshot_dir)
        return self._manifest

    def load(
        self,
        required: Iterable[SnapshotSource],
        optional: Iterable[SnapshotSource] = (),
    ) -> SourceBundle:
        required = set(required)
        missing = sorted(s.value for s in required if s not in self.manifest)
        if missing:
            raise MissingSourceError(f"The manifest lists no {', '.join(missing)} snapshot")
        wanted = required | {s for s in optional if s in self.manifest}

        bundle = SourceBundle()
        if CWE in wanted:
            entry = self.manifest[CWE]
            bundle.cwes, bundle.owasp, bundle.snapshots[CWE] = load_cwe_catalog(entry.paths[0], entry)
        if OWASP_MAP in wanted:
            entry = self.manifest[OWASP_MAP]
            _, bundle.owasp, bundle.snapshots[OWASP_MAP] = load_cwe_catalog(entry.paths[0], entry, strict_owasp=True)
        if CAPEC in wanted:
            entry = self.manifest[CAPEC]
            bundle.capecs, bundle.snapshots[CAPEC] = load_capec_catalog(entry.paths[0], entry)
        if ATTACK in wanted:
            entry = self.manifest[ATTACK]
            bundle.techniques, bundle.tactics, bundle.snapshots[ATTACK] = load_attack_bundle(entry.paths[0], entry)
        if NVD in wanted:
            entry = self.manifest[NVD]
            bundle.cves, bundle.snapshots[NVD] = load_nvd_feeds(
                entry.paths, entry, output_callback=self.output_callback
            )
        return bundle


def _emit(output_callback: OutputCallback, message: str):
    logger.info(message)
    if output_callback:
        output_callback(message)


def cmd_ingest(config: RunConfig, output_callback: OutputCallback = None) -> List[str]:
    """Verify every manifest digest, load each source and summarize its record counts."""
    loader = SourceLoader(config)
    snapshots = verify_manifest(loader.manifest)
    bundle = loader.load(loader.manifest)

    counts = {}
    if bundle.has(NVD):
        rejected = sum(1 for c in bundle.cves if c.is_rejected)
        counts[NVD] = f"{len(bundle.cves)} CVE entries ({rejected} rejected)"
        dropped = sum(len(c.dropped_clauses) for c in bundle.cves)
        if dropped:
            counts[NVD] += f", {dropped} clauses dropped"
    if bundle.has(CWE):
        categories = sum(1 for c in bundle.cwes if c.kind is CweKind.CATEGORY)
        counts[CWE] = (
            f"{len(bundle.cwes) - categories} weaknesses, {categories} categories, "
            f"{len(bundle.owasp)} OWASP categories"
        )
    if bundle.has(OWASP_MAP):
        counts[OWASP_MAP] = f"{len(bundle.owasp)} OWASP categories"
    if bundle.has(CAPEC):
        counts[CAPEC] = f"{len(bundle.capecs)} attack patterns"
    if bundle.has(ATTACK):
        counts[ATTACK] = f"{len(active_techniques(bundle.techniques))} techniques, {len(bundle.tactics)} tactics"

    lines = []
    for snapshot in snapshots:
        line = (
            f"{snapshot.source.value} {snapshot.version_label or '-'} "
            f"sha256:{snapshot.content_digest}: {counts.get(snapshot.source, '')}"
        )
        lines.append(line)
        _emit(output_callback, line)
    return lines


def cmd_identify(config: RunConfig, inventory_file: Path, output_callback: OutputCallback = None) -> List[Path]:
    inventory = load_inventory(inventory_file)
    bundle = SourceLoader(config, output_callback).load([NVD])
    matches = identify_vulnerabilities(
        bundle.cves, inventory, assume_any_version_matches=config.assume_any_version_matches
    )
    payload = {
        "assume_any_version_matches": config.assume_any_version_matches,
        "asset_count": len(inventory),
        "matches": [m.to_dict() for m in matches],
    }
    out = config.output_dir
    written = [
        write_json(out / "identify.json", payload, bundle.snapshot_set),
        write_csv(matches_frame(matches), out / "identify.csv"),
    ]
    _emit(output_callback, f"{len(matches)} CVE matches across {len(inventory)} assets")
    return written


def _ranking_rows(ranking: List[DataSourceCount]) -> List[Dict[str, object]]:
    return [{"data_source": r.data_source, "technique_count": r.technique_count} for r in ranking]


def _analyze_table3(config: RunConfig, bundle: SourceBundle, graph: RefGraph, output_callback: OutputCallback) -> List[Path]:
    ranking = data_source_ranking(bundle.techniques)
    if config.parity_mode:
        ranking = ranking[:TABLE3_ROWS]
    total = len(active_techniques(bundle.techniques))
    payload = {
        "data_sources": _ranking_rows(ranking),
        "technique_count": total,
        "techniques_without_data_sources": techniques_without_data_sources(bundle.techniques),
    }
    for row in ranking[:TABLE3_ROWS]:
        _emit(output_callback, f"{row.data_source}: {row.technique_count}")
    _emit(output_callback, f"Techniques and sub-techniques: {total}")
    out = config.output_dir
    return [
        write_csv(ranking_frame(ranking), out / "table3.csv"),
        write_json(out / "table3.json", payload, bundle.snapshot_set),
    ]


def _capec_coverage_block(graph: RefGraph, technique_ids: FrozenSet[str]) -> Dict[str, Dict[str, int]]:
    block = {}
    for direction in DIRECTIONS:
        mapped, distinct = network_capec_coverage(graph, technique_ids, direction)
        block[direction] = {"techniques_with_capec": mapped, "distinct_capecs": distinct}
    return block


def _coverage_deviation(bundle: SourceBundle, capec_side: Dict[str, int]) -> Dict[str, object]:
    mapped, distinct = PUBLISHED_NETWORK_CAPEC_COVERAGE
    return {
        "capec_catalog_version": bundle.snapshots[CAPEC].version_label,
        "published": {"techniques_with_capec": mapped, "distinct_capecs": distinct},
        "deviation": {
            "techniques_with_capec": capec_side["techniques_with_capec"] - mapped,
            "distinct_capecs": capec_side["distinct_capecs"] - distinct,
        },
    }


def _analyze_netvis(config: RunConfig, bundle: SourceBundle, graph: RefGraph, output_callback: OutputCallback) -> List[Path]:
    technique_ids, tactics = network_visible_techniques(bundle.techniques)
    covered, tactic_total = tactic_coverage(tactics, bundle.tactics)
    total = len(active_techniques(bundle.techniques))
    payload = {
        "network_techniques": len(technique_ids),
        "technique_count": total,
        "tactics_covered": covered,
        "tactic_count": tactic_total,
        "tactics": [t for t in bundle.tactics if t in tactics],
        "missing_tactics": [t for t in bundle.tactics if t not in tactics],
    }
    _emit(output_callback, f"Network-visible techniques: {len(technique_ids)} of {total}")
    _emit(output_callback, f"Tactic coverage: {covered}/{tactic_total}")
    if bundle.has(CAPEC):
        payload["capec_coverage"] = _capec_coverage_block(graph, technique_ids)
        capec_side = payload["capec_coverage"]["capec"]
        _emit(
            output_callback,
            f"Network techniques with a CAPEC: {capec_side['techniques_with_capec']} "
            f"({capec_side['distinct_capecs']} distinct CAPECs)",
        )
        if config.parity_mode:
            payload["published_comparison"] = _coverage_deviation(bundle, capec_side)
    return [write_json(config.output_dir / "netvis.json", payload, bundle.snapshot_set)]


def _histogram_report(config: RunConfig, bundle: SourceBundle, name: str, histogram, aggregates) -> List[Path]:
    payload = dict(histogram.to_dict())
    payload.update({
        "aggregates": aggregates,
        "include_rejected": config.include_rejected,
        "parity_mode": config.parity_mode,
    })
    out = config.output_dir
    return [
        write_csv(histogram.to_frame(), out / f"{name}.csv"),
        write_csv(histogram.to_figure_frame(), out / f"{name}_figure.csv"),
        write_json(out / f"{name}.json", payload, bundle.snapshot_set),
    ]


def _emit_histogram(output_callback: OutputCallback, title: str, histogram):
    parts = ", ".join(f"{label}: {pct}%" for label, pct in histogram.bucket_percentages.items())
    _emit(output_callback, f"{title} (n={histogram.denominator}): {parts}")


def _analyze_fig3(config: RunConfig, bundle: SourceBundle, graph: RefGraph, output_callback: OutputCallback) -> List[Path]:
    histogram = cve_capec_histogram(
        graph,
        include_rejected=config.include_rejected,
        auto_extend=config.auto_extend_buckets,
        expand_hierarchy=config.expand_hierarchy,
    )
    _emit_histogram(output_callback, "CAPECs per CVE", histogram)
    return _histogram_report(config, bundle, "fig3", histogram, capec_aggregates(histogram))


def _analyze_fig4(config: RunConfig, bundle: SourceBundle, graph: RefGraph, output_callback: OutputCallback) -> List[Path]:
    histogram = cve_attack_histogram(
        graph,
        spec=TECHNIQUES_PER_CVE_PUBLISHED if config.parity_mode else TECHNIQUES_PER_CVE,
        include_rejected=config.include_rejected,
        auto_extend=config.auto_extend_buckets,
        expand_hierarchy=config.expand_hierarchy,
    )
    _emit_histogram(output_callback, "ATT&CK techniques per CVE", histogram)
    return _histogram_report(config, bundle, "fig4", histogram, attack_aggregates(histogram))


def _analyze_fig5(config: RunConfig, bundle: SourceBundle, graph: RefGraph, output_callback: OutputCallback) -> List[Path]:
    counts = owasp_counts(graph)
    for c in counts:
        _emit(output_callback, f"{c.category}: {c.cwe_count} CWEs, {c.capec_count} CAPECs")
    payload = {
        "categories": [
            {"category": c.category, "category_name": c.category_name,
             "cwe_count": c.cwe_count, "capec_count": c.capec_count}
            for c in counts
        ],
    }
    frame = owasp_frame(counts)
    out = config.output_dir
    return [
        write_csv(frame, out / "fig5.csv"),
        write_csv(frame[["category", "cwe_count"]], out / "fig5_cwe_figure.csv"),
        write_csv(frame[["category", "capec_count"]], out / "fig5_capec_figure.csv"),
        write_json(out / "fig5.json", payload, bundle.snapshot_set),
    ]


def _analyze_coverage(config: RunConfig, bundle: SourceBundle, graph: RefGraph, output_callback: OutputCallback) -> List[Path]:
    single, several = single_technique_cwes(graph)
    metrics = {
        "cwe_capec_coverage": round(cwe_capec_coverage(graph), 4),
        "single_technique_cwes": single,
        "single_technique_cwes_with_several_capecs": several,
        "dangling_references": len(graph.dangling),
    }
    if bundle.has(NVD):
        cited, with_capec = cve_cwe_usage(graph, config.include_rejected)
        metrics["cwes_cited_by_cves"] = cited
        metrics["cwes_cited_by_cves_with_capec"] = with_capec
    if bundle.has(ATTACK):
        technique_ids, _ = network_visible_techniques(bundle.techniques)
        mapped, distinct = network_capec_coverage(graph, technique_ids)
        metrics["network_techniques_with_capec"] = mapped
        metrics["network_distinct_capecs"] = distinct

    _emit(output_callback, f"CWEs referencing a CAPEC: {metrics['cwe_capec_coverage']:.2%}")
    symmetry = symmetry_rows(reference_symmetry(graph))
    payload = {"metrics": metrics, "reference_symmetry": symmetry}
    out = config.output_dir
    return [
        write_csv(metrics_frame(metrics), out / "coverage.csv"),
        write_json(out / "coverage.json", payload, bundle.snapshot_set),
    ]


# analysis -> (required sources, optional sources, runner)
ANALYSES = {
    "table3": ({ATTACK}, set(), _analyze_table3),
    "netvis": ({ATTACK}, {CAPEC}, _analyze_netvis),
    "fig3": ({NVD, CWE, CAPEC}, set(), _analyze_fig3),
    "fig4": ({NVD, CWE, CAPEC, ATTACK}, set(), _analyze_fig4),
    "fig5": ({CWE, CAPEC}, {OWASP_MAP}, _analyze_fig5),
    "coverage": ({CWE, CAPEC}, {NVD, ATTACK}, _analyze_coverage),
}
ANALYSIS_CHOICES = list(ANALYSES) + ["all"]


def cmd_analyze(config: RunConfig, which: str, output_callback: OutputCallback = None) -> List[Path]:
    if which not in ANALYSIS_CHOICES:
        raise ValueError(f"Unknown analysis '{which}'")
    selected = list(ANALYSES) if which == "all" else [which]
    required = set().union(*(ANALYSES[name][0] for name in selected))
    optional = set().union(*(ANALYSES[name][1] for name in selected))

    bundle = SourceLoader(config, output_callback).load(required, optional)
    graph = bundle.graph()
    written = []
    for name in selected:
        logger.info(f"Running analysis {name}")
        written.extend(ANALYSES[name][2](config, bundle, graph, output_callback))
    return written


def cmd_export_graph(config: RunConfig, output_callback: OutputCallback = None) -> List[Path]:
    """Build the graph from every source in the manifest and write it as a flat edge list."""
    loader = SourceLoader(config, output_callback)
    bundle = loader.load((), optional=loader.manifest)
    graph = bundle.graph()
    out = config.output_dir
    edge_path = out / "refgraph.tsv"
    edge_count = export_edge_list(graph, edge_path)
    dangling = [
        {"edge_kind": d.edge_kind.value, "source": d.source.id, "missing_id": d.target_id}
        for d in graph.dangling
    ]
    dropped = [
        {"cve_id": c.id, "clause": clause} for c in bundle.cves for clause in c.dropped_clauses
    ]
    _emit(output_callback, f"Exported {edge_count} edges, {len(dangling)} dangling references")
    payload = {"dangling": dangling, "dropped_clauses": dropped}
    return [edge_path, write_json(out / "dangling.json", payload, bundle.snapshot_set)]
