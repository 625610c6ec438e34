import json
from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from analysis import (
    CAPECS_PER_CVE,
    NETWORK_SENSORS,
    TECHNIQUES_PER_CVE,
    TECHNIQUES_PER_CVE_PUBLISHED,
    Bucket,
    BucketGap,
    BucketSpec,
    InvalidBucketSpec,
    attack_aggregates,
    build_histogram,
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
from analysis.reports import owasp_frame, provenance, write_csv, write_json
from ingest.errors import MissingView1344
from ingest.records import AttackTechnique, CapecEntry
from refgraph import build_graph


# --- bucket specs --------------------------------------------------------------

def test_preset_labels():
    assert CAPECS_PER_CVE.labels == ["0", "1-2", "3-5", "6-8", "9-15", "16-59"]
    assert TECHNIQUES_PER_CVE.labels == ["0", "1", "2", "3-5", "6-10", ">10"]
    assert TECHNIQUES_PER_CVE.bucket_for(500) == ">10"
    assert CAPECS_PER_CVE.bucket_for(7) == "6-8"
    assert TECHNIQUES_PER_CVE_PUBLISHED.labels[-1] == "more than 10"
    assert TECHNIQUES_PER_CVE_PUBLISHED.bucket_for(11) == "more than 10"
    assert TECHNIQUES_PER_CVE_PUBLISHED.edges() == TECHNIQUES_PER_CVE.edges()


@pytest.mark.parametrize("buckets", [
    (),
    (Bucket("1", 1, 1),),
    (Bucket("0", 0, 0), Bucket("2", 2, 2)),
    (Bucket("0", 0, None), Bucket("1", 1, 1)),
    (Bucket("x", 0, 0), Bucket("x", 1, 1)),
    (Bucket("0", 0, 0), Bucket("1-0", 1, 0)),
])
def test_invalid_bucket_specs(buckets):
    with pytest.raises(InvalidBucketSpec):
        BucketSpec(buckets)


def test_count_above_a_bounded_top_is_a_gap():
    with pytest.raises(BucketGap):
        build_histogram([0, 3, 60], CAPECS_PER_CVE)
    with pytest.raises(BucketGap):
        build_histogram([-1], CAPECS_PER_CVE)


def test_auto_extend_relabels_the_top_bucket():
    histogram = build_histogram([0, 3, 60], CAPECS_PER_CVE, auto_extend=True)
    assert histogram.spec.labels[-1] == "16-60"
    assert histogram.bucket_counts["16-60"] == 1
    # unchanged when every count already fits
    assert build_histogram([59], CAPECS_PER_CVE, auto_extend=True).spec is CAPECS_PER_CVE


def test_histogram_percentages_round_half_up():
    histogram = build_histogram([0] * 799 + [1], CAPECS_PER_CVE)
    assert histogram.denominator == 800
    assert histogram.bucket_percentages["1-2"] == Decimal("0.13")
    assert histogram.bucket_percentages["0"] == Decimal("99.88")
    thirds = build_histogram([0, 1, 4], CAPECS_PER_CVE)
    assert thirds.bucket_percentages["0"] == Decimal("33.33")
    assert thirds.share(["1-2", "3-5"]) == Decimal("66.67")


def test_empty_histogram():
    histogram = build_histogram([], TECHNIQUES_PER_CVE)
    assert histogram.denominator == 0
    assert set(histogram.bucket_counts.values()) == {0}
    assert set(histogram.bucket_percentages.values()) == {Decimal("0.00")}
    assert histogram.nonzero_share() == Decimal("0.00")


def test_share_rejects_unknown_buckets():
    histogram = build_histogram([1], TECHNIQUES_PER_CVE)
    with pytest.raises(KeyError):
        histogram.share(["7"])


@settings(max_examples=500, deadline=None)
@given(st.lists(st.integers(0, 80), max_size=200))
def test_histogram_conserves_items(values):
    histogram = build_histogram(values, TECHNIQUES_PER_CVE)
    assert sum(histogram.bucket_counts.values()) == histogram.denominator == len(values)
    for label in histogram.spec.labels:
        expected = sum(1 for v in values if TECHNIQUES_PER_CVE.bucket_for(v) == label)
        assert histogram.bucket_counts[label] == expected
    if values:
        assert abs(sum(histogram.bucket_percentages.values()) - 100) <= Decimal("0.05")


# --- CVE histograms over the synthetic snapshot ------------------------------------

def test_cve_capec_histogram(mini_graph):
    histogram = cve_capec_histogram(mini_graph)
    assert histogram.denominator == 4
    assert histogram.bucket_counts == {"0": 2, "1-2": 1, "3-5": 1, "6-8": 0, "9-15": 0, "16-59": 0}
    assert capec_aggregates(histogram) == {"cves_with_1_to_5_capecs": 50.0, "cves_with_any_capec": 50.0}
    assert cve_capec_histogram(mini_graph, include_rejected=True).denominator == 5


def test_cve_attack_histogram(mini_graph):
    histogram = cve_attack_histogram(mini_graph)
    assert histogram.bucket_counts == {"0": 2, "1": 1, "2": 1, "3-5": 0, "6-10": 0, ">10": 0}
    assert histogram.bucket_percentages["1"] == Decimal("25.00")
    assert attack_aggregates(histogram) == {"cves_with_any_technique": 50.0, "cves_with_1_to_10_techniques": 50.0}


def test_expanded_hierarchy_moves_cves_up(mini_graph):
    expanded = cve_capec_histogram(mini_graph, expand_hierarchy=True)
    # CVE-2020-0001 gains CWE-20's CAPECs through its parent
    assert expanded.bucket_counts["3-5"] == 2
    assert expanded.bucket_counts["1-2"] == 0


# --- ATT&CK data sources -------------------------------------------------------------

def test_data_source_ranking(mini_sources):
    ranking = data_source_ranking(mini_sources["techniques"])
    assert [(r.data_source, r.technique_count) for r in ranking] == [
        ("File", 3), ("Process", 3), ("Command", 2), ("Network Traffic", 2),
        ("Application Log", 1), ("Module", 1),
    ]
    assert techniques_without_data_sources(mini_sources["techniques"]) == 1


def test_ranking_counts_a_technique_once_per_source():
    technique = AttackTechnique(
        "T1040", "attack-pattern--1", "Network Sniffing", tactics={"discovery"},
        data_sources={"Network Traffic: Network Traffic Flow", "Network Traffic: Network Traffic Content"},
    )
    assert [(r.data_source, r.technique_count) for r in data_source_ranking([technique])] == [("Network Traffic", 1)]
    assert data_source_ranking([]) == []


def test_network_visible_techniques(mini_sources):
    found, tactics = network_visible_techniques(mini_sources["techniques"])
    assert found == {"T1566", "T1566.001"}
    assert tactics == {"initial-access"}
    assert tactic_coverage(tactics, mini_sources["tactics"]) == (1, 3)


_SOURCES = sorted(NETWORK_SENSORS) + ["File: File Creation", "Process: Process Creation"]


@settings(max_examples=300, deadline=None)
@given(
    st.lists(st.sets(st.sampled_from(_SOURCES)), min_size=1, max_size=8),
    st.sets(st.sampled_from(_SOURCES)),
    st.sets(st.sampled_from(_SOURCES)),
)
def test_more_sensors_never_hide_techniques(source_sets, sensors, extra):
    techniques = [
        AttackTechnique(f"T{1100 + i}", f"attack-pattern--{i}", f"t{i}", tactics={"execution"}, data_sources=s)
        for i, s in enumerate(source_sets)
    ]
    small, _ = network_visible_techniques(techniques, sensors)
    large, _ = network_visible_techniques(techniques, sensors | extra)
    assert small <= large


@pytest.mark.parametrize("direction", ["capec", "attack", "either"])
def test_network_capec_coverage_on_the_snapshot(mini_graph, direction):
    assert network_capec_coverage(mini_graph, {"T1566", "T1566.001"}, direction) == (1, 1)


def test_network_capec_coverage_examples():
    techniques = [AttackTechnique(f"T120{i}", f"attack-pattern--{i}", "t", tactics={"execution"}) for i in range(3)]
    shared = CapecEntry("CAPEC-1", "shared", technique_ids={"T1200", "T1201", "T1202"})
    graph = build_graph(capecs=[shared], techniques=techniques)
    assert network_capec_coverage(graph, ["T1200", "T1201", "T1202"]) == (3, 1)
    assert network_capec_coverage(graph, ["T1200", "T1201", "T1202"], "attack") == (0, 0)
    assert network_capec_coverage(build_graph(techniques=techniques), ["T1200"]) == (0, 0)
    with pytest.raises(ValueError):
        network_capec_coverage(graph, ["T1200"], "sideways")


# --- OWASP and cross-catalog statistics ----------------------------------------------

def test_owasp_counts(mini_graph):
    counts = {c.category: (c.cwe_count, c.capec_count) for c in owasp_counts(mini_graph)}
    assert list(counts) == [f"A{i}" for i in range(1, 11)]
    assert counts["A3"] == (2, 4)
    assert counts["A6"] == (1, 0)
    assert counts["A8"] == (1, 1)
    assert counts["A1"] == (0, 0)
    assert counts["A9"] == (0, 0)
    assert counts["A10"] == (0, 0)
    names = owasp_frame(owasp_counts(mini_graph))["category_name"].tolist()
    assert names[2].endswith("A03:2021 - Injection")


def test_owasp_counts_need_the_mapping(mini_sources):
    s = mini_sources
    graph = build_graph(s["cves"], s["cwes"], s["capecs"], s["techniques"])
    with pytest.raises(MissingView1344):
        owasp_counts(graph)


def test_single_technique_cwes(mini_graph):
    # CWE-79 reaches only T1059.007, through two CAPECs
    assert single_technique_cwes(mini_graph) == (1, 1)


def test_cve_cwe_usage(mini_graph):
    assert cve_cwe_usage(mini_graph) == (4, 3)


def test_reference_symmetry(mini_graph):
    results = {r.family: (r.mutual, r.forward_only, r.reverse_only) for r in reference_symmetry(mini_graph)}
    assert results == {"CWE-CAPEC": (3, 2, 0), "CAPEC-ATTACK": (1, 2, 0)}


# --- report writers -----------------------------------------------------------------

def test_json_reports_carry_sorted_provenance(mini_sources, tmp_path):
    snapshots = mini_sources["snapshots"]
    path = write_json(tmp_path / "r.json", {"b": 1, "a": [1, 2]}, reversed(snapshots))
    document = json.loads(path.read_text(encoding="utf-8"))
    assert [p["source"] for p in document["provenance"]] == ["ATTACK", "CAPEC", "CWE", "NVD"]
    assert document["provenance"] == provenance(snapshots)
    again = write_json(tmp_path / "again.json", {"a": [1, 2], "b": 1}, snapshots)
    assert again.read_bytes() == path.read_bytes()


def test_csv_reports_use_two_decimals(tmp_path):
    histogram = build_histogram([0, 1, 4], CAPECS_PER_CVE)
    path = write_csv(histogram.to_frame(), tmp_path / "h.csv")
    lines = path.read_text(encoding="utf-8").split("\n")
    assert lines[0] == "bucket,count,percent"
    assert lines[1] == "0,1,33.33"
    assert "\r" not in path.read_text(encoding="utf-8")
