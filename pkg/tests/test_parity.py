"""
Published-figure checks against real pinned snapshots. Skipped unless
ENUMGRAPH_SNAPSHOT_DIR points at a directory with a manifest for ATT&CK v10.1
and the January 2022 NVD/CWE/CAPEC catalogs.
"""
import json
import os

import pytest

from cli import cmd_analyze, cmd_identify
from config import SNAPSHOT_DIR_ENV, RunConfig
from cpe_core import parse_formatted_string
from ingest import CpeMatchClause, VersionBound
from vulnid import evaluate_clause

pytestmark = pytest.mark.skipif(
    not os.environ.get(SNAPSHOT_DIR_ENV), reason=f"{SNAPSHOT_DIR_ENV} is not set"
)

TABLE3 = [
    ("Command", 256), ("Process", 253), ("File", 192), ("Network Traffic", 131),
    ("Windows Registry", 69), ("Application Log", 55), ("Module", 50),
]
FIG3 = [13.96, 13.86, 16.28, 24.23, 15.75, 15.91]
FIG4 = [73.18, 3.21, 2.04, 10.26, 3.31, 8.00]
FIG5 = {
    "A1": (34, 141), "A2": (29, 30), "A3": (32, 171), "A4": (40, 85), "A5": (20, 15),
    "A6": (3, 0), "A7": (22, 99), "A8": (10, 39), "A9": (4, 4), "A10": (1, 1),
}
# percentage points per bucket on a nearest-dated substitute snapshot
HISTOGRAM_TOLERANCE = 3.0


@pytest.fixture(scope="module")
def parity_reports(tmp_path_factory):
    out = tmp_path_factory.mktemp("parity")
    config = RunConfig.resolve(output_dir=str(out), parity_mode=True)
    cmd_analyze(config, "all")

    def read(name):
        with open(out / name, "r", encoding="utf-8") as f:
            return json.load(f)

    return read


def test_table3(parity_reports):
    report = parity_reports("table3.json")
    rows = [(r["data_source"], r["technique_count"]) for r in report["data_sources"]]
    assert rows == TABLE3
    assert report["technique_count"] == 707


def test_network_visibility(parity_reports):
    report = parity_reports("netvis.json")
    assert report["network_techniques"] == 131
    assert (report["tactics_covered"], report["tactic_count"]) == (13, 14)
    capec_side = report["capec_coverage"]["capec"]
    assert capec_side["techniques_with_capec"] == pytest.approx(48, abs=2)
    assert capec_side["distinct_capecs"] == pytest.approx(22, abs=2)


def test_cves_per_capec_bucket(parity_reports):
    report = parity_reports("fig3.json")
    assert [b["bucket"] for b in report["buckets"]] == ["0", "1-2", "3-5", "6-8", "9-15", "16-59"]
    percents = [b["percent"] for b in report["buckets"]]
    assert percents == pytest.approx(FIG3, abs=HISTOGRAM_TOLERANCE)


def test_cves_per_technique_bucket(parity_reports):
    report = parity_reports("fig4.json")
    percents = [b["percent"] for b in report["buckets"]]
    assert percents == pytest.approx(FIG4, abs=HISTOGRAM_TOLERANCE)
    assert report["aggregates"]["cves_with_any_technique"] == pytest.approx(26.82, abs=HISTOGRAM_TOLERANCE)


def test_owasp_categories(parity_reports):
    report = parity_reports("fig5.json")
    counts = {c["category"]: (c["cwe_count"], c["capec_count"]) for c in report["categories"]}
    assert list(counts) == list(FIG5)
    for category, (cwes, capecs) in FIG5.items():
        assert counts[category][0] == pytest.approx(cwes, rel=0.10, abs=1), category
        assert counts[category][1] == pytest.approx(capecs, rel=0.10, abs=1), category


def test_cwe_coverage(parity_reports):
    assert parity_reports("coverage.json")["metrics"]["cwe_capec_coverage"] == pytest.approx(0.25, abs=0.05)


def _bounds(version_range):
    """Inverse of CpeMatchClause.describe_range: ">=2.0.1 <2.15.0"."""
    start = end = None
    for token in version_range.split():
        operator = token[:2] if token[1] == "=" else token[:1]
        bound = VersionBound(token[len(operator):], inclusive=operator.endswith("="))
        if operator.startswith(">"):
            start = bound
        else:
            end = bound
    return start, end


def test_log4j_rc1_inventory_finds_log4shell(tmp_path):
    inventory = tmp_path / "inventory.tsv"
    inventory.write_text("host1\tcpe:2.3:a:apache:log4j:2.0:rc1:*:*:*:*:*:*\n", encoding="utf-8")
    out = tmp_path / "out"
    cmd_identify(RunConfig.resolve(output_dir=str(out), parity_mode=True), inventory)

    with open(out / "identify.json", "r", encoding="utf-8") as f:
        report = json.load(f)
    found = {m["cve_id"]: m for m in report["matches"]}
    assert "CVE-2021-44228" in found
    match = found["CVE-2021-44228"]
    assert match["asset_label"] == "host1"
    assert match["matched_clauses"]
    for evidence in match["matched_clauses"]:
        start, end = _bounds(evidence["version_range"])
        clause = CpeMatchClause(parse_formatted_string(evidence["criterion"]), True, start, end)
        assert evaluate_clause(clause, parse_formatted_string(evidence["name"])), evidence
