import gzip
import json
import os
import sys

import pytest

# Add the src directory to the Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', 'src')))

from ingest.snapshot import digest_files  # noqa: E402

LOG4J_EXACT = "cpe:2.3:a:apache:log4j:2.0:rc1:*:*:*:*:*:*"
LOG4J_ANY = "cpe:2.3:a:apache:log4j:*:*:*:*:*:*:*:*"
WEBAPP = "cpe:2.3:a:example:webapp:1.0:*:*:*:*:*:*:*"
WINDOWS = "cpe:2.3:o:microsoft:windows_10:-:*:*:*:*:*:*:*"


def cpe_match(criteria, vulnerable=True, **bounds):
    match = {"vulnerable": vulnerable, "cpe23Uri": criteria, "cpe_name": []}
    match.update(bounds)
    return match


def cve_item(cve_id, cwes=(), nodes=(), description="Synthetic entry"):
    return {
        "cve": {
            "data_type": "CVE",
            "CVE_data_meta": {"ID": cve_id, "ASSIGNER": "cve@mitre.org"},
            "problemtype": {"problemtype_data": [{"description": [
                {"lang": "en", "value": cwe} for cwe in cwes
            ]}]},
            "references": {"reference_data": [{"url": f"https://example.org/{cve_id}"}]},
            "description": {"description_data": [{"lang": "en", "value": description}]},
        },
        "configurations": {"CVE_data_version": "4.0", "nodes": list(nodes)},
    }


def feed(items, timestamp="2022-01-15T03:00Z"):
    return {
        "CVE_data_type": "CVE",
        "CVE_data_format": "MITRE",
        "CVE_data_version": "4.0",
        "CVE_data_numberOfCVEs": str(len(items)),
        "CVE_data_timestamp": timestamp,
        "CVE_Items": list(items),
    }


FEED_2021 = feed([
    cve_item(
        "CVE-2021-44228",
        cwes=["CWE-502", "CWE-20", "CWE-400"],
        nodes=[{"operator": "OR", "children": [], "cpe_match": [
            cpe_match(LOG4J_EXACT),
            cpe_match(LOG4J_ANY, versionStartIncluding="2.0.1", versionEndExcluding="2.15.0"),
        ]}],
        description="Apache Log4j2 JNDI features do not protect against attacker controlled LDAP endpoints.",
    ),
])

FEED_2020 = feed([
    cve_item(
        "CVE-2020-0001",
        cwes=["CWE-79"],
        nodes=[{"operator": "AND", "children": [
            {"operator": "OR", "children": [], "cpe_match": [cpe_match(WEBAPP)]},
            {"operator": "OR", "children": [], "cpe_match": [cpe_match(WINDOWS, vulnerable=False)]},
        ], "cpe_match": []}],
    ),
    cve_item("CVE-2020-0002", cwes=["NVD-CWE-noinfo"]),
    cve_item("CVE-2019-0003", cwes=["CWE-79"], description="** REJECT ** DO NOT USE THIS CANDIDATE NUMBER."),
    cve_item(
        "CVE-2019-0004",
        cwes=["CWE-913"],
        nodes=[{"operator": "OR", "children": [], "cpe_match": [
            {"vulnerable": True, "cpe22Uri": "cpe:/a:example:tool:2.0"},
        ]}],
    ),
])


def _weakness(cwe_id, name, parents=(), capecs=(), status="Draft", extra_parents=()):
    related = "".join(
        f'<Related_Weakness Nature="ChildOf" CWE_ID="{p}" View_ID="1000" Ordinal="Primary"/>' for p in parents
    ) + "".join(
        f'<Related_Weakness Nature="ChildOf" CWE_ID="{p}" View_ID="699"/>' for p in extra_parents
    )
    patterns = "".join(f'<Related_Attack_Pattern CAPEC_ID="{c}"/>' for c in capecs)
    return (
        f'<Weakness ID="{cwe_id}" Name="{name}" Abstraction="Base" Structure="Simple" Status="{status}">'
        f"<Description>{name}</Description>"
        f"<Related_Weaknesses>{related}</Related_Weaknesses>"
        f"<Related_Attack_Patterns>{patterns}</Related_Attack_Patterns>"
        f"</Weakness>"
    )


OWASP_CATEGORY_NAMES = [
    "Broken Access Control", "Cryptographic Failures", "Injection", "Insecure Design",
    "Security Misconfiguration", "Vulnerable and Outdated Components",
    "Identification and Authentication Failures", "Software and Data Integrity Failures",
    "Security Logging and Monitoring Failures", "Server-Side Request Forgery (SSRF)",
]
OWASP_MEMBERS = {1: ["200"], 3: ["79", "20"], 6: ["937"], 8: ["502"], 9: ["778"]}


def _owasp_category(number):
    members = "".join(
        f'<Has_Member CWE_ID="{m}" View_ID="1344"/>' for m in OWASP_MEMBERS.get(number, [])
    )
    name = f"OWASP Top Ten 2021 Category A{number:02d}:2021 - {OWASP_CATEGORY_NAMES[number - 1]}"
    return (
        f'<Category ID="{1344 + number}" Name="{name}" Status="Incomplete">'
        f"<Summary>{name}</Summary><Relationships>{members}</Relationships></Category>"
    )


def cwe_catalog_xml(with_owasp_view=True):
    weaknesses = "".join([
        _weakness("20", "Improper Input Validation", capecs=["10", "98"]),
        _weakness("79", "Cross-site Scripting", parents=["20"], capecs=["63", "588"], extra_parents=["74"]),
        _weakness("502", "Deserialization of Untrusted Data", parents=["913"], capecs=["586"]),
        _weakness("913", "Improper Control of Dynamically-Managed Code Resources"),
        _weakness("7", "J2EE Misconfiguration", capecs=["98"], status="Deprecated"),
    ])
    categories = "".join(_owasp_category(n) for n in range(1, 11))
    categories += '<Category ID="937" Name="OWASP Top Ten 2013 Category A9" Status="Incomplete"><Summary/></Category>'
    view = ""
    if with_owasp_view:
        members = "".join(f'<Has_Member CWE_ID="{1344 + n}" View_ID="1344"/>' for n in range(1, 11))
        view = (
            '<Views><View ID="1344" Name="Weaknesses in OWASP Top Ten (2021)" Type="Graph" Status="Draft">'
            f"<Members>{members}</Members></View></Views>"
        )
    return (
        '<?xml version="1.0" encoding="UTF-8"?>'
        '<Weakness_Catalog xmlns="http://cwe.mitre.org/cwe-6" Name="CWE" Version="4.6" Date="2021-10-28">'
        f"<Weaknesses>{weaknesses}</Weaknesses><Categories>{categories}</Categories>{view}"
        "</Weakness_Catalog>"
    )


def _pattern(capec_id, name, techniques=(), weaknesses=(), parents=(), status="Stable", severity="High"):
    related = "".join(
        f'<Related_Attack_Pattern Nature="ChildOf" CAPEC_ID="{p}"/>' for p in parents
    )
    mappings = "".join(
        f'<Taxonomy_Mapping Taxonomy_Name="ATTACK"><Entry_ID>{t}</Entry_ID><Entry_Name>x</Entry_Name></Taxonomy_Mapping>'
        for t in techniques
    )
    cwes = "".join(f'<Related_Weakness CWE_ID="{w}"/>' for w in weaknesses)
    return (
        f'<Attack_Pattern ID="{capec_id}" Name="{name}" Abstraction="Standard" Status="{status}">'
        f"<Typical_Severity>{severity}</Typical_Severity>"
        f"<Related_Attack_Patterns>{related}</Related_Attack_Patterns>"
        f"<Related_Weaknesses>{cwes}</Related_Weaknesses>"
        f"<Taxonomy_Mappings>{mappings}</Taxonomy_Mappings>"
        f"</Attack_Pattern>"
    )


def capec_catalog_xml():
    patterns = "".join([
        _pattern("10", "Buffer Overflow via Environment Variables", techniques=["1574.006"], weaknesses=["20"]),
        _pattern("63", "Cross-Site Scripting (XSS)", weaknesses=["79"]),
        _pattern("98", "Phishing", techniques=["1566"], weaknesses=["451"], severity="Very High"),
        _pattern("586", "Object Injection", weaknesses=["502"]),
        _pattern("588", "DOM-Based XSS", techniques=["1059.007"], parents=["63"]),
        _pattern("999", "Retired Pattern", techniques=["1566"], status="Deprecated"),
    ])
    return (
        '<?xml version="1.0" encoding="UTF-8"?>'
        '<Attack_Pattern_Catalog xmlns="http://capec.mitre.org/capec-3" Name="CAPEC" Version="3.6" Date="2021-10-21">'
        f"<Attack_Patterns>{patterns}</Attack_Patterns>"
        "</Attack_Pattern_Catalog>"
    )


TACTICS = ["initial-access", "execution", "defense-evasion"]


def _technique(attack_id, name, tactics, sources=(), capecs=(), **extra):
    refs = [{"source_name": "mitre-attack", "external_id": attack_id, "url": f"https://attack.mitre.org/techniques/{attack_id}"}]
    refs += [{"source_name": "capec", "external_id": c} for c in capecs]
    obj = {
        "type": "attack-pattern",
        "id": f"attack-pattern--{attack_id.lower().replace('.', '-')}",
        "name": name,
        "modified": "2021-10-20T00:00:00.000Z",
        "external_references": refs,
        "kill_chain_phases": [{"kill_chain_name": "mitre-attack", "phase_name": t} for t in tactics],
        "x_mitre_is_subtechnique": "." in attack_id,
        "x_mitre_data_sources": list(sources),
    }
    obj.update(extra)
    return obj


def attack_bundle():
    tactic_objects = [
        {
            "type": "x-mitre-tactic",
            "id": f"x-mitre-tactic--{i}",
            "name": shortname.replace("-", " ").title(),
            "x_mitre_shortname": shortname,
            "modified": "2021-10-20T00:00:00.000Z",
        }
        for i, shortname in enumerate(TACTICS)
    ]
    matrix = {
        "type": "x-mitre-matrix",
        "id": "x-mitre-matrix--enterprise",
        "name": "Enterprise ATT&CK",
        "tactic_refs": [t["id"] for t in tactic_objects],
    }
    techniques = [
        _technique("T1566", "Phishing", ["initial-access"], [
            "Network Traffic: Network Traffic Content", "Network Traffic: Network Traffic Flow",
            "Application Log: Application Log Content", "File: File Creation",
        ], capecs=["CAPEC-98"]),
        _technique("T1566.001", "Spearphishing Attachment", ["initial-access"], [
            "Network Traffic: Network Traffic Content", "File: File Creation",
        ]),
        _technique("T1059", "Command and Scripting Interpreter", ["execution"], [
            "Command: Command Execution", "Process: Process Creation",
        ]),
        _technique("T1059.007", "JavaScript", ["execution"], [
            "Command: Command Execution", "Process: Process Creation",
        ]),
        _technique("T1574.006", "Dynamic Linker Hijacking", ["defense-evasion"], [
            "Module: Module Load", "File: File Modification", "Process: Process Creation",
        ], capecs=["CAPEC-13"]),
        _technique("T1600", "Weaken Encryption", ["defense-evasion"]),
        _technique("T1001", "Revoked Technique", [], revoked=True),
        _technique("T1002", "Deprecated Technique", ["execution"], ["Command: Command Execution"],
                   x_mitre_deprecated=True),
    ]
    collection = {"type": "x-mitre-collection", "id": "x-mitre-collection--1", "x_mitre_version": "10.1",
                  "modified": "2021-11-10T09:30:48.698Z"}
    return {"type": "bundle", "id": "bundle--1", "objects": [collection, matrix] + tactic_objects + techniques}


def write_mini_snapshot(directory, with_owasp_view=True, manifest=True):
    directory.mkdir(parents=True, exist_ok=True)
    nvd_2020 = directory / "nvdcve-1.1-2020.json"
    nvd_2020.write_text(json.dumps(FEED_2020), encoding="utf-8")
    nvd_2021 = directory / "nvdcve-1.1-2021.json.gz"
    with gzip.open(nvd_2021, "wt", encoding="utf-8") as f:
        json.dump(FEED_2021, f)
    cwe = directory / "cwec_v4.6.xml"
    cwe.write_text(cwe_catalog_xml(with_owasp_view), encoding="utf-8")
    capec = directory / "capec_v3.6.xml"
    capec.write_text(capec_catalog_xml(), encoding="utf-8")
    attack = directory / "enterprise-attack.json"
    attack.write_text(json.dumps(attack_bundle()), encoding="utf-8")

    if manifest:
        sources = {
            "NVD": {"paths": [nvd_2020.name, nvd_2021.name], "version_label": "1.1",
                    "retrieval_date": "2022-01-15", "digest": digest_files([nvd_2020, nvd_2021])},
            "CWE": {"path": cwe.name, "version_label": "4.6", "retrieval_date": "2022-01-15",
                    "digest": digest_files([cwe])},
            "CAPEC": {"path": capec.name, "version_label": "3.6", "retrieval_date": "2022-01-15",
                      "digest": digest_files([capec])},
            "ATTACK": {"path": attack.name, "version_label": "10.1", "retrieval_date": "2022-01-15",
                       "digest": digest_files([attack])},
        }
        (directory / "manifest.json").write_text(json.dumps({"sources": sources}, indent=2), encoding="utf-8")
    return directory


@pytest.fixture
def mini_snapshot(tmp_path):
    return write_mini_snapshot(tmp_path / "snapshots")


@pytest.fixture
def mini_sources(mini_snapshot):
    """Every source loaded from the synthetic snapshot, without a manifest."""
    from ingest import load_attack_bundle, load_capec_catalog, load_cwe_catalog, load_nvd_feeds

    cves, nvd = load_nvd_feeds([mini_snapshot / "nvdcve-1.1-2020.json", mini_snapshot / "nvdcve-1.1-2021.json.gz"])
    cwes, owasp, cwe = load_cwe_catalog(mini_snapshot / "cwec_v4.6.xml")
    capecs, capec = load_capec_catalog(mini_snapshot / "capec_v3.6.xml")
    techniques, tactics, attack = load_attack_bundle(mini_snapshot / "enterprise-attack.json")
    return {
        "cves": cves, "cwes": cwes, "owasp": owasp, "capecs": capecs,
        "techniques": techniques, "tactics": tactics, "snapshots": [nvd, cwe, capec, attack],
    }


@pytest.fixture
def mini_graph(mini_sources):
    from refgraph import build_graph

    s = mini_sources
    return build_graph(s["cves"], s["cwes"], s["capecs"], s["techniques"], s["owasp"], s["snapshots"])
