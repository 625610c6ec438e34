# File: vulnid/identifier.py
"""
Evaluation of NVD applicability trees against an asset inventory.

A tree is evaluated per asset: an AND of an operating system clause and an
application clause is satisfied only when one asset carries both names.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

from cpe_core import CpeName, Ordering, WildcardVsWildcard, compare_versions, format_name, name_match
from ingest.records import ApplicabilityNode, CpeMatchClause, CveEntry, Operator

from .inventory import AssetInventory, VulnIdError

logger = logging.getLogger(__name__)


class MalformedNode(VulnIdError):
    pass


@dataclass(frozen=True)
class ClauseEvidence:
    clause: CpeMatchClause
    name: CpeName
    version_verdict: str

    @property
    def criterion(self) -> CpeName:
        return self.clause.criterion

    def sort_key(self) -> Tuple[str, str, str]:
        return format_name(self.clause.criterion), format_name(self.name), self.version_verdict

    def to_dict(self) -> Dict[str, object]:
        return {
            "criterion": format_name(self.clause.criterion),
            "name": format_name(self.name),
            "version_range": self.clause.describe_range(),
            "version_verdict": self.version_verdict,
        }


@dataclass(frozen=True)
class VulnMatch:
    cve_id: str
    asset_label: str
    matched_clauses: Tuple[ClauseEvidence, ...]

    def __post_init__(self):
        if not self.matched_clauses:
            raise VulnIdError(f"{self.cve_id} on {self.asset_label}: a match needs evidence")

    def to_dict(self) -> Dict[str, object]:
        return {
            "cve_id": self.cve_id,
            "asset_label": self.asset_label,
            "matched_clauses": [e.to_dict() for e in self.matched_clauses],
        }


def _version_in_range(version: str, clause: CpeMatchClause) -> bool:
    start, end = clause.version_start, clause.version_end
    if start is not None:
        order = compare_versions(version, start.version)
        if order is Ordering.LESS or (order is Ordering.EQUAL and not start.inclusive):
            return False
    if end is not None:
        order = compare_versions(version, end.version)
        if order is Ordering.GREATER or (order is Ordering.EQUAL and not end.inclusive):
            return False
    return True


def version_verdict(clause: CpeMatchClause, name: CpeName, assume_any_version_matches: bool = False) -> Optional[str]:
    """
    ``None`` when the name's version falls outside the clause's bounds,
    otherwise a short description of why it passed.
    """
    if not clause.has_range:
        return "unbounded"
    version = name.version
    if version.is_na:
        return None
    if version.is_any or version.has_wildcards:
        return "assumed" if assume_any_version_matches else None
    return "in range" if _version_in_range(version.value, clause) else None


def evaluate_clause(clause: CpeMatchClause, name: CpeName, assume_any_version_matches: bool = False) -> bool:
    """
    True iff the clause's criterion accepts ``name`` and the name's version
    lies within the clause's bounds. The ``vulnerable`` flag is not consulted
    here; it only decides whether a match counts as evidence.
    """
    if not name_match(clause.criterion, name).accepts:
        return False
    return version_verdict(clause, name, assume_any_version_matches) is not None


def _evaluate(
    node: ApplicabilityNode,
    names: Sequence[CpeName],
    assume_any_version_matches: bool,
) -> Tuple[bool, List[ClauseEvidence]]:
    if not node.children and not node.matches:
        raise MalformedNode(f"{node.operator.value} node has no children and no clauses")

    outcomes: List[Tuple[bool, List[ClauseEvidence]]] = []
    for clause in node.matches:
        evidence = []
        for name in names:
            if not name_match(clause.criterion, name).accepts:
                continue
            verdict = version_verdict(clause, name, assume_any_version_matches)
            if verdict is not None:
                evidence.append(ClauseEvidence(clause, name, verdict))
        outcomes.append((bool(evidence), evidence if clause.vulnerable else []))
    for child in node.children:
        outcomes.append(_evaluate(child, names, assume_any_version_matches))

    if node.operator is Operator.AND:
        truth = all(t for t, _ in outcomes)
    else:
        truth = any(t for t, _ in outcomes)
    if not truth:
        return False, []
    return True, [e for t, evidence in outcomes if t for e in evidence]


def evaluate_applicability(
    node: ApplicabilityNode,
    inventory: Union[AssetInventory, Iterable[CpeName]],
    assume_any_version_matches: bool = False,
) -> Tuple[bool, List[ClauseEvidence]]:
    """
    Evaluate ``node`` against a set of names. Passing an ``AssetInventory``
    pools the names of all its assets; identification calls this once per
    asset instead.

    Returns the verdict and the (clause, name) pairs of vulnerable clauses
    that contributed to it, deduplicated and sorted.
    """
    names = inventory.names() if isinstance(inventory, AssetInventory) else tuple(inventory)
    truth, evidence = _evaluate(node, names, assume_any_version_matches)
    unique = {e.sort_key(): e for e in evidence}
    return truth, [unique[k] for k in sorted(unique)]


def _index_key(criterion: CpeName) -> Optional[Tuple[str, str]]:
    if criterion.vendor.is_plain and criterion.product.is_plain:
        return criterion.vendor.value, criterion.product.value
    return None


class CveIndex:
    """
    Inverted index from (vendor, product) to the published CVEs whose
    vulnerable clauses name that pair. Clauses whose vendor or product is not
    a plain value go into a bucket that every lookup returns.
    """

    def __init__(self, cves: Iterable[CveEntry]):
        self.cves: Dict[str, CveEntry] = {}
        self._by_product: Dict[Tuple[str, str], Set[str]] = defaultdict(set)
        self._unkeyed: Set[str] = set()
        for cve in cves:
            if cve.is_rejected or cve.configuration is None:
                continue
            self.cves[cve.id] = cve
            for clause in cve.clauses():
                if not clause.vulnerable:
                    continue
                key = _index_key(clause.criterion)
                if key is None:
                    self._unkeyed.add(cve.id)
                else:
                    self._by_product[key].add(cve.id)
        logger.debug(
            f"Indexed {len(self.cves)} CVEs under {len(self._by_product)} vendor:product keys "
            f"({len(self._unkeyed)} unkeyed)"
        )

    def candidates(self, names: Iterable[CpeName]) -> List[str]:
        found = set(self._unkeyed)
        for name in names:
            found |= self._by_product.get((name.vendor.value, name.product.value), set())
        return sorted(found)

    def all_ids(self) -> List[str]:
        return sorted(self.cves)


def identify_vulnerabilities(
    cves: Union[Iterable[CveEntry], CveIndex],
    inventory: AssetInventory,
    assume_any_version_matches: bool = False,
    use_index: bool = True,
    progress_callback: Optional[Callable[[int], None]] = None,
) -> List[VulnMatch]:
    """
    Match every published CVE against each asset. Returns one VulnMatch per
    (CVE, asset) whose tree holds and yields evidence, sorted by CVE id then
    asset label. ``use_index=False`` evaluates every CVE for every asset.
    """
    if len(inventory) == 0:
        raise VulnIdError("Cannot identify vulnerabilities for an empty inventory")
    index = cves if isinstance(cves, CveIndex) else CveIndex(cves)

    matches = []
    for position, asset in enumerate(inventory, start=1):
        candidate_ids = index.candidates(asset.names) if use_index else index.all_ids()
        logger.debug(f"{asset.label}: {len(candidate_ids)} candidate CVEs")
        for cve_id in candidate_ids:
            cve = index.cves[cve_id]
            try:
                truth, evidence = evaluate_applicability(
                    cve.configuration, asset.names, assume_any_version_matches
                )
            except WildcardVsWildcard as e:
                logger.warning(f"{cve_id} vs {asset.label}: skipped, {e}")
                continue
            if truth and evidence:
                matches.append(VulnMatch(cve_id, asset.label, tuple(evidence)))
        if progress_callback:
            progress_callback(int(position / len(inventory) * 100))

    matches.sort(key=lambda m: (m.cve_id, m.asset_label))
    logger.info(f"Identified {len(matches)} CVE/asset matches across {len(inventory)} assets")
    return matches
