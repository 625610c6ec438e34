# File: ingest/records.py
"""Typed records for the five enumeration sources."""
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, Optional, Tuple

from cpe_core import CpeName, Ordering, compare_versions

CVE_ID = re.compile(r"CVE-\d{4}-\d{4,}")
TECHNIQUE_ID = re.compile(r"T\d{4}(\.\d{3})?")

# NVD problem-type values that name no real weakness
CWE_PLACEHOLDERS = frozenset({"NVD-CWE-noinfo", "NVD-CWE-Other"})

OWASP_2021_CATEGORIES = tuple(f"A{i}" for i in range(1, 11))


class CveStatus(Enum):
    PUBLISHED = "PUBLISHED"
    REJECTED = "REJECTED"


class EntryStatus(Enum):
    ACTIVE = "ACTIVE"
    DEPRECATED = "DEPRECATED"


class CweKind(Enum):
    WEAKNESS = "WEAKNESS"
    CATEGORY = "CATEGORY"


class Operator(Enum):
    AND = "AND"
    OR = "OR"


class InvertedVersionRange(ValueError):
    pass


@dataclass(frozen=True)
class VersionBound:
    version: str
    inclusive: bool

    def describe(self, upper: bool) -> str:
        if upper:
            return f"<={self.version}" if self.inclusive else f"<{self.version}"
        return f">={self.version}" if self.inclusive else f">{self.version}"


@dataclass(frozen=True)
class CpeMatchClause:
    criterion: CpeName
    vulnerable: bool = True
    version_start: Optional[VersionBound] = None
    version_end: Optional[VersionBound] = None

    def __post_init__(self):
        if self.version_start and self.version_end:
            if compare_versions(self.version_start.version, self.version_end.version) is Ordering.GREATER:
                raise InvertedVersionRange(
                    f"Version range start {self.version_start.version} is above end {self.version_end.version}"
                )

    @property
    def has_range(self) -> bool:
        return self.version_start is not None or self.version_end is not None

    def describe_range(self) -> str:
        bounds = []
        if self.version_start:
            bounds.append(self.version_start.describe(upper=False))
        if self.version_end:
            bounds.append(self.version_end.describe(upper=True))
        return " ".join(bounds)


@dataclass(frozen=True)
class ApplicabilityNode:
    operator: Operator
    children: Tuple["ApplicabilityNode", ...] = ()
    matches: Tuple[CpeMatchClause, ...] = ()

    def iter_clauses(self):
        yield from self.matches
        for child in self.children:
            yield from child.iter_clauses()


@dataclass(frozen=True)
class CveEntry:
    id: str
    description: str = ""
    status: CveStatus = CveStatus.PUBLISHED
    cwe_ids: FrozenSet[str] = frozenset()
    configuration: Optional[ApplicabilityNode] = None
    references: Tuple[str, ...] = ()
    # clauses left out at load time, e.g. an inverted version range
    dropped_clauses: Tuple[str, ...] = ()

    def __post_init__(self):
        if not CVE_ID.fullmatch(self.id):
            raise ValueError(f"Malformed CVE identifier '{self.id}'")
        object.__setattr__(self, "cwe_ids", frozenset(self.cwe_ids))

    @property
    def is_rejected(self) -> bool:
        return self.status is CveStatus.REJECTED

    def weakness_ids(self) -> FrozenSet[str]:
        """CWE ids without the NVD placeholders."""
        return frozenset(c for c in self.cwe_ids if c not in CWE_PLACEHOLDERS)

    def clauses(self):
        if self.configuration is None:
            return iter(())
        return self.configuration.iter_clauses()


@dataclass(frozen=True)
class CweEntry:
    id: str
    name: str
    parent_ids: FrozenSet[str] = frozenset()
    related_capec_ids: FrozenSet[str] = frozenset()
    status: EntryStatus = EntryStatus.ACTIVE
    kind: CweKind = CweKind.WEAKNESS

    def __post_init__(self):
        if self.id in self.parent_ids:
            raise ValueError(f"{self.id} lists itself as a parent")
        object.__setattr__(self, "parent_ids", frozenset(self.parent_ids))
        object.__setattr__(self, "related_capec_ids", frozenset(self.related_capec_ids))

    @property
    def is_active(self) -> bool:
        return self.status is EntryStatus.ACTIVE


@dataclass(frozen=True)
class CapecEntry:
    id: str
    name: str
    parent_ids: FrozenSet[str] = frozenset()
    technique_ids: FrozenSet[str] = frozenset()
    severity: Optional[str] = None
    status: EntryStatus = EntryStatus.ACTIVE
    related_cwe_ids: FrozenSet[str] = frozenset()

    def __post_init__(self):
        bad = [t for t in self.technique_ids if not TECHNIQUE_ID.fullmatch(t)]
        if bad:
            raise ValueError(f"{self.id} maps malformed technique ids: {sorted(bad)}")
        for name in ("parent_ids", "technique_ids", "related_cwe_ids"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))

    @property
    def is_active(self) -> bool:
        return self.status is EntryStatus.ACTIVE


@dataclass(frozen=True)
class AttackTechnique:
    id: str
    stix_id: str
    name: str
    tactics: FrozenSet[str] = frozenset()
    data_sources: FrozenSet[str] = frozenset()
    is_subtechnique: bool = False
    revoked: bool = False
    deprecated: bool = False
    capec_ids: FrozenSet[str] = frozenset()

    def __post_init__(self):
        if not TECHNIQUE_ID.fullmatch(self.id):
            raise ValueError(f"Malformed technique identifier '{self.id}'")
        if self.is_subtechnique != ("." in self.id):
            raise ValueError(f"{self.id}: sub-technique flag disagrees with the identifier")
        if not self.revoked and not self.tactics:
            raise ValueError(f"{self.id} has no tactics")
        for name in ("tactics", "data_sources", "capec_ids"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))

    @property
    def is_active(self) -> bool:
        return not (self.revoked or self.deprecated)


@dataclass(frozen=True)
class OwaspMapping:
    category: str
    category_name: str
    cwe_ids: FrozenSet[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.category not in OWASP_2021_CATEGORIES:
            raise ValueError(f"Unknown OWASP Top Ten 2021 category '{self.category}'")
        object.__setattr__(self, "cwe_ids", frozenset(self.cwe_ids))
