# File: cpe_core/matching.py
import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Tuple

from .cpe_name import AttributeKind, CpeAttribute, CpeError, CpeName


class WildcardVsWildcard(CpeError):
    """Both sides of a comparison carry wildcards; the relation is undefined."""


class AttributeRelation(Enum):
    EQUAL = "EQUAL"
    SUBSET = "SUBSET"
    SUPERSET = "SUPERSET"
    DISJOINT = "DISJOINT"


ACCEPTING_RELATIONS = (AttributeRelation.EQUAL, AttributeRelation.SUPERSET)


@dataclass(frozen=True)
class NameMatchResult:
    per_attribute: Tuple[AttributeRelation, ...]
    accepts: bool


def _run_to_regex(run: str) -> str:
    if run == "*":
        return ".*"
    return ".{%d}" % len(run)


@lru_cache(maxsize=4096)
def _pattern(lead: str, value: str, trail: str) -> "re.Pattern":
    return re.compile(_run_to_regex(lead) + re.escape(value) + _run_to_regex(trail), re.DOTALL)


def _covers(pattern: CpeAttribute, literal: CpeAttribute) -> bool:
    return _pattern(pattern.lead, pattern.value, pattern.trail).fullmatch(literal.value) is not None


def compare_attribute(source: CpeAttribute, target: CpeAttribute) -> AttributeRelation:
    """Set relation between the values ``source`` and ``target`` denote."""
    if source == target:
        return AttributeRelation.EQUAL
    if source.kind is AttributeKind.ANY:
        return AttributeRelation.SUPERSET
    if target.kind is AttributeKind.ANY:
        return AttributeRelation.SUBSET
    if source.kind is AttributeKind.NA or target.kind is AttributeKind.NA:
        return AttributeRelation.DISJOINT

    if source.has_wildcards and target.has_wildcards:
        raise WildcardVsWildcard(f"Cannot compare wildcard values '{source}' and '{target}'")
    if source.has_wildcards:
        return AttributeRelation.SUPERSET if _covers(source, target) else AttributeRelation.DISJOINT
    if target.has_wildcards:
        return AttributeRelation.SUBSET if _covers(target, source) else AttributeRelation.DISJOINT
    return AttributeRelation.DISJOINT


def name_match(source: CpeName, target: CpeName) -> NameMatchResult:
    relations = tuple(
        compare_attribute(s, t) for s, t in zip(source.attributes(), target.attributes())
    )
    return NameMatchResult(
        per_attribute=relations,
        accepts=all(r in ACCEPTING_RELATIONS for r in relations),
    )
