from .cpe_name import (
    ATTRIBUTE_NAMES,
    AttributeKind,
    CpeAttribute,
    CpeError,
    CpeName,
    IllegalCharacter,
    IllegalPart,
    MalformedPrefix,
    WrongFieldCount,
    format_name,
    parse_formatted_string,
)
from .matching import (
    AttributeRelation,
    NameMatchResult,
    WildcardVsWildcard,
    compare_attribute,
    name_match,
)
from .versions import Ordering, compare_versions

__all__ = [
    "ATTRIBUTE_NAMES",
    "AttributeKind",
    "AttributeRelation",
    "CpeAttribute",
    "CpeError",
    "CpeName",
    "IllegalCharacter",
    "IllegalPart",
    "MalformedPrefix",
    "NameMatchResult",
    "Ordering",
    "WildcardVsWildcard",
    "WrongFieldCount",
    "compare_attribute",
    "compare_versions",
    "format_name",
    "name_match",
    "parse_formatted_string",
]
