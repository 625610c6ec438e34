# File: cpe_core/versions.py
import re
from enum import Enum
from typing import List, Tuple

_LEADING_NUMBER = re.compile(r"([0-9]+)(.*)", re.DOTALL)


class Ordering(Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def _segment_key(segment: str) -> Tuple[int, int, str]:
    # "rc1" < "2" < "2y" < "3": segments starting with a digit sort after
    # those that don't, by leading number and then by the remaining suffix
    found = _LEADING_NUMBER.fullmatch(segment)
    if found:
        return (1, int(found.group(1)), found.group(2).casefold())
    return (0, 0, segment.casefold())


def version_key(version: str) -> List[Tuple[int, int, str]]:
    """Sort key equivalent to compare_versions."""
    return [_segment_key(segment) for segment in version.split(".")]


def compare_versions(a: str, b: str) -> Ordering:
    """
    Compare two version texts segment by segment after splitting on dots.
    A sequence that is a prefix of the other is LESS ("2.0" < "2.0.1").
    Letter releases follow their number ("1.0.2" < "1.0.2k" < "1.0.2y" < "1.0.3").
    """
    a_parts = version_key(a)
    b_parts = version_key(b)
    for a_part, b_part in zip(a_parts, b_parts):
        if a_part > b_part:
            return Ordering.GREATER
        elif a_part < b_part:
            return Ordering.LESS
    if len(a_parts) > len(b_parts):
        return Ordering.GREATER
    elif len(a_parts) < len(b_parts):
        return Ordering.LESS
    return Ordering.EQUAL
