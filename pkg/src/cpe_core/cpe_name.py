# File: cpe_core/cpe_name.py
"""
CPE 2.3 formatted-string binding.

A formatted string is ``cpe:2.3:`` followed by eleven colon separated
attributes. ``*`` alone is the logical value ANY, ``-`` alone is NA, anything
else is a literal that may carry unquoted wildcards (``*`` or a run of ``?``)
at its start and end. Punctuation other than ``.``, ``-`` and ``_`` must be
escaped with a backslash.
"""
from dataclasses import dataclass, fields
from enum import Enum
from typing import List, Tuple, Union

PREFIX = "cpe:2.3:"

ATTRIBUTE_NAMES = (
    "part", "vendor", "product", "version", "update", "edition",
    "language", "sw_edition", "target_sw", "target_hw", "other",
)

VALID_PARTS = {"a", "o", "h"}

# characters a formatted string carries without a backslash
_PLAIN_PUNCTUATION = "._-"
_WILDCARDS = "*?"


class CpeError(ValueError):
    """Base class for every CPE parsing or comparison failure."""


class MalformedPrefix(CpeError):
    pass


class WrongFieldCount(CpeError):
    pass


class IllegalCharacter(CpeError):
    pass


class IllegalPart(CpeError):
    pass


class AttributeKind(Enum):
    ANY = "ANY"
    NA = "NA"
    LITERAL = "LITERAL"


def _valid_wildcard_run(run: str) -> bool:
    return run == "" or run == "*" or set(run) == {"?"}


@dataclass(frozen=True)
class CpeAttribute:
    """
    One attribute value. For LITERALs ``value`` holds the unescaped, lowercased
    body and ``lead``/``trail`` hold the unquoted wildcards around it.
    """
    kind: AttributeKind
    value: str = ""
    lead: str = ""
    trail: str = ""

    def __post_init__(self):
        if self.kind is not AttributeKind.LITERAL:
            if self.value or self.lead or self.trail:
                raise IllegalCharacter(f"{self.kind.value} attribute cannot carry a value")
            return
        object.__setattr__(self, "value", self.value.lower())
        if not (_valid_wildcard_run(self.lead) and _valid_wildcard_run(self.trail)):
            raise IllegalCharacter(f"Invalid wildcard run around '{self.value}'")
        # an empty body is only legal as a bare run of "?"
        if not self.value and (not self.lead or self.trail or self.lead == "*"):
            raise IllegalCharacter("Literal attribute value is empty")

    @classmethod
    def any(cls) -> "CpeAttribute":
        return cls(AttributeKind.ANY)

    @classmethod
    def na(cls) -> "CpeAttribute":
        return cls(AttributeKind.NA)

    @classmethod
    def literal(cls, value: str, lead: str = "", trail: str = "") -> "CpeAttribute":
        return cls(AttributeKind.LITERAL, value, lead, trail)

    @property
    def is_any(self) -> bool:
        return self.kind is AttributeKind.ANY

    @property
    def is_na(self) -> bool:
        return self.kind is AttributeKind.NA

    @property
    def has_wildcards(self) -> bool:
        return bool(self.lead or self.trail)

    @property
    def is_plain(self) -> bool:
        """True for a literal without wildcards."""
        return self.kind is AttributeKind.LITERAL and not self.has_wildcards

    def __str__(self):
        return _format_attribute(self)


AttributeInput = Union[CpeAttribute, str]


@dataclass(frozen=True)
class CpeName:
    part: CpeAttribute = CpeAttribute.any()
    vendor: CpeAttribute = CpeAttribute.any()
    product: CpeAttribute = CpeAttribute.any()
    version: CpeAttribute = CpeAttribute.any()
    update: CpeAttribute = CpeAttribute.any()
    edition: CpeAttribute = CpeAttribute.any()
    language: CpeAttribute = CpeAttribute.any()
    sw_edition: CpeAttribute = CpeAttribute.any()
    target_sw: CpeAttribute = CpeAttribute.any()
    target_hw: CpeAttribute = CpeAttribute.any()
    other: CpeAttribute = CpeAttribute.any()

    def __post_init__(self):
        part = self.part
        if part.kind is AttributeKind.LITERAL and (part.has_wildcards or part.value not in VALID_PARTS):
            raise IllegalPart(f"Part must be one of a, o, h, ANY or NA, got '{part}'")

    @classmethod
    def build(cls, **values: AttributeInput) -> "CpeName":
        """
        Convenience constructor: plain strings become wildcard-free literals,
        unspecified attributes are ANY.
        """
        unknown = set(values) - set(ATTRIBUTE_NAMES)
        if unknown:
            raise TypeError(f"Unknown CPE attributes: {sorted(unknown)}")
        converted = {
            key: value if isinstance(value, CpeAttribute) else CpeAttribute.literal(value)
            for key, value in values.items()
        }
        return cls(**converted)

    def attributes(self) -> Tuple[CpeAttribute, ...]:
        return tuple(getattr(self, f.name) for f in fields(self))

    def vendor_product(self) -> Tuple[CpeAttribute, CpeAttribute]:
        return self.vendor, self.product

    def __str__(self):
        return format_name(self)


def _split_fields(body: str) -> List[str]:
    """Split on colons that are not backslash escaped, keeping escapes in place."""
    parts = []
    current = []
    escaped = False
    for ch in body:
        if escaped:
            current.append(ch)
            escaped = False
        elif ch == "\\":
            current.append(ch)
            escaped = True
        elif ch == ":":
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    if escaped:
        raise IllegalCharacter("Formatted string ends with a dangling backslash")
    parts.append("".join(current))
    return parts


def _parse_attribute(raw: str, position: str) -> CpeAttribute:
    if raw == "*":
        return CpeAttribute.any()
    if raw == "-":
        return CpeAttribute.na()
    if raw == "":
        raise IllegalCharacter(f"Empty {position} attribute")

    # (character, is_unquoted_wildcard)
    tokens = []
    i = 0
    while i < len(raw):
        ch = raw[i]
        if ch == "\\":
            tokens.append((raw[i + 1], False))
            i += 2
            continue
        if ch in _WILDCARDS:
            tokens.append((ch, True))
        elif ch.isalnum() or ch in _PLAIN_PUNCTUATION:
            tokens.append((ch, False))
        else:
            raise IllegalCharacter(f"Unescaped '{ch}' in {position} attribute '{raw}'")
        i += 1

    start = 0
    while start < len(tokens) and tokens[start][1]:
        start += 1
    end = len(tokens)
    while end > start and tokens[end - 1][1]:
        end -= 1
    if any(wild for _, wild in tokens[start:end]):
        raise IllegalCharacter(f"Wildcard inside {position} attribute '{raw}'")

    lead = "".join(ch for ch, _ in tokens[:start])
    body = "".join(ch for ch, _ in tokens[start:end])
    trail = "".join(ch for ch, _ in tokens[end:])
    try:
        return CpeAttribute.literal(body, lead, trail)
    except IllegalCharacter as e:
        raise IllegalCharacter(f"Invalid {position} attribute '{raw}': {e}") from e


def parse_formatted_string(text: str) -> CpeName:
    """Parse a CPE 2.3 formatted string into its eleven attributes."""
    line = text.rstrip("\r\n")
    if "\n" in line or "\r" in line:
        raise IllegalCharacter("Formatted string must be a single line")
    if line[:len(PREFIX)].lower() != PREFIX:
        raise MalformedPrefix(f"Not a CPE 2.3 formatted string: '{line}'")

    raw_fields = _split_fields(line[len(PREFIX):])
    if len(raw_fields) != len(ATTRIBUTE_NAMES):
        raise WrongFieldCount(
            f"Expected {len(ATTRIBUTE_NAMES)} attributes, found {len(raw_fields)} in '{line}'"
        )

    values = {}
    for name, raw in zip(ATTRIBUTE_NAMES, raw_fields):
        if name == "part":
            try:
                values[name] = _parse_attribute(raw, name)
            except IllegalCharacter as e:
                raise IllegalPart(str(e)) from e
        else:
            values[name] = _parse_attribute(raw, name)
    return CpeName(**values)


def _format_attribute(attribute: CpeAttribute) -> str:
    if attribute.kind is AttributeKind.ANY:
        return "*"
    if attribute.kind is AttributeKind.NA:
        return "-"
    if attribute.value == "-" and not attribute.has_wildcards:
        # a bare dash would read back as NA
        return "\\-"
    escaped = "".join(
        ch if ch.isalnum() or ch in _PLAIN_PUNCTUATION else "\\" + ch
        for ch in attribute.value
    )
    return f"{attribute.lead}{escaped}{attribute.trail}"


def format_name(name: CpeName) -> str:
    return PREFIX + ":".join(_format_attribute(a) for a in name.attributes())
