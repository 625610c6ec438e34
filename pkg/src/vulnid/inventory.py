# File: vulnid/inventory.py
"""
Asset inventories: labelled lists of concrete CPE names, read from
``<asset_label><TAB><cpe 2.3 formatted string>`` files.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from cpe_core import CpeError, CpeName, parse_formatted_string

logger = logging.getLogger(__name__)


class VulnIdError(ValueError):
    pass


class InventoryParseError(VulnIdError):
    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"Inventory line {line_number}: {message}"
        super().__init__(message)


class WildcardInventoryError(InventoryParseError):
    pass


def check_concrete(name: CpeName, line_number: Optional[int] = None) -> CpeName:
    """Part, vendor and product must be plain values; other attributes may be ANY."""
    for attribute in ("part", "vendor", "product"):
        if not getattr(name, attribute).is_plain:
            raise WildcardInventoryError(
                f"'{name}' is not concrete: {attribute} must be a plain value", line_number
            )
    return name


@dataclass(frozen=True)
class Asset:
    label: str
    names: Tuple[CpeName, ...]


@dataclass(frozen=True)
class AssetInventory:
    assets: Tuple[Asset, ...] = ()

    def __post_init__(self):
        labels = [a.label for a in self.assets]
        if len(labels) != len(set(labels)):
            raise VulnIdError("Asset labels must be unique within an inventory")
        for asset in self.assets:
            for name in asset.names:
                check_concrete(name)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[str, CpeName]]) -> "AssetInventory":
        """Group ``(label, name)`` pairs by label, keeping first-seen order."""
        grouped: Dict[str, List[CpeName]] = {}
        for label, name in pairs:
            names = grouped.setdefault(label, [])
            if name not in names:
                names.append(name)
        return cls(tuple(Asset(label, tuple(names)) for label, names in grouped.items()))

    def with_asset(self, label: str, name: CpeName) -> "AssetInventory":
        pairs = [(a.label, n) for a in self.assets for n in a.names]
        return AssetInventory.from_pairs(pairs + [(label, name)])

    def names(self) -> Tuple[CpeName, ...]:
        return tuple(n for asset in self.assets for n in asset.names)

    def __iter__(self) -> Iterator[Asset]:
        return iter(self.assets)

    def __len__(self):
        return len(self.assets)


def parse_inventory(lines: Iterable[str]) -> AssetInventory:
    """Blank lines and lines starting with ``#`` are ignored."""
    pairs = []
    for line_number, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if "\t" not in line:
            raise InventoryParseError("expected '<asset_label><TAB><cpe name>'", line_number)
        label, text = (part.strip() for part in line.split("\t", 1))
        if not label:
            raise InventoryParseError("asset label is empty", line_number)
        try:
            name = parse_formatted_string(text)
        except CpeError as e:
            raise InventoryParseError(str(e), line_number) from e
        pairs.append((label, check_concrete(name, line_number)))

    if not pairs:
        raise InventoryParseError("inventory is empty")
    inventory = AssetInventory.from_pairs(pairs)
    logger.info(f"Loaded inventory with {len(inventory)} assets and {len(pairs)} names")
    return inventory


def load_inventory(path: Path) -> AssetInventory:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return parse_inventory(f)
    except OSError as e:
        raise InventoryParseError(f"Cannot read inventory {path}: {e}") from e
