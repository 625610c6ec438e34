# File: analysis/buckets.py
import logging
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ingest.snapshot import Snapshot

from .errors import BucketGap, InvalidBucketSpec

logger = logging.getLogger(__name__)

_CENT = Decimal("0.01")


def round_half_up(value: Decimal) -> Decimal:
    return value.quantize(_CENT, rounding=ROUND_HALF_UP)


@dataclass(frozen=True)
class Bucket:
    label: str
    lower: int
    upper: Optional[int] = None  # None = unbounded

    def contains(self, count: int) -> bool:
        return count >= self.lower and (self.upper is None or count <= self.upper)


@dataclass(frozen=True)
class BucketSpec:
    """
    Ascending, contiguous buckets starting at 0. Only the last bucket may be
    unbounded; when it is bounded, larger counts are a BucketGap.
    """
    buckets: Tuple[Bucket, ...]

    def __post_init__(self):
        if not self.buckets:
            raise InvalidBucketSpec("A bucket spec needs at least one bucket")
        if self.buckets[0].lower != 0:
            raise InvalidBucketSpec("The first bucket must start at 0")
        labels = [b.label for b in self.buckets]
        if len(labels) != len(set(labels)):
            raise InvalidBucketSpec(f"Duplicate bucket labels in {labels}")
        for previous, current in zip(self.buckets, self.buckets[1:]):
            if previous.upper is None:
                raise InvalidBucketSpec(f"Only the last bucket may be unbounded ('{previous.label}')")
            if current.lower != previous.upper + 1:
                raise InvalidBucketSpec(f"Buckets '{previous.label}' and '{current.label}' are not contiguous")
        for bucket in self.buckets:
            if bucket.upper is not None and bucket.upper < bucket.lower:
                raise InvalidBucketSpec(f"Bucket '{bucket.label}' is empty")

    @classmethod
    def from_bounds(cls, bounds: Sequence[Tuple[int, Optional[int]]]) -> "BucketSpec":
        """Build a spec with generated labels: "0", "1-2", ">10"."""
        buckets = []
        for lower, upper in bounds:
            if upper is None:
                label = f">{lower - 1}"
            elif upper == lower:
                label = str(lower)
            else:
                label = f"{lower}-{upper}"
            buckets.append(Bucket(label, lower, upper))
        return cls(tuple(buckets))

    @property
    def labels(self) -> List[str]:
        return [b.label for b in self.buckets]

    @property
    def top(self) -> Bucket:
        return self.buckets[-1]

    def bucket_for(self, count: int) -> str:
        for bucket in self.buckets:
            if bucket.contains(count):
                return bucket.label
        raise BucketGap(f"No bucket covers the count {count} (top bucket is '{self.top.label}')")

    def extended_to(self, max_count: int) -> "BucketSpec":
        """Stretch a bounded top bucket to ``max_count``, relabelling it."""
        top = self.top
        if top.upper is None or max_count <= top.upper:
            return self
        label = str(top.lower) if top.lower == max_count else f"{top.lower}-{max_count}"
        return BucketSpec(self.buckets[:-1] + (replace(top, label=label, upper=max_count),))

    def relabel_top(self, label: str) -> "BucketSpec":
        return BucketSpec(self.buckets[:-1] + (replace(self.top, label=label),))

    def edges(self) -> List[float]:
        last = self.top.upper
        return [-0.5] + [b.upper + 0.5 for b in self.buckets[:-1]] + [np.inf if last is None else last + 0.5]


# CAPEC entries reachable from one CVE
CAPECS_PER_CVE = BucketSpec.from_bounds([(0, 0), (1, 2), (3, 5), (6, 8), (9, 15), (16, 59)])
# ATT&CK techniques reachable from one CVE
TECHNIQUES_PER_CVE = BucketSpec.from_bounds([(0, 0), (1, 1), (2, 2), (3, 5), (6, 10), (11, None)])
# axis wording of the published ATT&CK histogram
TECHNIQUES_PER_CVE_PUBLISHED = TECHNIQUES_PER_CVE.relabel_top("more than 10")


@dataclass(frozen=True)
class Histogram:
    spec: BucketSpec
    bucket_counts: Dict[str, int]
    denominator: int
    snapshot_set: Tuple[Snapshot, ...] = ()
    bucket_percentages: Dict[str, Decimal] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "bucket_percentages", {
            label: self._percent(count) for label, count in self.bucket_counts.items()
        })

    def _percent(self, count: int) -> Decimal:
        if self.denominator == 0:
            return Decimal("0.00")
        return round_half_up(Decimal(count * 100) / Decimal(self.denominator))

    def share(self, labels: Iterable[str]) -> Decimal:
        """Percentage of the denominator falling in any of ``labels``, rounded once."""
        labels = list(labels)
        unknown = [l for l in labels if l not in self.bucket_counts]
        if unknown:
            raise KeyError(f"Unknown buckets {unknown}")
        return self._percent(sum(self.bucket_counts[l] for l in labels))

    def nonzero_share(self) -> Decimal:
        return self.share(self.spec.labels[1:])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "bucket": list(self.bucket_counts),
            "count": list(self.bucket_counts.values()),
            "percent": [float(p) for p in self.bucket_percentages.values()],
        })

    def to_figure_frame(self) -> pd.DataFrame:
        return self.to_frame()[["bucket", "percent"]]

    def to_dict(self) -> Dict[str, object]:
        return {
            "denominator": self.denominator,
            "buckets": [
                {"bucket": label, "count": count, "percent": float(self.bucket_percentages[label])}
                for label, count in self.bucket_counts.items()
            ],
        }


def build_histogram(
    values: Iterable[int],
    spec: BucketSpec,
    snapshot_set: Sequence[Snapshot] = (),
    auto_extend: bool = False,
) -> Histogram:
    """
    Bucket per-item counts. A count above a bounded top bucket raises
    BucketGap unless ``auto_extend`` stretches the top bucket to the maximum.
    """
    series = pd.Series(list(values), dtype="int64")
    if not series.empty:
        if series.min() < 0:
            raise BucketGap(f"Negative count {series.min()} cannot be bucketed")
        observed_max = int(series.max())
        if auto_extend:
            extended = spec.extended_to(observed_max)
            if extended is not spec:
                logger.info(f"Top bucket extended from '{spec.top.label}' to '{extended.top.label}'")
            spec = extended
        spec.bucket_for(observed_max)

    binned = pd.cut(series, bins=spec.edges(), labels=spec.labels)
    counts = binned.value_counts(sort=False).reindex(spec.labels, fill_value=0)
    return Histogram(
        spec=spec,
        bucket_counts={label: int(counts[label]) for label in spec.labels},
        denominator=int(series.size),
        snapshot_set=tuple(snapshot_set),
    )
