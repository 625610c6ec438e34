# File: src/config.py
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

SNAPSHOT_DIR_ENV = "ENUMGRAPH_SNAPSHOT_DIR"
DEFAULT_SNAPSHOT_DIR = Path("snapshots")
DEFAULT_OUTPUT_DIR = Path("out")
MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class RunConfig:
    snapshot_dir: Path
    manifest: Path
    output_dir: Path
    parity_mode: bool = False
    include_rejected: bool = False
    assume_any_version_matches: bool = False
    expand_hierarchy: bool = False

    @classmethod
    def resolve(
        cls,
        snapshot_dir: Optional[str] = None,
        manifest: Optional[str] = None,
        output_dir: Optional[str] = None,
        **flags: bool,
    ) -> "RunConfig":
        """Flag, then ``ENUMGRAPH_SNAPSHOT_DIR``, then ``./snapshots``."""
        if snapshot_dir:
            directory = Path(snapshot_dir)
        elif os.environ.get(SNAPSHOT_DIR_ENV):
            directory = Path(os.environ[SNAPSHOT_DIR_ENV])
        else:
            directory = DEFAULT_SNAPSHOT_DIR
        return cls(
            snapshot_dir=directory,
            manifest=Path(manifest) if manifest else directory / MANIFEST_NAME,
            output_dir=Path(output_dir) if output_dir else DEFAULT_OUTPUT_DIR,
            **flags,
        )

    @property
    def auto_extend_buckets(self) -> bool:
        return not self.parity_mode
