# File: utils/snapshot_fetcher.py
"""
Downloads the snapshot files listed in ``snapshots/sources.json`` and writes
a manifest with their digests. This is a convenience script; the toolkit
itself never touches the network.

    python src/utils/snapshot_fetcher.py --sources snapshots/sources.json --target snapshots
"""
import argparse
import json
import logging
import os
import sys
import tempfile
import zipfile
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import requests

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from ingest.snapshot import SnapshotSource, digest_files  # noqa: E402

logger = logging.getLogger(__name__)


class FetchError(RuntimeError):
    pass


def expand_urls(spec: Dict[str, Any]) -> List[str]:
    """A source lists either ``url``, ``urls`` or a ``url_template`` over an inclusive ``years`` range."""
    if "url" in spec:
        return [spec["url"]]
    if "urls" in spec:
        return list(spec["urls"])
    if "url_template" in spec:
        first, last = spec["years"]
        return [spec["url_template"].format(year=year) for year in range(first, last + 1)]
    raise FetchError(f"Source spec has no url: {spec}")


class SnapshotFetcher:
    def __init__(
        self,
        target_dir: Path,
        session: Optional[requests.Session] = None,
        progress_callback: Optional[Callable[[int], None]] = None,
        output_callback: Optional[Callable[[str], None]] = None,
        block_size: int = 1024 * 64,
    ):
        self.target_dir = Path(target_dir)
        self.session = session or requests.Session()
        self.progress_callback = progress_callback
        self.output_callback = output_callback
        self.block_size = block_size

    def _report(self, message: str):
        logger.info(message)
        if self.output_callback:
            self.output_callback(message)

    def download(self, url: str, destination: Path) -> Path:
        try:
            response = self.session.get(url, stream=True, timeout=60)
            response.raise_for_status()
        except requests.RequestException as e:
            raise FetchError(f"Error downloading {url}: {str(e)}") from e

        total_size = int(response.headers.get("content-length", 0))
        downloaded = 0
        destination.parent.mkdir(parents=True, exist_ok=True)
        with open(destination, "wb") as file:
            for data in response.iter_content(self.block_size):
                downloaded += file.write(data)
                if total_size and self.progress_callback:
                    self.progress_callback(int((downloaded / total_size) * 100))
        self._report(f"Downloaded {url} ({downloaded} bytes)")
        return destination

    def download_and_extract(self, url: str, member_suffix: str) -> Path:
        """Fetch a zip archive and keep the single member ending in ``member_suffix``."""
        with tempfile.TemporaryDirectory() as temp_dir:
            zip_path = self.download(url, Path(temp_dir) / "archive.zip")
            with zipfile.ZipFile(zip_path, "r") as zip_ref:
                members = [m for m in zip_ref.namelist() if m.endswith(member_suffix)]
                if len(members) != 1:
                    raise FetchError(f"Expected one *{member_suffix} file in {url}, found {members}")
                destination = self.target_dir / Path(members[0]).name
                with zip_ref.open(members[0]) as source, open(destination, "wb") as target:
                    target.write(source.read())
        return destination

    def fetch_source(self, key: str, spec: Dict[str, Any]) -> Dict[str, Any]:
        SnapshotSource(key)
        paths = []
        for url in expand_urls(spec):
            if url.endswith(".zip"):
                paths.append(self.download_and_extract(url, spec.get("member_suffix", ".xml")))
            else:
                paths.append(self.download(url, self.target_dir / url.rsplit("/", 1)[-1]))

        entry: Dict[str, Any] = {
            "version_label": spec.get("version_label", ""),
            "retrieval_date": spec.get("retrieval_date"),
            "digest": digest_files(paths),
            "url": spec.get("url") or spec.get("url_template") or spec.get("urls"),
        }
        names = [p.name for p in paths]
        if len(names) == 1 and "url_template" not in spec and "urls" not in spec:
            entry["path"] = names[0]
        else:
            entry["paths"] = names
        return entry

    def fetch_all(self, sources: Dict[str, Dict[str, Any]]) -> Dict[str, Any]:
        self.target_dir.mkdir(parents=True, exist_ok=True)
        manifest = {"sources": {}}
        for key in sorted(sources):
            self._report(f"Fetching {key}")
            manifest["sources"][key] = self.fetch_source(key, sources[key])
        return manifest


def write_manifest(manifest: Dict[str, Any], path: Path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Download enumeration snapshots and write their manifest.")
    parser.add_argument("--sources", default="snapshots/sources.json")
    parser.add_argument("--target", default="snapshots")
    parser.add_argument("--only", nargs="*", help="source keys to fetch (default: all)")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(levelname)s - %(message)s")

    with open(args.sources, "r", encoding="utf-8") as f:
        sources = json.load(f)["sources"]
    if args.only:
        sources = {k: v for k, v in sources.items() if k in args.only}

    try:
        manifest = SnapshotFetcher(Path(args.target)).fetch_all(sources)
    except (FetchError, ValueError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1
    path = write_manifest(manifest, Path(args.target) / "manifest.json")
    print(f"Wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
