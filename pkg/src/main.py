# File: src/main.py

import argparse
import logging
import sys
import traceback

from analysis import AnalysisError
from cli import ANALYSIS_CHOICES, cmd_analyze, cmd_export_graph, cmd_identify, cmd_ingest
from config import SNAPSHOT_DIR_ENV, RunConfig
from cpe_core import CpeError
from ingest import IngestError, MissingView1344
from refgraph import EmptyDomain, GraphError
from vulnid import VulnIdError

__version__ = "0.1.0"

EXIT_OK = 0
EXIT_INGEST = 2
EXIT_INVENTORY = 3
EXIT_ANALYSIS = 4

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="enumgraph",
        description="Ingest CVE/CWE/CAPEC/ATT&CK snapshots, identify vulnerable assets, and reproduce interoperability statistics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--snapshot-dir", help=f"snapshot directory (default: ${SNAPSHOT_DIR_ENV} or ./snapshots)")
    parser.add_argument("--manifest", help="manifest file (default: <snapshot-dir>/manifest.json)")
    parser.add_argument("--out", help="output directory (default: ./out)")
    parser.add_argument("--parity", action="store_true", help="pin bucket specs and table sizes to the published figures")
    parser.add_argument("--include-rejected", action="store_true", help="count REJECTED CVEs in histogram denominators")
    parser.add_argument(
        "--assume-any-version-matches", action="store_true",
        help="let an inventory name without a version satisfy version-ranged clauses",
    )
    parser.add_argument(
        "--expand-hierarchy", action="store_true",
        help="let CWE ancestors contribute CAPECs in the per-CVE statistics",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("ingest", help="verify digests and summarize every snapshot source")
    identify = commands.add_parser("identify", help="match an asset inventory against the NVD snapshot")
    identify.add_argument("inventory", help="file of '<asset_label><TAB><cpe 2.3 name>' lines")
    analyze = commands.add_parser("analyze", help="write analysis reports")
    analyze.add_argument("which", choices=ANALYSIS_CHOICES)
    commands.add_parser("export-graph", help="write the reference graph as a flat edge list")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig.resolve(
        snapshot_dir=args.snapshot_dir,
        manifest=args.manifest,
        output_dir=args.out,
        parity_mode=args.parity,
        include_rejected=args.include_rejected,
        assume_any_version_matches=args.assume_any_version_matches,
        expand_hierarchy=args.expand_hierarchy,
    )


def run(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    if args.command == "ingest":
        cmd_ingest(config, output_callback=print)
    elif args.command == "identify":
        cmd_identify(config, args.inventory, output_callback=print)
    elif args.command == "analyze":
        cmd_analyze(config, args.which, output_callback=print)
    elif args.command == "export-graph":
        cmd_export_graph(config, output_callback=print)
    return EXIT_OK


def exit_code_for(error: Exception) -> int:
    # an absent OWASP view is an analysis-input problem, not a broken snapshot
    if isinstance(error, (AnalysisError, MissingView1344, EmptyDomain)):
        return EXIT_ANALYSIS
    if isinstance(error, VulnIdError):
        return EXIT_INVENTORY
    if isinstance(error, (IngestError, GraphError, CpeError)):
        return EXIT_INGEST
    return 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s - %(levelname)s - %(message)s",
    )
    try:
        return run(args)
    except (AnalysisError, IngestError, GraphError, VulnIdError, CpeError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return exit_code_for(e)
    except Exception:
        tb = traceback.format_exc()
        print("Error caught!", file=sys.stderr)
        print(f"Error traceback: {tb}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
