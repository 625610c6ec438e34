from .attack_bundle import load_attack_bundle
from .capec_catalog import load_capec_catalog
from .cwe_catalog import load_cwe_catalog
from .errors import (
    CpeParseError,
    DigestMismatch,
    DuplicateCveId,
    IngestError,
    ManifestError,
    MissingView1344,
    SchemaMismatch,
    UnknownKillChain,
)
from .nvd_feeds import cpe22_uri_to_name, load_nvd_feeds
from .records import (
    ApplicabilityNode,
    AttackTechnique,
    CapecEntry,
    CpeMatchClause,
    CveEntry,
    CveStatus,
    CweEntry,
    CweKind,
    EntryStatus,
    InvertedVersionRange,
    Operator,
    OwaspMapping,
    VersionBound,
)
from .snapshot import (
    ManifestEntry,
    Snapshot,
    SnapshotSource,
    digest_files,
    load_manifest,
    verify_manifest,
)
