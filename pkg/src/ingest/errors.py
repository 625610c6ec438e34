# File: ingest/errors.py
from typing import Optional


class IngestError(ValueError):
    """Base class for snapshot loading failures."""


class SchemaMismatch(IngestError):
    pass


class DuplicateCveId(IngestError):
    pass


class CpeParseError(IngestError):
    def __init__(self, cve_id: str, criterion: str, reason: str):
        super().__init__(f"{cve_id}: cannot parse CPE '{criterion}': {reason}")
        self.cve_id = cve_id
        self.criterion = criterion


class MissingView1344(IngestError):
    """The CWE catalog carries no OWASP Top Ten 2021 view."""


class UnknownKillChain(IngestError):
    pass


class DigestMismatch(IngestError):
    def __init__(self, source: str, expected: str, actual: str, path: Optional[str] = None):
        where = f" ({path})" if path else ""
        super().__init__(f"Digest mismatch for {source}{where}: expected {expected}, got {actual}")
        self.source = source
        self.expected = expected
        self.actual = actual


class ManifestError(IngestError):
    pass
