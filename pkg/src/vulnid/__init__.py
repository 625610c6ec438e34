from .identifier import (
    ClauseEvidence,
    CveIndex,
    MalformedNode,
    VulnMatch,
    evaluate_applicability,
    evaluate_clause,
    identify_vulnerabilities,
    version_verdict,
)
from .inventory import (
    Asset,
    AssetInventory,
    InventoryParseError,
    VulnIdError,
    WildcardInventoryError,
    check_concrete,
    load_inventory,
    parse_inventory,
)
