from .attack_sources import (
    NETWORK_SENSORS,
    DataSourceCount,
    data_source_ranking,
    network_visible_techniques,
    tactic_coverage,
    techniques_without_data_sources,
)
from .buckets import (
    CAPECS_PER_CVE,
    TECHNIQUES_PER_CVE,
    TECHNIQUES_PER_CVE_PUBLISHED,
    Bucket,
    BucketSpec,
    Histogram,
    build_histogram,
)
from .errors import AnalysisError, BucketGap, InvalidBucketSpec, MissingSourceError
from .interop import (
    OwaspCount,
    ReferenceSymmetry,
    attack_aggregates,
    capec_aggregates,
    cve_attack_histogram,
    cve_capec_histogram,
    cve_cwe_usage,
    network_capec_coverage,
    owasp_counts,
    reference_symmetry,
    single_technique_cwes,
)
