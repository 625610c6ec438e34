from .commands import (
    ANALYSES,
    ANALYSIS_CHOICES,
    SourceBundle,
    SourceLoader,
    cmd_analyze,
    cmd_export_graph,
    cmd_identify,
    cmd_ingest,
)
