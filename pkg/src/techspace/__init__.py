"""Economic-complexity analytics for firm-level technology diversification.

Patent corpus ingestion, revealed technological advantage, proximity and
relatedness density, method-of-reflections complexity, entry-prediction
panels, fixed-effects regressions, and technology-space exports.
"""

from .advantage import (
    AdvantageMatrix,
    RtaSlice,
    advantage_matrix,
    compute_rta,
    detect_entries,
    rta_from_matrix,
    scan_entry_series,
)
from .atlas import (
    Pipeline,
    PipelineConfig,
    SpaceGraph,
    export_i4t_heatmap,
    export_space,
    run_pipeline,
)
from .complexity import (
    ComplexityScores,
    TciSlice,
    complexity_ranks,
    figure2_dataset,
    mor,
    tci_transform,
)
from .corpus import (
    I4T_CATEGORIES,
    CountCube,
    I4TMap,
    SchemaConfig,
    build_counts,
    load_firms,
    load_gov_support,
    load_patents,
    load_taxonomy,
    merge_families,
    truncate_code,
)
from .econometrics import (
    RegressionResult,
    RegressionSpec,
    correlation_table,
    ols_fe,
    summary_stats,
    vif,
    welch_one_sided,
)
from .errors import DataError, NumericError, TechspaceError, ValidationError
from .panel import assemble_panel, box_cox_by_year, boxcox_apply, split
from .relatedness import (
    ProximityMatrix,
    density,
    density_matrix,
    density_panel,
    proximity,
    proximity_for_year,
)

__version__ = "1.0.0"

__all__ = [
    "AdvantageMatrix", "RtaSlice", "advantage_matrix", "compute_rta",
    "detect_entries", "rta_from_matrix", "scan_entry_series",
    "Pipeline", "PipelineConfig", "SpaceGraph", "export_i4t_heatmap",
    "export_space", "run_pipeline",
    "ComplexityScores", "TciSlice", "complexity_ranks", "figure2_dataset",
    "mor", "tci_transform",
    "I4T_CATEGORIES", "CountCube", "I4TMap", "SchemaConfig", "build_counts",
    "load_firms", "load_gov_support", "load_patents", "load_taxonomy",
    "merge_families", "truncate_code",
    "RegressionResult", "RegressionSpec", "correlation_table", "ols_fe",
    "summary_stats", "vif", "welch_one_sided",
    "DataError", "NumericError", "TechspaceError", "ValidationError",
    "assemble_panel", "box_cox_by_year", "boxcox_apply", "split",
    "ProximityMatrix", "density", "density_matrix", "density_panel",
    "proximity", "proximity_for_year",
    "__version__",
]
