"""Post-hoc risk explanations for sequential decision processes.

Builds an epsilon-radius state-transition graph from interaction logs, labels
nodes with binary or probabilistic risk, and explains individual states
through local linear surrogates over the reachable set, hop distances to
risk, and episode-wide traces.
"""

from .baseline import PerturbationSpec, grid_spec, perturb_explain
from .explain import (
    CAP_EXCEEDED,
    EpisodeTrace,
    Explanation,
    NoDirection,
    ReachableSet,
    direction_of_risk,
    direction_of_risk_regression,
    distance_to_risk,
    fit_logistic,
    fit_ridge,
    reachable,
    trace_episode,
)
from .graph import (
    GRAPH_FORMAT_VERSION,
    GraphEdge,
    GraphFormatError,
    GraphNode,
    TransitionGraph,
    build,
    load,
    save,
)
from .logmodel import (
    FeatureSchema,
    LogFormatError,
    Normalizer,
    OutOfRangeWarning,
    TransitionLog,
    TransitionRecord,
    emit,
    fit_normalizer,
    ingest,
    read_schema,
    write_schema,
)
from .render import (
    direction_matrix,
    heatmap_pixels,
    normalize_columns,
    read_trace_csv,
    render_heatmap,
    trace_csv,
    write_ppm,
)
from .risk import (
    BinaryRiskLabeling,
    ProbabilisticRisk,
    label_binary,
    risk_init,
    risk_iterate,
)
from .toyenvs import (
    GridMap,
    bundled_map,
    bundled_map_names,
    bundled_map_text,
    cliff_generate,
    grid_generate,
)

__version__ = "0.1.0"

__all__ = [
    "BinaryRiskLabeling",
    "CAP_EXCEEDED",
    "EpisodeTrace",
    "Explanation",
    "FeatureSchema",
    "GRAPH_FORMAT_VERSION",
    "GraphEdge",
    "GraphFormatError",
    "GraphNode",
    "GridMap",
    "LogFormatError",
    "NoDirection",
    "Normalizer",
    "OutOfRangeWarning",
    "PerturbationSpec",
    "ProbabilisticRisk",
    "ReachableSet",
    "TransitionGraph",
    "TransitionLog",
    "TransitionRecord",
    "build",
    "bundled_map",
    "bundled_map_names",
    "bundled_map_text",
    "cliff_generate",
    "direction_matrix",
    "direction_of_risk",
    "direction_of_risk_regression",
    "distance_to_risk",
    "emit",
    "fit_logistic",
    "fit_normalizer",
    "fit_ridge",
    "grid_generate",
    "grid_spec",
    "heatmap_pixels",
    "ingest",
    "label_binary",
    "load",
    "normalize_columns",
    "perturb_explain",
    "reachable",
    "read_schema",
    "read_trace_csv",
    "render_heatmap",
    "risk_init",
    "risk_iterate",
    "save",
    "trace_csv",
    "trace_episode",
    "write_ppm",
    "write_schema",
]
