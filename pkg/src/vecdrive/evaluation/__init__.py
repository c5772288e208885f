from .ablation import AblationSpec, format_table, load_matrix_file, run_ablation
from .evaluate import (
    OracleModel,
    RunManifest,
    check_compatible,
    evaluate_checkpoint,
    evaluate_model,
    sha256_of,
)
from .metrics import (
    AP_THRESHOLDS,
    DE_INDICES,
    MapGroundTruth,
    MapPrediction,
    MetricsReport,
    average_precision,
    chamfer_of_matches,
    collision_rate,
    displacement_error,
    map_metrics,
    scene_collision_flags,
)
from .plots import emit_scene_svg, world_to_view

__all__ = [
    "AP_THRESHOLDS", "AblationSpec", "DE_INDICES", "MapGroundTruth",
    "MapPrediction", "MetricsReport", "OracleModel", "RunManifest",
    "average_precision", "chamfer_of_matches", "check_compatible",
    "collision_rate", "displacement_error", "emit_scene_svg",
    "evaluate_checkpoint", "evaluate_model", "format_table",
    "load_matrix_file", "map_metrics", "run_ablation", "scene_collision_flags",
    "sha256_of", "world_to_view",
]
