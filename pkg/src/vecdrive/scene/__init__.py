from .dataset import Dataset, read_dataset, write_dataset
from .generate import generate_dataset, generate_scene
from .raster import rasterize_bev
from .types import (
    EGO_LENGTH,
    EGO_WIDTH,
    TIMESTEP,
    AgentTrack,
    BevGrid,
    Polyline,
    VectorScene,
    command_index,
    validate_scene,
)

__all__ = [
    "AgentTrack", "BevGrid", "Dataset", "EGO_LENGTH", "EGO_WIDTH",
    "Polyline", "TIMESTEP", "VectorScene", "command_index",
    "generate_dataset", "generate_scene", "rasterize_bev", "read_dataset",
    "validate_scene", "write_dataset",
]
