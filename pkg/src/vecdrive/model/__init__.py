from .attention import (
    AttnParams,
    FFParams,
    NormParams,
    attention_core,
    cross_attention_block,
    feed_forward_block,
    self_attention_block,
)
from .decoder import (
    AblationToggles,
    DrivingModel,
    ModelOutput,
    ParamRegistry,
    positional_encoding_2d,
)
from .queries import (
    IntraInstanceMask,
    all_allowed_mask,
    build_intra_instance_mask,
    compose_motion_queries,
    compose_queries,
    mask_for_perception,
    mask_for_planning,
    mask_for_prediction,
)

__all__ = [
    "AblationToggles", "AttnParams", "DrivingModel", "FFParams",
    "IntraInstanceMask", "ModelOutput", "NormParams", "ParamRegistry",
    "all_allowed_mask", "attention_core", "build_intra_instance_mask",
    "compose_motion_queries", "compose_queries", "cross_attention_block",
    "feed_forward_block", "mask_for_perception", "mask_for_planning",
    "mask_for_prediction", "positional_encoding_2d", "self_attention_block",
]
