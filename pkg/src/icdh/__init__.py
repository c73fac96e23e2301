"""Interior color design helper.

Detects furniture in a room photo, extracts dominant colors, predicts the
top-3 wall color families with a small feed-forward network, renders each
recommendation onto the segmented wall, and improves through user feedback.
"""

__version__ = "0.1.0"

from .colors import (
    DEFAULT_PALETTE,
    ColorFamily,
    Hsl,
    Palette,
    Rgb8,
    decimal_to_rgb,
    hsl_to_rgb,
    nearest_family,
    rgb_to_decimal,
    rgb_to_hsl,
)
from .cluster import ColorKMeans, KMeansConfig, KMeansResult, dominant_color, kmeans, sample_pixels
from .detection import (
    BoundingBox,
    Detection,
    DetectionSet,
    FurnitureClass,
    fetch_detections_http,
    filter_furniture,
    load_detections_file,
)
from .features import (
    Dataset,
    FurnitureFeature,
    RoomAttributes,
    TrainingRecord,
    UserPreferences,
    encode,
    oracle_label,
    read_dataset,
    split_shuffle,
    synth_generate,
    write_dataset,
)
from .nn import MlpColorNet, MlpModel, Recommendation, TrainConfig, load_model, predict_top3, save_model
from .wallviz import recolor, sobel_edges, to_grayscale, wall_mask

__all__ = [
    "DEFAULT_PALETTE",
    "ColorFamily",
    "Hsl",
    "Palette",
    "Rgb8",
    "decimal_to_rgb",
    "hsl_to_rgb",
    "nearest_family",
    "rgb_to_decimal",
    "rgb_to_hsl",
    "ColorKMeans",
    "KMeansConfig",
    "KMeansResult",
    "dominant_color",
    "kmeans",
    "sample_pixels",
    "BoundingBox",
    "Detection",
    "DetectionSet",
    "FurnitureClass",
    "fetch_detections_http",
    "filter_furniture",
    "load_detections_file",
    "Dataset",
    "FurnitureFeature",
    "RoomAttributes",
    "TrainingRecord",
    "UserPreferences",
    "encode",
    "oracle_label",
    "read_dataset",
    "split_shuffle",
    "synth_generate",
    "write_dataset",
    "MlpColorNet",
    "MlpModel",
    "Recommendation",
    "TrainConfig",
    "load_model",
    "predict_top3",
    "save_model",
    "recolor",
    "sobel_edges",
    "to_grayscale",
    "wall_mask",
]
