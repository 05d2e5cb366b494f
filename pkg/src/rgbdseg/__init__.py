"""Fast graph-based object segmentation for RGB-D frames."""

from ._accel import BACKEND
from .config import PipelineConfig, load_config, profile_config
from .imgcore import CameraIntrinsics
from .io_datasets import FramePair, GroundTruth, load_frame
from .pipeline import PipelineResult, run_pipeline

__all__ = [
    "BACKEND",
    "CameraIntrinsics",
    "FramePair",
    "GroundTruth",
    "PipelineConfig",
    "PipelineResult",
    "load_config",
    "load_frame",
    "profile_config",
    "run_pipeline",
]

__version__ = "0.1.0"
