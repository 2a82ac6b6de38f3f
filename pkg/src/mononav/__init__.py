"""Monocular traversability: superpixel floor segmentation, junction masking and
inverse perspective mapping for a single camera frame."""

from .features import SafeZone, extract_features, sample_safe_zone_histogram, safe_zone_superpixels
from .floorseg import FloorModel, Seed, classify, region_grow, train_floor_model
from .imgcore import BLACK, WHITE, load_image, load_mask, rgb_to_lab, save_image, save_mask
from .ipm import Homography, PointCorrespondence, apply_homography, estimate_homography, warp_topdown
from .pipeline import PipelineConfig, PipelineResult, run_pipeline
from .preprocess import build_kernel, smooth
from .slic import SegmentLabels, SlicParams, segment

__version__ = "0.1.0"
