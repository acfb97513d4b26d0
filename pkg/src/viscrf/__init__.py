"""Classical-receptive-field vision model: multiscale center-surround edge
maps of tile-illusion stimuli with Hough-based tilt analysis."""

from .kernels import DoGParams, Kernel, dog_kernel, gaussian_kernel, log_kernel, window_size
from .raster import CropRect, Raster, crop, read_image, rotate90, write_raster
from .scalespace import (
    EdgeLayer,
    EdgeMap,
    ScaleSelection,
    ThresholdPolicy,
    binarize,
    convolve,
    dog_response,
    emap_dog,
    emap_log,
    render_jetwhite,
    select_scales,
)
from .stimuli import CafeWallSpec, DotGridSpec, cafe_wall, dot_checkerboard, gap_variant
from .tiltanalysis import (
    HoughParams,
    LineSegment,
    TiltStats,
    bin_orientation,
    extract_segments,
    hough_accumulate,
    hough_peaks,
    run_analysis,
    tilt_statistics,
)

__version__ = "0.1.0"

__all__ = [
    "CafeWallSpec",
    "CropRect",
    "DoGParams",
    "DotGridSpec",
    "EdgeLayer",
    "EdgeMap",
    "HoughParams",
    "Kernel",
    "LineSegment",
    "Raster",
    "ScaleSelection",
    "ThresholdPolicy",
    "TiltStats",
    "bin_orientation",
    "binarize",
    "cafe_wall",
    "convolve",
    "crop",
    "dog_kernel",
    "dog_response",
    "dot_checkerboard",
    "emap_dog",
    "emap_log",
    "extract_segments",
    "gap_variant",
    "gaussian_kernel",
    "hough_accumulate",
    "hough_peaks",
    "log_kernel",
    "read_image",
    "render_jetwhite",
    "rotate90",
    "run_analysis",
    "select_scales",
    "tilt_statistics",
    "window_size",
    "write_raster",
]
