"""Missing-data reconstruction for multi-band rasters with a two-input residual CNN.

Images are NumPy arrays of shape (bands, height, width); masks are 2-D uint8
arrays with 1 for valid pixels and 0 for missing ones.
"""

from ._core import (
    ArgumentError,
    ConfigError,
    Error,
    FormatError,
    IoError,
    Network,
    NumericError,
    ShapeError,
    apply_mask,
    cc,
    cloud_mask,
    copy_fill,
    evaluate,
    gradient_check,
    lf_reconstruct,
    psnr,
    read_tensor,
    sam,
    slcoff_mask,
    ssim,
    stripe_mask,
    synth_scene,
    write_tensor,
)

__all__ = [
    "ArgumentError",
    "ConfigError",
    "Error",
    "FormatError",
    "IoError",
    "Network",
    "NumericError",
    "ShapeError",
    "apply_mask",
    "cc",
    "cloud_mask",
    "copy_fill",
    "evaluate",
    "gradient_check",
    "lf_reconstruct",
    "psnr",
    "read_tensor",
    "sam",
    "slcoff_mask",
    "ssim",
    "stripe_mask",
    "synth_scene",
    "write_tensor",
]

__version__ = "0.1.0"
