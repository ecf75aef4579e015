"""Multi-focus image fusion, quality metrics and focal-stack tools.

Images are 2-D float64 arrays of shape (height, width) with samples in [0, 1].
"""

from ._mfuse import (
    Error,
    baseline_fuse,
    defocus_render,
    depth_code,
    dof_curve,
    gaussian_blur,
    load_image,
    make_scene,
    map_projection,
    metrics,
    mwgf_fuse,
    reconstruct_from_gradients,
    save_image,
    sobel_gradient,
)

BASELINES = ("average", "lap", "dwt", "pca", "gra", "fsd")

__all__ = [
    "BASELINES",
    "Error",
    "baseline_fuse",
    "defocus_render",
    "depth_code",
    "dof_curve",
    "gaussian_blur",
    "load_image",
    "make_scene",
    "map_projection",
    "metrics",
    "mwgf_fuse",
    "reconstruct_from_gradients",
    "save_image",
    "sobel_gradient",
]
