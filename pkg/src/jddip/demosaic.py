"""Bilinear demosaicing of an RGGB RAW image.

Classical convolution-based interpolation, used as a non-learned
reference point: green from its 4-neighborhood, red and blue from
their 8-neighborhoods.
"""

import numpy as np
from scipy.ndimage import convolve

from jddip.bayer import lift, make_mask, validate_raw

_KERNEL_G = np.array([[0, 1, 0], [1, 4, 1], [0, 1, 0]], dtype=np.float64) / 4.0
_KERNEL_RB = np.array([[1, 2, 1], [2, 4, 2], [1, 2, 1]], dtype=np.float64) / 4.0


def bilinear_demosaic(raw: np.ndarray) -> np.ndarray:
    """Interpolate a full H x W x 3 image from 1-channel RGGB RAW."""
    validate_raw(raw)
    sparse = lift(raw)
    mask = make_mask(*raw.shape)
    out = np.empty_like(sparse)
    for c, kernel in ((0, _KERNEL_RB), (1, _KERNEL_G), (2, _KERNEL_RB)):
        out[:, :, c] = convolve(sparse[:, :, c], kernel, mode="mirror")
        # mirror-edge weight loss: renormalize by the convolved mask
        weight = convolve(mask[:, :, c], kernel, mode="mirror")
        out[:, :, c] /= weight
    return np.clip(out, 0.0, 1.0)
