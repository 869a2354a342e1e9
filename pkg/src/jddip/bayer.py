"""RGGB Bayer color-filter-array primitives.

The Bayer pattern is the 2x2 tile

    R G
    G B

with red anchored at row 0, column 0, repeated over the sensor. Images
must therefore have even height and width so they hold a whole number of
tiles. All pixel data is real-valued in [0, 1]; 8-bit inputs are divided
by 255 at ingestion (see :mod:`jddip.data`).
"""

import numpy as np


class DimensionError(ValueError):
    """Raised when an array has the wrong shape, parity, or size."""


def _check_even_dims(height: int, width: int) -> None:
    if height <= 0 or width <= 0:
        raise DimensionError(f"dimensions must be positive, got {height}x{width}")
    if height % 2 or width % 2:
        raise DimensionError(
            f"dimensions must be even for whole RGGB tiles, got {height}x{width}"
        )


def validate_rgb(rgb: np.ndarray) -> None:
    """Check the H x W x 3, even-dim, finite, [0,1] invariants."""
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise DimensionError(f"expected HxWx3 array, got shape {rgb.shape}")
    _check_even_dims(rgb.shape[0], rgb.shape[1])
    if not np.all(np.isfinite(rgb)):
        raise ValueError("RGB image contains non-finite values")
    if rgb.min() < 0.0 or rgb.max() > 1.0:
        raise ValueError("RGB image values must lie in [0, 1]")


def validate_raw(raw: np.ndarray) -> None:
    """Check the H x W, even-dim, finite, [0,1] invariants."""
    if raw.ndim != 2:
        raise DimensionError(f"expected HxW array, got shape {raw.shape}")
    _check_even_dims(raw.shape[0], raw.shape[1])
    if not np.all(np.isfinite(raw)):
        raise ValueError("RAW image contains non-finite values")
    if raw.min() < 0.0 or raw.max() > 1.0:
        raise ValueError("RAW image values must lie in [0, 1]")


def make_mask(height: int, width: int) -> np.ndarray:
    """Binary H x W x 3 mask of which channel each pixel observes.

    Channel 0 (R) is 1 at (even row, even col), channel 1 (G) at
    (even, odd) and (odd, even), channel 2 (B) at (odd, odd). Exactly
    one channel is 1 at every pixel.
    """
    _check_even_dims(height, width)
    mask = np.zeros((height, width, 3), dtype=np.float64)
    mask[0::2, 0::2, 0] = 1.0
    mask[0::2, 1::2, 1] = 1.0
    mask[1::2, 0::2, 1] = 1.0
    mask[1::2, 1::2, 2] = 1.0
    return mask


def mosaic(rgb: np.ndarray) -> np.ndarray:
    """Sample an RGB image through the RGGB pattern into 1-channel RAW.

    output[i, j] == rgb[i, j, c(i, j)] where c(i, j) is the Bayer
    channel at that pixel. Pure sampling, no interpolation.
    """
    validate_rgb(rgb)
    raw = np.empty(rgb.shape[:2], dtype=rgb.dtype)
    raw[0::2, 0::2] = rgb[0::2, 0::2, 0]
    raw[0::2, 1::2] = rgb[0::2, 1::2, 1]
    raw[1::2, 0::2] = rgb[1::2, 0::2, 1]
    raw[1::2, 1::2] = rgb[1::2, 1::2, 2]
    return raw


def lift(raw: np.ndarray) -> np.ndarray:
    """Place 1-channel RAW samples into a sparse H x W x 3 array.

    Each sample lands in its Bayer channel; the other two channels are 0.
    Inverse of :func:`mosaic` up to the unobserved entries:
    ``mosaic(lift(r)) == r`` exactly.
    """
    validate_raw(raw)
    return raw[:, :, None] * make_mask(*raw.shape)


def apply_mask(arr: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Zero out all entries off the Bayer positions. Idempotent."""
    if arr.shape != mask.shape:
        raise DimensionError(
            f"array shape {arr.shape} does not match mask shape {mask.shape}"
        )
    return arr * mask
