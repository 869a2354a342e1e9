"""PSNR and SSIM between reconstructions and ground truth.

Both metrics assume images on [0, 1] (peak value 1.0) and are computed
over the full array with no border crop. SSIM follows the standard
windowed formulation: 11x11 Gaussian window with sigma 1.5, K1=0.01,
K2=0.03, local statistics taken only where the window fits entirely
inside the image, per-channel values averaged for RGB.
"""

import math

import numpy as np
from scipy.signal import fftconvolve

from jddip.bayer import DimensionError

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _check_pair(truth: np.ndarray, estimate: np.ndarray) -> None:
    if truth.shape != estimate.shape:
        raise DimensionError(
            f"shape mismatch: {truth.shape} vs {estimate.shape}"
        )


def psnr(truth: np.ndarray, estimate: np.ndarray) -> float:
    """10 * log10(1 / MSE); math.inf for identical images."""
    _check_pair(truth, estimate)
    mse = float(np.mean((np.asarray(truth, dtype=np.float64) - estimate) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) / 2
    coords = np.arange(size) - half
    g = np.exp(-(coords**2) / (2 * sigma**2))
    window = np.outer(g, g)
    return window / window.sum()


def _ssim_single(x: np.ndarray, y: np.ndarray) -> float:
    window = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    c1 = SSIM_K1**2
    c2 = SSIM_K2**2

    def filt(a: np.ndarray) -> np.ndarray:
        return fftconvolve(a, window, mode="valid")

    mu_x = filt(x)
    mu_y = filt(y)
    var_x = filt(x * x) - mu_x**2
    var_y = filt(y * y) - mu_y**2
    cov = filt(x * y) - mu_x * mu_y
    num = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
    den = (mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def ssim(truth: np.ndarray, estimate: np.ndarray) -> float:
    """Mean structural similarity; per-channel averaged for RGB input."""
    _check_pair(truth, estimate)
    t = np.asarray(truth, dtype=np.float64)
    e = np.asarray(estimate, dtype=np.float64)
    if t.ndim == 2:
        t = t[:, :, None]
        e = e[:, :, None]
    if t.ndim != 3:
        raise DimensionError(f"expected HxW or HxWxC image, got shape {truth.shape}")
    if t.shape[0] < SSIM_WINDOW or t.shape[1] < SSIM_WINDOW:
        raise DimensionError(
            f"image {t.shape[0]}x{t.shape[1]} smaller than the "
            f"{SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
        )
    return float(
        np.mean([_ssim_single(t[:, :, c], e[:, :, c]) for c in range(t.shape[2])])
    )
