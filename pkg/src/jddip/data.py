"""Dataset ingestion: lossless image decoding, cropping, sample images.

Inputs are 8- or 16-bit lossless files (PNG, TIFF, BMP, PPM); lossy
formats are rejected because compression artifacts would contaminate
the ground truth. Decoded values are divided by the bit-depth maximum
to land on [0, 1] as float64. Ordering is stable by filename.
"""

import os
from pathlib import Path

import numpy as np
from PIL import Image

LOSSLESS_EXTENSIONS = {".png", ".tif", ".tiff", ".bmp", ".ppm", ".pgm"}
SAMPLE_NAMES = ("astronaut", "chelsea", "coffee")


class IngestionError(ValueError):
    """Raised when a dataset file cannot be used as ground truth."""


def center_crop(image: np.ndarray, height: int, width: int) -> np.ndarray:
    """Crop the central height x width window."""
    h, w = image.shape[:2]
    if height > h or width > w:
        raise IngestionError(
            f"crop {height}x{width} larger than image {h}x{w}"
        )
    top = (h - height) // 2
    left = (w - width) // 2
    return image[top : top + height, left : left + width]


def crop_to_multiple(image: np.ndarray, factor: int) -> np.ndarray:
    """Center-crop so both spatial dims are divisible by factor."""
    h, w = image.shape[:2]
    return center_crop(image, (h // factor) * factor, (w // factor) * factor)


def load_image(path: str | Path) -> np.ndarray:
    """Decode one lossless file to an H x W x 3 array on [0, 1]."""
    path = Path(path)
    if path.suffix.lower() not in LOSSLESS_EXTENSIONS:
        raise IngestionError(f"refusing lossy or unknown format: {path}")
    try:
        with Image.open(path) as img:
            if img.mode in ("I;16", "I;16B", "I"):
                arr = np.asarray(img, dtype=np.float64) / 65535.0
                arr = np.stack([arr] * 3, axis=-1)
            else:
                arr = np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
    except (OSError, ValueError) as exc:
        raise IngestionError(f"cannot decode {path}: {exc}") from exc
    return np.clip(arr, 0.0, 1.0)


def ingest_dataset(
    path: str | Path, crop: int | None = None, pattern: str = "*"
) -> list[tuple[str, np.ndarray]]:
    """Load every lossless image under path, sorted by filename.

    If crop is given, every image is center-cropped to crop x crop.
    """
    path = Path(path)
    if not path.is_dir():
        raise IngestionError(f"dataset directory not found: {path}")
    entries = []
    for file in sorted(path.glob(pattern)):
        if not file.is_file() or file.suffix.lower() not in LOSSLESS_EXTENSIONS:
            continue
        image = load_image(file)
        if crop is not None:
            image = center_crop(image, crop, crop)
        entries.append((file.stem, image))
    if not entries:
        raise IngestionError(f"no lossless images found under {path}")
    return entries


def save_image(path: str | Path, image: np.ndarray) -> None:
    """Write an array on [0, 1] as an 8-bit PNG (grayscale if 2-D)."""
    data = np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0)
    quantized = np.round(data * 255.0).astype(np.uint8)
    os.makedirs(Path(path).parent, exist_ok=True)
    Image.fromarray(quantized).save(path)


def save_raw_image(path: str | Path, raw: np.ndarray) -> None:
    """Write a 1-channel array on [0, 1] as a 16-bit PNG."""
    data = np.clip(np.asarray(raw, dtype=np.float64), 0.0, 1.0)
    quantized = np.round(data * 65535.0).astype(np.uint16)
    os.makedirs(Path(path).parent, exist_ok=True)
    Image.fromarray(quantized).save(path)


def write_sample_dataset(
    outdir: str | Path, names: tuple[str, ...] = SAMPLE_NAMES
) -> list[Path]:
    """Materialize scikit-image's bundled photographs as a PNG dataset.

    Handy when no benchmark directory is available: three colorful
    natural photographs, written losslessly so ingestion round-trips.
    """
    from skimage import data as skdata

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for name in names:
        image = getattr(skdata, name)()
        target = outdir / f"{name}.png"
        Image.fromarray(image).save(target)
        written.append(target)
    return written
