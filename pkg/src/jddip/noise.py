"""Sensor noise simulation on clean RAW images.

Two families:

* additive Gaussian read noise, standard deviation given on the 8-bit
  0-255 scale (so sigma=25 means 25/255 on [0,1] data);
* pixel-wise Poisson shot noise, where a pixel x in [0,1] is replaced
  by Poisson(lambda * x) / lambda, so the expected value stays x and the
  variance x / lambda shrinks as the rate multiplier lambda grows.

Sampling uses numpy's PCG64 generator seeded from NoiseSpec.rng_seed, so
the same (input, spec) pair reproduces bit-identical output anywhere.
Outputs are clipped to [0,1] after corruption (a sensor saturates);
set clip=False for sensitivity studies.
"""

from dataclasses import dataclass

import numpy as np

from jddip.bayer import lift, mosaic, validate_raw

GAUSSIAN = "gaussian"
POISSON = "poisson"
FAMILIES = (GAUSSIAN, POISSON)


class ConfigurationError(ValueError):
    """Raised when a noise spec does not match the requested operation."""


@dataclass(frozen=True)
class NoiseSpec:
    """Noise family, intensity and RNG seed for one corruption.

    intensity is sigma on the 8-bit scale for gaussian, the rate
    multiplier lambda for poisson.
    """

    family: str
    intensity: float
    rng_seed: int = 0
    clip: bool = True

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ConfigurationError(f"unknown noise family {self.family!r}")
        if not self.intensity > 0:
            raise ConfigurationError(f"intensity must be > 0, got {self.intensity}")


def _finalize(noisy: np.ndarray, spec: NoiseSpec) -> np.ndarray:
    return np.clip(noisy, 0.0, 1.0) if spec.clip else noisy


def add_gaussian(raw: np.ndarray, spec: NoiseSpec) -> np.ndarray:
    """clip(raw + e, 0, 1) with e ~ N(0, (intensity/255)^2) i.i.d."""
    if spec.family != GAUSSIAN:
        raise ConfigurationError(f"add_gaussian called with family {spec.family!r}")
    validate_raw(raw)
    rng = np.random.default_rng(spec.rng_seed)
    noise = rng.normal(0.0, spec.intensity / 255.0, size=raw.shape)
    return _finalize(raw + noise, spec)


def add_poisson(raw: np.ndarray, spec: NoiseSpec) -> np.ndarray:
    """clip(Poisson(lambda * raw) / lambda, 0, 1), pixel-wise independent."""
    if spec.family != POISSON:
        raise ConfigurationError(f"add_poisson called with family {spec.family!r}")
    validate_raw(raw)
    rng = np.random.default_rng(spec.rng_seed)
    counts = rng.poisson(spec.intensity * raw).astype(np.float64)
    return _finalize(counts / spec.intensity, spec)


def corrupt(raw: np.ndarray, spec: NoiseSpec) -> np.ndarray:
    """Dispatch on spec.family."""
    if spec.family == GAUSSIAN:
        return add_gaussian(raw, spec)
    return add_poisson(raw, spec)


def make_noisy_observation(
    rgb_truth: np.ndarray, spec: NoiseSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Simulate the (noisy RAW, sparse 3-channel lift) observation pair.

    The pair is consistent by construction: lift(first) == second.
    """
    noisy_raw = corrupt(mosaic(rgb_truth), spec)
    return noisy_raw, lift(noisy_raw)
