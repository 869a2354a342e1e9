"""Joint demosaicing and denoising of noisy Bayer RAW images.

Reconstructs a full-color RGB image from a single noisy RGGB RAW
observation by jointly optimizing two untrained convolutional networks:
a denoising branch fitting the 1-channel RAW and a demosaicing branch
producing the RGB output, coupled through a shared loss. No training
data is used; each image is solved as its own optimization problem.
"""

from jddip.bayer import apply_mask, lift, make_mask, mosaic
from jddip.metrics import psnr, ssim
from jddip.noise import NoiseSpec, add_gaussian, add_poisson, make_noisy_observation
from jddip.networks import ArchSpec, build_network, make_seed
from jddip.training import (
    TrainConfig,
    RunReport,
    denoise_loss,
    demosaic_loss,
    joint_loss,
    train_dm_dm,
    train_joint,
    train_single_dip,
)

__all__ = [
    "apply_mask",
    "lift",
    "make_mask",
    "mosaic",
    "psnr",
    "ssim",
    "NoiseSpec",
    "add_gaussian",
    "add_poisson",
    "make_noisy_observation",
    "ArchSpec",
    "build_network",
    "make_seed",
    "TrainConfig",
    "RunReport",
    "denoise_loss",
    "demosaic_loss",
    "joint_loss",
    "train_joint",
    "train_single_dip",
    "train_dm_dm",
]
