"""Untrained encoder-decoder networks and their fixed random input seeds.

The architecture is an hourglass with skip connections: each scale
halves the spatial resolution on the way down and restores it with
bilinear upsampling on the way up, concatenating a thin skip branch at
every scale. Reflection padding, leaky rectifier activations, batch
normalization, and a sigmoid output keep every output value in [0, 1].
Spatial dimensions must be divisible by 2**scales.

Two configurations matter in practice: the full-size net (5 scales, 128
channels) for paper-scale runs, and shrunken variants for desk-scale
tests and ablations. All knobs live in :class:`ArchSpec`.
"""

from dataclasses import asdict, dataclass

import numpy as np
import torch
from torch import nn

from jddip.bayer import DimensionError
from jddip.noise import ConfigurationError

NORMAL_STD = 0.1  # N(0, 0.01) read as variance 0.01
UNIFORM_HIGH = 0.1  # U(0, 0.1)


@dataclass(frozen=True)
class ArchSpec:
    """Knobs of the hourglass: depth, widths, seed channels.

    normalize_input controls batch normalization at the first scale.
    When False, the first down and skip blocks omit it, so the input
    seed's amplitude and mean reach the network unchanged; with it in
    place, per-channel normalization of an i.i.d. seed makes the choice
    of seed distribution (normal vs uniform) immaterial.

    skip_start is the first scale that gets a skip branch. skip_start=1
    drops the full-resolution skip, which closes the direct path from
    the seed to the output; the output then comes entirely through the
    downsampled trunk.
    """

    scales: int = 5
    channels: int = 128
    skip_channels: int = 4
    input_channels: int = 32
    normalize_input: bool = True
    skip_start: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ArchSpec":
        return cls(**d)


def make_seed(
    channels: int,
    height: int,
    width: int,
    distribution: str = "normal",
    rng_seed: int = 0,
    dtype: torch.dtype = torch.float32,
) -> torch.Tensor:
    """Fixed random input tensor of shape (1, channels, height, width).

    distribution is "normal" (zero mean, std 0.1) or "uniform" (on
    [0, 0.1)). Created once per run and held fixed for the whole
    optimization; deterministic given rng_seed.
    """
    if channels <= 0 or height <= 0 or width <= 0:
        raise DimensionError(
            f"seed dims must be positive, got {channels}x{height}x{width}"
        )
    rng = np.random.default_rng(rng_seed)
    if distribution == "normal":
        data = rng.normal(0.0, NORMAL_STD, size=(1, channels, height, width))
    elif distribution == "uniform":
        data = rng.uniform(0.0, UNIFORM_HIGH, size=(1, channels, height, width))
    else:
        raise ConfigurationError(f"unknown seed distribution {distribution!r}")
    return torch.from_numpy(data).to(dtype)


def _conv(cin: int, cout: int, kernel: int, stride: int = 1) -> list[nn.Module]:
    pad = (kernel - 1) // 2
    layers: list[nn.Module] = []
    if pad:
        layers.append(nn.ReflectionPad2d(pad))
    layers.append(nn.Conv2d(cin, cout, kernel, stride=stride))
    return layers


def _block(*convs: list[nn.Module], norm: bool = True) -> nn.Sequential:
    layers: list[nn.Module] = []
    for conv in convs:
        layers.extend(conv)
        out_ch = layers[-1].out_channels
        if norm:
            layers.append(nn.BatchNorm2d(out_ch))
        layers.append(nn.LeakyReLU(0.2))
    return nn.Sequential(*layers)


class HourglassNet(nn.Module):
    """Skip-connected encoder-decoder mapping a seed tensor to an image."""

    def __init__(self, out_channels: int, arch: ArchSpec):
        super().__init__()
        if out_channels not in (1, 3):
            raise ConfigurationError(f"out_channels must be 1 or 3, got {out_channels}")
        if arch.scales < 1 or arch.channels < 1 or arch.skip_channels < 1:
            raise ConfigurationError(f"invalid architecture {arch}")
        if not 0 <= arch.skip_start < arch.scales:
            raise ConfigurationError(f"skip_start out of range in {arch}")
        self.out_channels = out_channels
        self.arch = arch

        ch = arch.channels
        self.down = nn.ModuleList()
        self.skip = nn.ModuleList()
        self.up = nn.ModuleList()
        cin = arch.input_channels
        for scale in range(arch.scales):
            norm = arch.normalize_input or scale > 0
            if scale >= arch.skip_start:
                self.skip.append(_block(_conv(cin, arch.skip_channels, 1), norm=norm))
            else:
                self.skip.append(nn.Identity())
            self.down.append(
                _block(_conv(cin, ch, 3, stride=2), _conv(ch, ch, 3), norm=norm)
            )
            cin = ch
        for scale in range(arch.scales):
            width = ch + (arch.skip_channels if scale >= arch.skip_start else 0)
            self.up.append(_block(_conv(width, ch, 3), _conv(ch, ch, 1)))
        self.head = nn.Sequential(nn.Conv2d(ch, out_channels, 1), nn.Sigmoid())

    def forward(self, z: torch.Tensor) -> torch.Tensor:
        h, w = z.shape[-2:]
        factor = 2**self.arch.scales
        if h % factor or w % factor:
            raise DimensionError(
                f"spatial size {h}x{w} not divisible by 2**scales = {factor}"
            )
        sizes = []
        skips = []
        x = z
        for scale, (down, skip) in enumerate(zip(self.down, self.skip)):
            sizes.append(x.shape[-2:])
            skips.append(skip(x) if scale >= self.arch.skip_start else None)
            x = down(x)
        for scale in reversed(range(self.arch.scales)):
            x = nn.functional.interpolate(
                x, size=sizes[scale], mode="bilinear", align_corners=False
            )
            if skips[scale] is not None:
                x = torch.cat([x, skips[scale]], dim=1)
            x = self.up[scale](x)
        return self.head(x)

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())


def build_network(
    out_channels: int,
    arch: ArchSpec,
    rng_seed: int = 0,
    dtype: torch.dtype = torch.float32,
) -> HourglassNet:
    """Construct an hourglass net with deterministic initialization."""
    gen_state = torch.random.get_rng_state()
    try:
        torch.manual_seed(rng_seed)
        net = HourglassNet(out_channels, arch)
    finally:
        torch.random.set_rng_state(gen_state)
    return net.to(dtype)
