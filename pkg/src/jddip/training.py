"""Joint optimization of the denoising and demosaicing networks.

One run fits two untrained networks to a single noisy RAW observation:

* the denoising branch (1-channel output) fits the noisy RAW directly;
* the demosaicing branch (3-channel output) is pulled toward the lifted
  denoiser output at the Bayer positions, plus an alpha-weighted data
  term against the original noisy observation at the same positions.

The two branch losses are combined as sqrt(l_dn) + sqrt(l_dm) and both
parameter sets take a single Adam step per iteration, with per-branch
learning rates. The gradient of the guidance term flows into both
networks, so the demosaicer feeds back into the denoiser.

Also provided: the single-network baselines (uniform- or normal-seeded
masked inpainting) and the two-demosaicer ablation that controls for
parameter count.

All losses are plain MSE with the mean taken over every array entry
(off-Bayer zeros included), so only the loss scale, not the optimum,
depends on the mask density.
"""

import hashlib
import json
import math
import time
from dataclasses import dataclass, field, asdict

import numpy as np
import torch

from jddip import metrics
from jddip.bayer import DimensionError, make_mask
from jddip.networks import ArchSpec, build_network, make_seed
from jddip.noise import ConfigurationError

METHODS = ("ours", "dip_u", "dip_n", "dm_dm")


class TrainingDiverged(RuntimeError):
    """Raised when the joint loss stops being finite."""

    def __init__(self, iteration: int, losses: tuple):
        super().__init__(f"non-finite loss at iteration {iteration}: {losses}")
        self.iteration = iteration
        self.losses = losses


@dataclass(frozen=True)
class TrainConfig:
    method: str = "ours"
    alpha: float = 0.1
    lr_dn: float = 5e-3
    lr_dm: float = 5e-2
    iterations: int = 5000
    smoothing_beta: float = 0.99
    eval_every: int = 100
    arch: ArchSpec = field(default_factory=ArchSpec)
    rng_seed: int = 0
    detach_guidance: bool = False

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ConfigurationError(f"unknown method {self.method!r}")
        if self.alpha < 0:
            raise ConfigurationError("alpha must be >= 0")
        if self.lr_dn <= 0 or self.lr_dm <= 0:
            raise ConfigurationError("learning rates must be > 0")
        if self.iterations <= 0:
            raise ConfigurationError("iterations must be > 0")
        if not 0 < self.smoothing_beta < 1:
            raise ConfigurationError("smoothing_beta must lie in (0, 1)")
        if self.eval_every <= 0:
            raise ConfigurationError("eval_every must be > 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["arch"] = self.arch.to_dict()
        return d

    def config_hash(self) -> str:
        # seeds are provenance, not configuration: repeats of one
        # experiment share the hash and differ only in rng_seed
        payload = self.to_dict()
        payload.pop("rng_seed")
        return hashlib.sha256(
            json.dumps(payload, sort_keys=True).encode()
        ).hexdigest()[:16]


def derive_seed(base: int, label: str) -> int:
    """Stable 63-bit child seed for a named RNG stream."""
    digest = hashlib.blake2b(f"{base}|{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


@dataclass
class RunReport:
    """Everything needed to interpret and replay one optimization run."""

    method: str
    config: dict
    config_hash: str
    seeds: dict
    final: dict
    trajectory: list
    loss_history: list
    image_id: str | None = None
    noise: dict | None = None
    wall_time_s: float = 0.0

    def to_row(self) -> dict:
        """Canonical machine-readable row; volatile timing excluded."""
        row = asdict(self)
        row.pop("wall_time_s")
        return row


def denoise_loss(dn_out: torch.Tensor, noisy_raw: torch.Tensor) -> torch.Tensor:
    """MSE between the denoiser output and the noisy 1-channel RAW."""
    if dn_out.shape != noisy_raw.shape:
        raise DimensionError(f"shape mismatch: {dn_out.shape} vs {noisy_raw.shape}")
    return torch.mean((dn_out - noisy_raw) ** 2)


def demosaic_loss(
    dm_out: torch.Tensor,
    guidance_3ch: torch.Tensor,
    noisy_3ch: torch.Tensor,
    mask: torch.Tensor,
    alpha: float,
) -> torch.Tensor:
    """Masked guidance term plus alpha-weighted masked data term.

    guidance_3ch is the lifted denoiser output (or, in the ablation, the
    second demosaicer's output); both terms average over all H*W*3
    entries. Gradients flow through guidance_3ch unless the caller
    detached it.
    """
    if dm_out.shape != guidance_3ch.shape or dm_out.shape != noisy_3ch.shape:
        raise DimensionError(
            f"shape mismatch: {dm_out.shape} vs {guidance_3ch.shape} vs {noisy_3ch.shape}"
        )
    if dm_out.shape != mask.shape:
        raise DimensionError(f"mask shape {mask.shape} does not match {dm_out.shape}")
    masked_out = dm_out * mask
    guide = torch.mean((guidance_3ch * mask - masked_out) ** 2)
    data = torch.mean((noisy_3ch * mask - masked_out) ** 2)
    return guide + alpha * data


def joint_loss(l_dn: torch.Tensor, l_dm: torch.Tensor) -> torch.Tensor:
    """sqrt(l_dn) + sqrt(l_dm); both inputs must be non-negative."""
    dn_val = float(l_dn.detach()) if isinstance(l_dn, torch.Tensor) else float(l_dn)
    dm_val = float(l_dm.detach()) if isinstance(l_dm, torch.Tensor) else float(l_dm)
    if dn_val < 0 or dm_val < 0:
        raise ValueError(f"branch losses must be >= 0, got {dn_val}, {dm_val}")
    if not isinstance(l_dn, torch.Tensor):
        return math.sqrt(dn_val) + math.sqrt(dm_val)
    return torch.sqrt(l_dn) + torch.sqrt(l_dm)


def lift_torch(raw_1ch: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Differentiable lift: place 1-channel values at their Bayer channel."""
    return raw_1ch * mask


def _to_image(t: torch.Tensor) -> np.ndarray:
    """(1, C, H, W) tensor -> HxWxC (or HxW) float64 array."""
    arr = t.detach().cpu().numpy()[0].astype(np.float64)
    if arr.shape[0] == 1:
        return arr[0]
    return np.transpose(arr, (1, 2, 0))


def _score(truth: np.ndarray, est: np.ndarray) -> dict:
    return {
        "psnr": metrics.psnr(truth, np.clip(est, 0.0, 1.0)),
        "ssim": metrics.ssim(truth, np.clip(est, 0.0, 1.0)),
    }


def _seed_distribution(method: str) -> str:
    return "uniform" if method == "dip_u" else "normal"


def _prepare(truth: np.ndarray, noisy_pair, config: TrainConfig):
    noisy_raw, noisy_3ch = noisy_pair
    h, w = noisy_raw.shape
    factor = 2**config.arch.scales
    if h % factor or w % factor:
        raise DimensionError(
            f"image {h}x{w} not divisible by 2**scales = {factor}; crop first"
        )
    mask_t = torch.from_numpy(
        np.transpose(make_mask(h, w), (2, 0, 1))[None]
    ).float()
    raw_t = torch.from_numpy(noisy_raw[None, None]).float()
    obs_t = torch.from_numpy(np.transpose(noisy_3ch, (2, 0, 1))[None]).float()
    return h, w, mask_t, raw_t, obs_t


def train_joint(
    truth: np.ndarray,
    noisy_pair: tuple[np.ndarray, np.ndarray],
    config: TrainConfig,
    iteration_hook=None,
) -> tuple[np.ndarray, np.ndarray, RunReport]:
    """Run the coupled two-branch optimization.

    Returns (final demosaicer output, running-average output, report).
    iteration_hook, if given, is called as hook(iteration, out_dm,
    smoothed) with numpy copies after each step.
    """
    if config.method != "ours":
        raise ConfigurationError(f"train_joint requires method 'ours', got {config.method!r}")
    h, w, mask_t, raw_t, obs_t = _prepare(truth, noisy_pair, config)
    arch = config.arch
    seeds = {
        "param_dn": derive_seed(config.rng_seed, "param_dn"),
        "param_dm": derive_seed(config.rng_seed, "param_dm"),
        "input_dn": derive_seed(config.rng_seed, "input_dn"),
        "input_dm": derive_seed(config.rng_seed, "input_dm"),
    }
    net_dn = build_network(1, arch, rng_seed=seeds["param_dn"])
    net_dm = build_network(3, arch, rng_seed=seeds["param_dm"])
    z_dn = make_seed(arch.input_channels, h, w, "normal", seeds["input_dn"])
    z_dm = make_seed(arch.input_channels, h, w, "normal", seeds["input_dm"])
    optimizer = torch.optim.Adam(
        [
            {"params": net_dn.parameters(), "lr": config.lr_dn},
            {"params": net_dm.parameters(), "lr": config.lr_dm},
        ]
    )

    smoothed = None
    trajectory: list[dict] = []
    loss_history: list[list[float]] = []
    start = time.monotonic()
    for it in range(config.iterations):
        optimizer.zero_grad()
        out_dn = net_dn(z_dn)
        out_dm = net_dm(z_dm)
        l_dn = denoise_loss(out_dn, raw_t)
        guidance = lift_torch(out_dn, mask_t)
        if config.detach_guidance:
            guidance = guidance.detach()
        l_dm = demosaic_loss(out_dm, guidance, obs_t, mask_t, config.alpha)
        loss = joint_loss(l_dn, l_dm)
        if not torch.isfinite(loss):
            raise TrainingDiverged(it, (l_dn.item(), l_dm.item(), loss.item()))
        loss.backward()
        optimizer.step()
        loss_history.append([float(l_dn.detach()), float(l_dm.detach()), float(loss.detach())])

        with torch.no_grad():
            # the running average is kept in float64 so it can be replayed
            # exactly from the logged per-iteration outputs
            out_detached = out_dm.detach().to(torch.float64)
            if smoothed is None:
                smoothed = out_detached.clone()
            else:
                smoothed.mul_(config.smoothing_beta).add_(
                    out_detached, alpha=1.0 - config.smoothing_beta
                )
        if iteration_hook is not None:
            iteration_hook(it, _to_image(out_detached), _to_image(smoothed))
        if (it + 1) % config.eval_every == 0 or it + 1 == config.iterations:
            trajectory.append(
                {
                    "iteration": it + 1,
                    "ours": _score(truth, _to_image(out_detached)),
                    "ours_plus": _score(truth, _to_image(smoothed)),
                }
            )

    ours = _to_image(net_dm(z_dm))
    ours_plus = _to_image(smoothed)
    report = RunReport(
        method=config.method,
        config=config.to_dict(),
        config_hash=config.config_hash(),
        seeds=seeds,
        final={"ours": _score(truth, ours), "ours_plus": _score(truth, ours_plus)},
        trajectory=trajectory,
        loss_history=loss_history,
        wall_time_s=time.monotonic() - start,
    )
    return ours, ours_plus, report


def train_single_dip(
    truth: np.ndarray,
    noisy_pair: tuple[np.ndarray, np.ndarray],
    config: TrainConfig,
) -> tuple[np.ndarray, RunReport]:
    """Single-network baseline: masked inpainting of the noisy observation.

    The seed tensor is uniform for method "dip_u" and normal for
    "dip_n"; the loss is MSE at the Bayer positions only.
    """
    if config.method not in ("dip_u", "dip_n"):
        raise ConfigurationError(
            f"train_single_dip requires dip_u or dip_n, got {config.method!r}"
        )
    h, w, mask_t, _raw_t, obs_t = _prepare(truth, noisy_pair, config)
    arch = config.arch
    seeds = {
        "param": derive_seed(config.rng_seed, "param_single"),
        "input": derive_seed(config.rng_seed, "input_single"),
    }
    net = build_network(3, arch, rng_seed=seeds["param"])
    z = make_seed(
        arch.input_channels, h, w, _seed_distribution(config.method), seeds["input"]
    )
    optimizer = torch.optim.Adam(net.parameters(), lr=config.lr_dm)

    trajectory: list[dict] = []
    loss_history: list[list[float]] = []
    start = time.monotonic()
    for it in range(config.iterations):
        optimizer.zero_grad()
        out = net(z)
        loss = torch.mean((obs_t * mask_t - out * mask_t) ** 2)
        if not torch.isfinite(loss):
            raise TrainingDiverged(it, (loss.item(),))
        loss.backward()
        optimizer.step()
        loss_history.append([float(loss.detach())])
        if (it + 1) % config.eval_every == 0 or it + 1 == config.iterations:
            trajectory.append(
                {"iteration": it + 1, "out": _score(truth, _to_image(out.detach()))}
            )

    final = _to_image(net(z))
    report = RunReport(
        method=config.method,
        config=config.to_dict(),
        config_hash=config.config_hash(),
        seeds=seeds,
        final={"out": _score(truth, final)},
        trajectory=trajectory,
        loss_history=loss_history,
        wall_time_s=time.monotonic() - start,
    )
    return final, report


def train_dm_dm(
    truth: np.ndarray,
    noisy_pair: tuple[np.ndarray, np.ndarray],
    config: TrainConfig,
) -> tuple[np.ndarray, np.ndarray, RunReport]:
    """Over-parameterization control: the 1-channel denoising branch is
    replaced by a second 3-channel demosaicer. Each net is trained with
    the same two-term masked loss as the demosaicing branch — guidance
    from the other net plus the alpha-weighted observation term — joined
    by the same square-root coupling. Parameter count stays within 1% of
    the two-branch method. Unlike the main method, neither net sees the
    dense raw observation; both anchors to data are sparse and
    alpha-weighted, which is what makes this control drift-prone.
    """
    if config.method != "dm_dm":
        raise ConfigurationError(f"train_dm_dm requires method 'dm_dm', got {config.method!r}")
    h, w, mask_t, _raw_t, obs_t = _prepare(truth, noisy_pair, config)
    arch = config.arch
    seeds = {
        "param_dn": derive_seed(config.rng_seed, "param_dn"),
        "param_dm": derive_seed(config.rng_seed, "param_dm"),
        "input_dn": derive_seed(config.rng_seed, "input_dn"),
        "input_dm": derive_seed(config.rng_seed, "input_dm"),
    }
    net_a = build_network(3, arch, rng_seed=seeds["param_dn"])
    net_b = build_network(3, arch, rng_seed=seeds["param_dm"])
    z_a = make_seed(arch.input_channels, h, w, "normal", seeds["input_dn"])
    z_b = make_seed(arch.input_channels, h, w, "normal", seeds["input_dm"])
    optimizer = torch.optim.Adam(
        [
            {"params": net_a.parameters(), "lr": config.lr_dn},
            {"params": net_b.parameters(), "lr": config.lr_dm},
        ]
    )

    smoothed = None
    trajectory: list[dict] = []
    loss_history: list[list[float]] = []
    start = time.monotonic()
    for it in range(config.iterations):
        optimizer.zero_grad()
        out_a = net_a(z_a)
        out_b = net_b(z_b)
        guide_for_a = out_b.detach() if config.detach_guidance else out_b
        guide_for_b = out_a.detach() if config.detach_guidance else out_a
        l_a = demosaic_loss(out_a, guide_for_a, obs_t, mask_t, config.alpha)
        l_b = demosaic_loss(out_b, guide_for_b, obs_t, mask_t, config.alpha)
        loss = joint_loss(l_a, l_b)
        if not torch.isfinite(loss):
            raise TrainingDiverged(it, (l_a.item(), l_b.item(), loss.item()))
        loss.backward()
        optimizer.step()
        loss_history.append([float(l_a.detach()), float(l_b.detach()), float(loss.detach())])
        with torch.no_grad():
            out_detached = out_b.detach().to(torch.float64)
            if smoothed is None:
                smoothed = out_detached.clone()
            else:
                smoothed.mul_(config.smoothing_beta).add_(
                    out_detached, alpha=1.0 - config.smoothing_beta
                )
        if (it + 1) % config.eval_every == 0 or it + 1 == config.iterations:
            trajectory.append(
                {
                    "iteration": it + 1,
                    "ours": _score(truth, _to_image(out_detached)),
                    "ours_plus": _score(truth, _to_image(smoothed)),
                }
            )

    final = _to_image(net_b(z_b))
    final_plus = _to_image(smoothed)
    report = RunReport(
        method=config.method,
        config=config.to_dict(),
        config_hash=config.config_hash(),
        seeds=seeds,
        final={"ours": _score(truth, final), "ours_plus": _score(truth, final_plus)},
        trajectory=trajectory,
        loss_history=loss_history,
        wall_time_s=time.monotonic() - start,
    )
    return final, final_plus, report


def run_method(
    truth: np.ndarray,
    noisy_pair: tuple[np.ndarray, np.ndarray],
    config: TrainConfig,
) -> tuple[dict, RunReport]:
    """Uniform dispatch over methods; returns {variant: image} and report."""
    if config.method == "ours":
        ours, plus, report = train_joint(truth, noisy_pair, config)
        return {"ours": ours, "ours_plus": plus}, report
    if config.method == "dm_dm":
        ours, plus, report = train_dm_dm(truth, noisy_pair, config)
        return {"ours": ours, "ours_plus": plus}, report
    out, report = train_single_dip(truth, noisy_pair, config)
    return {"out": out}, report
