"""Command-line interface.

Subcommands:

* simulate -- corrupt one image into a noisy RAW + lifted observation
* run      -- execute the experiment grid
* ablate   -- two-demosaicer over-parameterization comparison
* report   -- aggregate completed runs into tables and panels
* metrics  -- PSNR/SSIM between two image files

Profiles bundle the architecture and iteration defaults: "paper" is the
full-size configuration (5 scales, 128 channels, 5000 iterations, no
crop), "desk" a reduced one for CPU-scale experimentation (4 scales,
16 channels, 1500 iterations, 256x256 crops).
"""

import argparse
import json
from pathlib import Path

from jddip import data, grid, metrics
from jddip.networks import ArchSpec
from jddip.noise import NoiseSpec, make_noisy_observation

PROFILES = {
    "paper": {
        "arch": ArchSpec(scales=5, channels=128, skip_channels=4, input_channels=32),
        "iters": 5000,
        "crop": None,
    },
    "desk": {
        "arch": ArchSpec(
            scales=4, channels=16, skip_channels=4, input_channels=16,
            normalize_input=False,
        ),
        "iters": 1500,
        "crop": 256,
    },
}


def parse_noise(text: str) -> tuple[tuple[str, float], ...]:
    """'gaussian:10,20|poisson:65' -> (('gaussian',10.0), ... )."""
    out = []
    for part in text.split("|"):
        family, _, levels = part.partition(":")
        if not levels:
            raise grid.UsageError(f"noise spec needs levels, got {part!r}")
        for level in levels.split(","):
            out.append((family.strip(), float(level)))
    return tuple(out)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", required=True, help="directory of lossless images")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--crop", type=int, default=None, help="center-crop size")
    p.add_argument("--noise", default="gaussian:30", help="family:levels[|family:levels]")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--iters", type=int, default=None)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--lr-dn", type=float, default=5e-3)
    p.add_argument("--lr-dm", type=float, default=5e-2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--profile", choices=sorted(PROFILES), default="desk")


def _experiment_config(args, methods: tuple[str, ...]) -> grid.ExperimentConfig:
    profile = PROFILES[args.profile]
    return grid.ExperimentConfig(
        dataset=args.dataset,
        out=args.out,
        methods=methods,
        noise=parse_noise(args.noise),
        repeats=args.repeats,
        crop=args.crop if args.crop is not None else profile["crop"],
        global_seed=args.seed,
        iterations=args.iters if args.iters is not None else profile["iters"],
        alpha=args.alpha,
        lr_dn=args.lr_dn,
        lr_dm=args.lr_dm,
        arch=profile["arch"],
        workers=args.workers,
    )


def cmd_simulate(args) -> int:
    image = data.load_image(args.image)
    if args.crop:
        image = data.center_crop(image, args.crop, args.crop)
    image = data.crop_to_multiple(image, 2)
    specs = parse_noise(args.noise)
    if len(specs) != 1:
        raise grid.UsageError("simulate takes exactly one noise level")
    family, intensity = specs[0]
    spec = NoiseSpec(family, intensity, rng_seed=args.seed)
    noisy_raw, noisy_3ch = make_noisy_observation(image, spec)
    out = Path(args.out)
    data.save_raw_image(out / "noisy_raw.png", noisy_raw)
    data.save_image(out / "noisy_lifted.png", noisy_3ch)
    data.save_image(out / "truth.png", image)
    sidecar = {
        "family": family,
        "intensity": intensity,
        "rng_seed": args.seed,
        "raw_encoding": "16-bit PNG, value/65535",
    }
    (out / "noise_spec.json").write_text(json.dumps(sidecar, sort_keys=True, indent=2))
    print(f"wrote noisy RAW, lifted observation and sidecar under {out}")
    return 0


def cmd_run(args) -> int:
    methods = tuple(m.strip() for m in args.methods.split(","))
    config = _experiment_config(args, methods)
    rows = grid.run_grid(config, progress=True)
    grid.write_report(rows, config.out)
    failures = [r["cell_id"] for r in rows if "error" in r]
    print(f"{len(rows)} cells complete, {len(failures)} failed")
    for cid in failures:
        print(f"  failed: {cid}")
    return 1 if failures else 0


def cmd_ablate(args) -> int:
    config = _experiment_config(args, ("ours", "dm_dm"))
    rows = grid.run_grid(config, progress=True)
    agg = grid.write_report(rows, config.out)
    for method in ("ours", "dm_dm"):
        for noise_key, variants in sorted(agg.get(method, {}).items()):
            stats = variants.get("ours", {})
            print(
                f"{method:6s} {noise_key}: "
                f"PSNR {stats.get('psnr_mean', float('nan')):.3f} "
                f"({stats.get('psnr_std', float('nan')):.3f})"
            )
    return 0


def cmd_report(args) -> int:
    rows = grid.load_rows(args.out)
    grid.write_report(rows, args.out)
    if args.panels:
        written = grid.make_panels(args.out)
        print(f"wrote {len(written)} panels")
    print((Path(args.out) / "table_psnr.txt").read_text())
    return 0


def cmd_metrics(args) -> int:
    truth = data.load_image(args.truth)
    estimate = data.load_image(args.estimate)
    print(f"PSNR: {metrics.psnr(truth, estimate):.4f} dB")
    print(f"SSIM: {metrics.ssim(truth, estimate):.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jddip",
        description="Joint demosaicing and denoising of noisy Bayer RAW images",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="emit a noisy RAW observation for one image")
    p.add_argument("image")
    p.add_argument("--out", required=True)
    p.add_argument("--noise", default="gaussian:30")
    p.add_argument("--crop", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("run", help="execute the experiment grid")
    _add_common(p)
    p.add_argument("--methods", default="ours,dip_n,dip_u")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("ablate", help="ours vs two-demosaicer control")
    _add_common(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("report", help="aggregate completed runs")
    p.add_argument("--out", required=True)
    p.add_argument("--panels", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("metrics", help="score an estimate against ground truth")
    p.add_argument("truth")
    p.add_argument("estimate")
    p.set_defaults(func=cmd_metrics)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
