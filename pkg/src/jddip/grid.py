"""Experiment grid execution and aggregate reporting.

A grid is the cross product images x methods x noise specs x repeats.
Every cell gets a deterministic seed derived by hashing (global seed,
image id, method, noise spec, repeat index), so adding cells never
perturbs existing ones and any single cell can be replayed in
isolation. Completed cells are persisted as individual JSON files and
skipped on rerun; the canonical machine-readable report (runs.jsonl) is
recompiled from them after every run and excludes volatile fields such
as wall time, so two executions of the same config produce
byte-identical reports.

Aggregation follows the repeat-round convention: within one round the
per-image scores are averaged, then mean and standard deviation are
taken across rounds (population std, so a single round reports std 0).
"""

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from jddip import data
from jddip.networks import ArchSpec
from jddip.noise import NoiseSpec, make_noisy_observation
from jddip.training import RunReport, TrainConfig, derive_seed, run_method


class UsageError(ValueError):
    """Raised on empty or inconsistent grid inputs."""


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    out: str
    methods: tuple[str, ...] = ("ours",)
    noise: tuple[tuple[str, float], ...] = (("gaussian", 30.0),)
    repeats: int = 5
    crop: int | None = None
    global_seed: int = 0
    iterations: int = 5000
    alpha: float = 0.1
    lr_dn: float = 5e-3
    lr_dm: float = 5e-2
    eval_every: int = 100
    smoothing_beta: float = 0.99
    arch: ArchSpec = field(default_factory=ArchSpec)
    workers: int = 1
    save_images: bool = True

    def __post_init__(self) -> None:
        if self.repeats < 1:
            raise UsageError("repeats must be >= 1")
        if not self.methods or not self.noise:
            raise UsageError("methods and noise grid must be non-empty")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["arch"] = self.arch.to_dict()
        return d


def cell_id(image_id: str, method: str, family: str, intensity: float, repeat: int) -> str:
    return f"{image_id}|{method}|{family}:{intensity:g}|r{repeat}"


def cell_seed(global_seed: int, cid: str) -> int:
    return derive_seed(global_seed, cid)


def _cell_path(outdir: Path, cid: str) -> Path:
    slug = hashlib.sha1(cid.encode()).hexdigest()[:16]
    safe = cid.replace("|", "_").replace(":", "-")
    return outdir / "cells" / f"{safe}_{slug}.json"


def list_cells(config: ExperimentConfig, image_ids: list[str]) -> list[str]:
    return [
        cell_id(img, method, family, intensity, repeat)
        for img in image_ids
        for method in config.methods
        for family, intensity in config.noise
        for repeat in range(config.repeats)
    ]


def execute_cell(
    cid: str, truth: np.ndarray, config: ExperimentConfig
) -> tuple[dict, float]:
    """Run one (image, method, noise, repeat) cell to a report row."""
    image_id, method, noise_part, repeat_part = cid.split("|")
    family, intensity_s = noise_part.split(":")
    repeat = int(repeat_part[1:])
    seed = cell_seed(config.global_seed, cid)

    spec = NoiseSpec(family, float(intensity_s), rng_seed=derive_seed(seed, "noise"))
    noisy_pair = make_noisy_observation(truth, spec)
    train_config = TrainConfig(
        method=method,
        alpha=config.alpha,
        lr_dn=config.lr_dn,
        lr_dm=config.lr_dm,
        iterations=config.iterations,
        smoothing_beta=config.smoothing_beta,
        eval_every=config.eval_every,
        arch=config.arch,
        rng_seed=derive_seed(seed, "train"),
    )
    outputs, report = run_method(truth, noisy_pair, train_config)
    report.image_id = image_id
    report.noise = {"family": family, "intensity": float(intensity_s), "repeat": repeat}
    row = report.to_row()
    row["cell_id"] = cid
    row["cell_seed"] = seed
    if config.save_images:
        imgdir = Path(config.out) / "images"
        safe = cid.replace("|", "_").replace(":", "-")
        data.save_raw_image(imgdir / f"{safe}_noisy_raw.png", noisy_pair[0])
        for variant, image in outputs.items():
            data.save_image(imgdir / f"{safe}_{variant}.png", image)
    return row, report.wall_time_s


def _execute_cell_worker(args) -> tuple[str, dict, float]:
    cid, truth, config = args
    try:
        row, wall = execute_cell(cid, truth, config)
    except Exception as exc:  # record and continue with the grid
        row, wall = {"cell_id": cid, "error": f"{type(exc).__name__}: {exc}"}, 0.0
    return cid, row, wall


def run_grid(config: ExperimentConfig, progress: bool = False) -> list[dict]:
    """Execute all pending cells, then recompile the canonical report.

    Returns the full list of report rows (completed plus newly run),
    sorted by cell id. A failing cell is recorded as an error row and
    the grid continues.
    """
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    images = dict(data.ingest_dataset(config.dataset, crop=config.crop))
    factor = 2**config.arch.scales
    images = {k: data.crop_to_multiple(v, factor) for k, v in images.items()}

    cells = list_cells(config, sorted(images))
    pending = [cid for cid in cells if not _cell_path(outdir, cid).exists()]
    if progress:
        print(f"{len(cells)} cells, {len(pending)} pending")

    def finish(cid: str, row: dict, wall: float) -> None:
        row["_wall_time_s"] = wall
        path = _cell_path(outdir, cid)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(row, sort_keys=True))
        if progress:
            summary = row.get("final", row.get("error"))
            print(f"done {cid} ({wall:.1f}s): {summary}", flush=True)

    if config.workers > 1 and pending:
        jobs = [(cid, images[cid.split("|")[0]], config) for cid in pending]
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for cid, row, wall in pool.map(_execute_cell_worker, jobs):
                finish(cid, row, wall)
    else:
        for cid in pending:
            try:
                row, wall = execute_cell(cid, images[cid.split("|")[0]], config)
            except Exception as exc:  # record and continue with the grid
                row, wall = {"cell_id": cid, "error": f"{type(exc).__name__}: {exc}"}, 0.0
            finish(cid, row, wall)

    rows = []
    for cid in cells:
        row = json.loads(_cell_path(outdir, cid).read_text())
        row.pop("_wall_time_s", None)
        rows.append(row)
    with open(outdir / "runs.jsonl", "w") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    return rows


def load_rows(outdir: str | Path) -> list[dict]:
    path = Path(outdir) / "runs.jsonl"
    if not path.exists():
        raise UsageError(f"no report found at {path}; run the grid first")
    return [json.loads(line) for line in path.read_text().splitlines() if line]


def aggregate(rows: list[dict]) -> dict:
    """mean/std per (method, noise, output variant, metric).

    Round r's score is the mean over images at repeat index r; the
    reported mean/std are over rounds.
    """
    rows = [r for r in rows if "error" not in r]
    if not rows:
        raise UsageError("no successful rows to aggregate")
    groups: dict[tuple, dict[int, list]] = {}
    for row in rows:
        noise_key = f"{row['noise']['family']}:{row['noise']['intensity']:g}"
        for variant, scores in row["final"].items():
            key = (row["method"], noise_key, variant)
            groups.setdefault(key, {}).setdefault(row["noise"]["repeat"], []).append(scores)
    result: dict = {}
    for (method, noise_key, variant), by_repeat in sorted(groups.items()):
        rounds_psnr = [np.mean([s["psnr"] for s in v]) for _, v in sorted(by_repeat.items())]
        rounds_ssim = [np.mean([s["ssim"] for s in v]) for _, v in sorted(by_repeat.items())]
        result.setdefault(method, {}).setdefault(noise_key, {})[variant] = {
            "psnr_mean": float(np.mean(rounds_psnr)),
            "psnr_std": float(np.std(rounds_psnr)),
            "ssim_mean": float(np.mean(rounds_ssim)),
            "ssim_std": float(np.std(rounds_ssim)),
            "rounds": len(rounds_psnr),
        }
    return result


def format_table(agg: dict, metric: str = "psnr") -> str:
    """Human-readable grid: rows = method/variant, columns = noise levels."""
    noise_keys = sorted({nk for m in agg.values() for nk in m})
    lines = []
    header = ["method/variant"] + noise_keys
    widths = [24] + [18] * len(noise_keys)
    lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for method in sorted(agg):
        variants = sorted({v for nk in agg[method].values() for v in nk})
        for variant in variants:
            cells = []
            for nk in noise_keys:
                stats = agg[method].get(nk, {}).get(variant)
                if stats is None:
                    cells.append("-")
                    continue
                mean = stats[f"{metric}_mean"]
                std = stats[f"{metric}_std"]
                cells.append("inf" if math.isinf(mean) else f"{mean:.3f} ({std:.3f})")
            label = f"{method}/{variant}"
            lines.append(
                "  ".join(c.ljust(w) for c, w in zip([label] + cells, widths))
            )
    return "\n".join(lines) + "\n"


def write_report(rows: list[dict], outdir: str | Path) -> dict:
    """Emit aggregate.json plus per-metric text tables; returns aggregate."""
    if not rows:
        raise UsageError("cannot report on an empty collection")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    agg = aggregate(rows)
    (outdir / "aggregate.json").write_text(json.dumps(agg, sort_keys=True, indent=2))
    for metric in ("psnr", "ssim"):
        (outdir / f"table_{metric}.txt").write_text(format_table(agg, metric))
    return agg


def make_panels(outdir: str | Path, repeat: int = 0) -> list[Path]:
    """Side-by-side reconstruction panels from the saved cell images.

    One panel per (image, noise) pairing: each method's first-repeat
    output laid out horizontally. Requires the grid to have run with
    save_images=True.
    """
    from PIL import Image

    outdir = Path(outdir)
    imgdir = outdir / "images"
    rows = load_rows(outdir)
    panels: dict[tuple, list[Path]] = {}
    for row in rows:
        if "error" in row or row["noise"]["repeat"] != repeat:
            continue
        cid = row["cell_id"]
        safe = cid.replace("|", "_").replace(":", "-")
        variant = "ours" if "ours" in row["final"] else "out"
        key = (row["image_id"], row["noise"]["family"], row["noise"]["intensity"])
        panels.setdefault(key, []).append(imgdir / f"{safe}_{variant}.png")
    written = []
    for (image_id, family, intensity), paths in sorted(panels.items()):
        tiles = [np.asarray(Image.open(p).convert("RGB")) for p in sorted(paths)]
        height = min(t.shape[0] for t in tiles)
        strip = np.concatenate([t[:height] for t in tiles], axis=1)
        target = outdir / "panels" / f"{image_id}_{family}-{intensity:g}.png"
        target.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(strip).save(target)
        written.append(target)
    return written
