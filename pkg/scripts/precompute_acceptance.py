"""Fill the acceptance-run cache ahead of running pytest.

The training-based acceptance criteria reuse completed grid cells from
.cache/acceptance; this script computes them all (several CPU-hours
cold, instant when already cached).
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

import acceptance_config as acc
from jddip import grid

for name, config in (
    ("gaussian ordering", acc.gaussian_ordering_config()),
    ("poisson ordering", acc.poisson_ordering_config()),
    ("stability ablation", acc.stability_config()),
):
    print(f"=== {name} ===", flush=True)
    grid.run_grid(config, progress=True)
print("acceptance cache complete")
