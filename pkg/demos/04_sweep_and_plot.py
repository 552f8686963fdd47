"""Sweep the strength plane and map which structure gets recovered.

A coarse grid over (lambda, mu) runs the whole pipeline per cell:
construct, generate replicas, sample posteriors, score overlaps.  The
coexistence fraction alpha says which planted structure the sampler's
partitions recover (1 = only the bi-community, 0 = only the
core-periphery, grey = neither); the rendered SVG heatmaps show the
familiar banded layout.

Writes its output under demos/output/.
"""

import os

from crossblock.plotting import PlotSpec, emit_heatmap
from crossblock.sweep import SweepConfig, coexistence_fraction, run_grid

OUT = os.path.join(os.path.dirname(__file__), "output")

cfg = SweepConfig(
    mu_values=(0.1, 0.2, 0.3, 0.4, 0.5),
    lambda_values=(0.1, 0.2, 0.3, 0.4, 0.5),
    replicas=1,
    samples_per_graph=5,
    variants=("ndc",),
    burn_in_sweeps=400,
    base_seed=7,
)
grid = run_grid(cfg, out_dir=OUT)
print(f"{len(grid.cells)} cells finished; tables in {OUT}")

print("\nalpha at threshold 0.75 (rows mu top-down, columns lambda):")
for mu in reversed(cfg.mu_values):
    row = []
    for lam in cfg.lambda_values:
        alpha = coexistence_fraction(grid.cell(lam, mu, 10.0), 0.75)
        row.append(" .  " if alpha is None else f"{alpha:.2f}")
    print(f"  mu={mu:.2f}  " + " ".join(row))

results = os.path.join(OUT, "results.csv")
for metric in ("omega_cross", "omega_p1", "omega_p2", "alpha"):
    path = os.path.join(OUT, f"{metric}.svg")
    emit_heatmap(results, PlotSpec(metric=metric, omega_t=0.75), path)
    print(f"wrote {path}")
