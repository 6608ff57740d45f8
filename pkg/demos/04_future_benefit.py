"""Why the hider leans toward the box that teaches the searcher least.

For random two-box games, relabelled so box 1 has the smaller future benefit
-log(1-q)/t, compare the log ratio of future benefits with the log odds of
the optimal strategy against p0.  Writes a plot-ready CSV next to this file.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from searchgame.experiments import future_benefit_scatter, scatter_csv

rows, summary = future_benefit_scatter(500, seed=7)
out = Path(__file__).with_name("future_benefit.csv")
out.write_text(scatter_csv(rows))

x = np.array([r.log_fb_ratio for r in rows if r.error is None])
y = np.array([r.log_odds for r in rows if r.error is None])
print(f"{summary.count} games, {100 * summary.frac_negative:.1f}% with negative log odds")
print(f"p* equals p0 in {100 * np.mean(np.abs(y) < 1e-6):.1f}% of games")
print(f"Spearman correlation {summary.spearman:.3f}")
for lo, hi in [(0, 0.5), (0.5, 1), (1, 2), (2, np.inf)]:
    sel = (x >= lo) & (x < hi)
    if sel.any():
        print(f"  log FB ratio in [{lo}, {hi}): {sel.sum():4d} games, mean log odds {y[sel].mean():.4f}")
print(f"wrote {out}")
