"""How often hiding proportionally to t/q is optimal, and how much it loses.

Draws random two- and three-box games under each sampling scheme and reports
the percentage of games where p0 is optimal together with the suboptimality
distribution.  Increase COUNT for tighter estimates.
"""
from __future__ import annotations

import sys

from searchgame.experiments import SCHEMES, run_scheme_study

COUNT = int(sys.argv[1]) if len(sys.argv) > 1 else 100

print(f"{COUNT} instances per cell\n")
print(f"{'scheme':8s} {'kind':8s} {'n':>2} {'% opt':>6} {'mean':>7} {'p75':>7} {'p95':>7} {'p99':>7}")
for name in SCHEMES:
    for cyclic in (False, True):
        for n in (2, 3):
            _, s = run_scheme_study(name, n, COUNT, seed=2024, cyclic=cyclic)
            kind = "cyclic" if cyclic else "acyclic"
            print(f"{name:8s} {kind:8s} {n:2d} {s.pct_optimal:6.1f} {s.mean:7.3f} {s.p75:7.3f} {s.p95:7.3f} {s.p99:7.3f}")
