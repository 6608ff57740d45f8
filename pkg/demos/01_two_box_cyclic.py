"""A two-box game where the hider has a whole interval of optimal strategies.

Box 1 is searched with q=0.4 in 1 time unit, box 2 with q=0.64 in 0.6 units.
Two misses in box 1 leave the same residual doubt as one miss in box 2,
so the game is cyclic with exponents (2, 1).
"""
from __future__ import annotations

import numpy as np

from searchgame import (
    compute_p0,
    enumerate_constant_tiebreak_sequences,
    evaluate_realization,
    run_algorithm1,
    test_hiding_optimality,
    validate_instance,
    verify_solution,
)

inst = validate_instance([(0.4, 1.0), (0.64, 0.6)], [2, 1])
p0 = compute_p0(inst)
print(f"p0 = {p0.probs.round(6)}  (hiding proportional to t/q)")

print("\nGittins sequences against p0, one per tie-break ordering:")
for seq in enumerate_constant_tiebreak_sequences(inst, p0):
    print(f"  {seq}  V = {evaluate_realization(inst, seq).values}")

print("\nScanning hiding probabilities for box 1:")
for p1 in np.linspace(0.65, 0.9, 11):
    v = test_hiding_optimality(inst, [p1, 1 - p1])
    print(f"  p1 = {p1:.3f}  {v.verdict:12s} v(p) = {v.v_p:.6f}")
print("  (the optimal range is [8/11, 40/49] = [0.7273, 0.8163])")

sol = run_algorithm1(inst)
print(f"\nIterative bounds: L = {sol.lower:.10f}, U = {sol.upper:.10f} after {sol.iterations} iteration(s)")
print(f"hider {sol.hider.probs.round(6)}, certificate: {verify_solution(inst, sol).to_dict()}")
