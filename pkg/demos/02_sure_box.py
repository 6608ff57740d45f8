"""Pairing an unreliable box with one that never overlooks the hider.

Box 2 (q=1) is searched once; the searcher's only question is how many looks
box 1 gets first.  The closed-form answer is compared with the general solver.
"""
from __future__ import annotations

from searchgame import ruckle_h, run_algorithm1, validate_instance, verify_solution

print(f"{'q':>5} {'h':>3} {'p* closed form':>15} {'p* solver':>10} {'value':>9} {'iters':>6}")
for q in (0.2, 0.3, 0.38, 0.39, 0.5, 0.61, 0.62, 0.75, 0.9):
    closed = ruckle_h(q)
    inst = validate_instance([(q, 1.0), (1.0, 1.0)])
    sol = run_algorithm1(inst)
    assert verify_solution(inst, sol, tol=1e-5).passed
    print(f"{q:5.2f} {closed.h:3d} {closed.p_star:15.6f} {sol.hider[0]:10.6f} {sol.value:9.5f} {sol.iterations:6d}")

inst = validate_instance([(0.5, 1.0), (1.0, 1.0)])
sol = run_algorithm1(inst)
print("\nAt q = 0.5 the searcher mixes two sequences:")
for m in sol.searcher:
    print(f"  weight {m.weight:.4f}: {m.sequence}  V = {m.profile.values.round(6)}")
