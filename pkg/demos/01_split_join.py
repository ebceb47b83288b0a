"""Misperception makes a lone defender spread her budget.

A single asset sits behind a split-join network: one edge in, two parallel
branches of two edges each, one edge out.  A defender who sees probabilities
correctly puts the whole budget on edges every attack must cross.  A behavioral defender
also funds the parallel branches, and pays for it in true expected loss.
"""

import math

import numpy as np

from bsgames import best_response, min_edge_cut
from bsgames.instances import split_join

BUDGET = 6.0

s = split_join(1.0, BUDGET)
print("edges:", ", ".join(f"{e.src}->{e.dst}" for e in s.graph.edges))
print("min cut:", [f"{s.graph.edges[i].src}->{s.graph.edges[i].dst}" for i in min_edge_cut(s.graph, "v5")])
print()
print(f"{'alpha':>6} {'allocation':<44} {'perceived':>10} {'true':>10} {'-log true':>10}")
for alpha in (1.0, 0.8, 0.6, 0.5, 0.4, 0.3):
    rep = best_response(split_join(alpha, BUDGET), "D1")
    alloc = np.array2string(rep.x, precision=3, suppress_small=True, floatmode="fixed")
    print(f"{alpha:>6.2f} {alloc:<44} {rep.perceived_cost:>10.3e} {rep.true_cost:>10.3e} "
          f"{-math.log(rep.true_cost):>10.4f}")
print(f"\nthe best achievable true loss is exp(-{BUDGET:g}) = {math.exp(-BUDGET):.3e}")
