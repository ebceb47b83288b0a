"""The same game can settle in more than one equilibrium.

Two behavioral defenders share a small network.  Starting best-response
dynamics from two different allocations leads to two different pure Nash
equilibria with different costs for both players.
"""

import math

from bsgames import DynamicsConfig, best_response_dynamics, find_equilibria
from bsgames.instances import multi_pne, multi_pne_profiles

s = multi_pne()
starts = multi_pne_profiles(s)

for label, start in starts.items():
    res = best_response_dynamics(s, start)
    print(f"start {label}: settled={res.converged} after {res.rounds} round(s), "
          f"max residual {res.max_residual:.1e}")
    for k, d in enumerate(s.defenders):
        print(f"  {d.id}: perceived exp(-{-math.log(res.perceived_costs[d.id]):.3f})  "
              f"true exp(-{-math.log(res.true_costs[d.id]):.3f})  row {res.profile[k].round(3)}")

eqs = find_equilibria(s, DynamicsConfig(n_starts=20, seed=7))
print(f"\nrandom restarts find {len(eqs)} distinct equilibria; total true costs:")
for e in sorted(eqs, key=lambda e: e.total_true_cost):
    print(f"  {e.total_true_cost:.3e}")
