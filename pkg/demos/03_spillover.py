"""A behavioral neighbor can make everyone safer.

D1 guards v3.  D2 guards v4, which is reachable only through v3.  A
rational D2 spends everything on the last edge.  A behavioral D2 also
reinforces the subnetwork in front of v3, which helps D1 too.
"""

from bsgames import DynamicsConfig, find_equilibria, social_optimum
from bsgames.instances import spillover

cfg = DynamicsConfig(n_starts=4, seed=0)
for alpha2 in (1.0, 0.8, 0.6, 0.4):
    s = spillover(1.0, alpha2)
    worst = max(find_equilibria(s, cfg), key=lambda e: e.total_true_cost)
    print(f"alpha2 = {alpha2:.1f}: total true cost {worst.total_true_cost:8.4f}   "
          f"D1 {worst.true_costs['D1']:8.4f}   D2 {worst.true_costs['D2']:8.4f}")
    for k, d in enumerate(s.defenders):
        row = ", ".join(f"{e.src}->{e.dst} {x:.2f}" for e, x in zip(s.graph.edges, worst.profile[k]) if x > 1e-6)
        print(f"    {d.id}: {row}")
print(f"\nsocial optimum (pooled budget, true probabilities): {social_optimum(spillover()).cost:.4f}")
